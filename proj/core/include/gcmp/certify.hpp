#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gcmp/likelihood.hpp"
#include "gcmp/model.hpp"

namespace gcmp {

// Increasing sequence of partitions, stage t holding the information at
// integer time t (stage 0 is the declared starting field).
struct Filtration {
  std::vector<Partition> stages;
  std::string label;
};

Filtration observed_filtration(const JointModel& model);       // O_t
Filtration fstar_filtration(const JointModel& model);          // X ∨ O_t
Filtration x_filtration(const JointModel& model);              // X_t
// sigma(X prefix, R prefix) -- the joint filtration used for independent
// censoring checks.
Filtration joint_filtration(const JointModel& model);

// How R is read as a counting process: Visits counts observation times
// (dN_t = r_t); Windows counts flips of the window indicator (r_0 := 1).
enum class CountingConvention { Visits, Windows };

// Per-path mark sequence of the counting representation. Mark m_t lives in
// 0..mark_count-1 and fully determines the step (for Visits the mark is the
// r-mask itself, so N carries the same information as R).
struct CountingProcess {
  CountingConvention convention = CountingConvention::Visits;
  int mark_count = 2;
  std::vector<std::vector<unsigned>> marks;  // [path][t]
};

CountingProcess counting_of_R(const JointModel& model,
                              CountingConvention convention);

// Counting representation of one X-component (must be 0/1 valued and
// nondecreasing on the support): dN_t = x_t - x_{t-1}, x_0 := 0.
CountingProcess counting_of_X(const JointModel& model, int component);

// Predictable per-step conditional mark probabilities:
// increments[t-1][m](path) = P(mark_t = m | stage_{t-1} atom).
struct Compensator {
  std::vector<std::vector<PathFunction>> increments;
  ParamPair params;
  std::string filtration_label;
};

Compensator compensator(const JointModel& model, const CountingProcess& N,
                        const Filtration& filtration, ParamPair params);

enum class Verdict { Holds, Fails, NotApplicable, PreconditionFailed };

std::string to_string(Verdict v);

struct Witness {
  ParamPair num;
  ParamPair den;
  int t = -1;
  std::uint32_t atom = 0;
  std::uint32_t path_a = 0;
  std::uint32_t path_b = 0;
  std::string detail;
};

struct Certificate {
  std::string condition;
  Verdict verdict = Verdict::Holds;
  std::optional<Witness> witness;
  double tolerance = kDerivedTol;
};

Certificate check_car_dyn(const JointModel& model,
                          CountingConvention convention = CountingConvention::Visits);
Certificate check_car_gcmp(const JointModel& model);
Certificate check_car_rel(const JointModel& model);
Certificate check_car_abs(const JointModel& model);
Certificate check_car_loc(const JointModel& model, std::span<const unsigned> r);
Certificate check_ignorable(const JointModel& model,
                            std::span<const unsigned> r);
Certificate check_factorization(const JointModel& model);
Certificate check_independent_censoring(const JointModel& model,
                                        int component = 0);

// Ignorability after a fixed vertical coarsening: observed ratio on the
// O'-atom against the ignoring ratio on the coarsened X'^r-atom.
Certificate check_ignorable_coarse(const JointModel& model,
                                   const VerticalCoarsener& v,
                                   std::span<const unsigned> r);

// Stepwise kernel form of missing-at-random for visit-style schemes: at each
// t, the mechanism kernel must give the same r_t law for any two x-paths
// agreeing on the coordinates visible under the shared r-history.
Certificate check_stepwise_kernel_mar(const JointModel& model);

// True iff every compensator increment of R's counting representation under
// the observed filtration is 0 or 1 (Doob-Meyer: N is its own compensator).
bool is_predictable(const JointModel& model,
                    CountingConvention convention = CountingConvention::Visits);

struct BatteryResult {
  Certificate dyn, gcmp, rel, abs, factorization;
  std::vector<std::pair<std::vector<unsigned>, Certificate>> loc;
  std::vector<std::pair<std::vector<unsigned>, Certificate>> ignorable;
  std::vector<std::string> violated_arrows;  // empty = all implications hold
};

// Implication arrows recomputed from the certificates alone, so tests can
// tamper with a BatteryResult and confirm the violation is caught.
std::vector<std::string> implication_violations(const BatteryResult& result);

// Evaluates every certificate and asserts the implication arrows
// DYN => GCMP, DYN => loc(r), ABS => loc(r), loc(r) => ignorable(r),
// plus the GCMP <=> REL equivalence.
BatteryResult theorem_battery(const JointModel& model);

}  // namespace gcmp
