#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gcmp/model.hpp"

namespace gcmp {

struct LRQuery {
  const JointModel* model = nullptr;
  ParamPair num;
  ParamPair den;
  const Partition* field = nullptr;
};

// Likelihood ratio restricted to query.field (a Radon-Nikodym derivative).
PathFunction lr(const LRQuery& query);
PathFunction lr(const JointModel& model, ParamPair num, ParamPair den,
                const Partition& field);

// L_{target|given} = L_{target ∨ given} / L_{given}.
PathFunction conditional_lr(const JointModel& model, const Partition& target,
                            const Partition& given, ParamPair num,
                            ParamPair den);

// An evaluated ratio together with the atom it was read off, for reports.
struct AtomValue {
  double value = 1.0;
  std::uint32_t atom = 0;
};

// L_O at the atom of obs: mass ratio of the O-atom, cross-checked against
// E_den[L_F | O] on the same atom.
AtomValue observed_lr(const JointModel& model, const Observation& obs,
                      ParamPair num, ParamPair den);

// Likelihood ratio ignoring the mechanism: L_{X^r} at the atom matching obs,
// computed as if r were fixed. Never depends on psi.
AtomValue ignoring_lr(const JointModel& model, const Observation& obs,
                      int theta, int theta0);

// Discrete product-integral likelihood ratio of a counting path: per-step
// jump factors (lambda_h/lambda0_h)^{dN_h} and a shared no-jump factor
// (1 - lambda_.)/(1 - lambda0_.). At most one jump per step.
// lambda_num[t][h] are per-step increments, n[t] in {-1, 0..H-1} with -1
// meaning no jump and h meaning component h jumped.
double jacod_phi(std::span<const std::vector<double>> lambda_num,
                 std::span<const std::vector<double>> lambda_den,
                 std::span<const int> n);

struct HazardSpec {
  // Discrete per-step event probability in (0,1); t is 1-based.
  std::function<double(const ParamVec& theta, int t)> hazard;
  TimeGrid grid;
};

// Closed-form survival likelihood ratio: event at event_time (delta = 1) or
// censored at censor_time (delta = 0), hazard/product form.
double survival_lr(const HazardSpec& h, std::optional<int> event_time,
                   int censor_time, const ParamVec& theta,
                   const ParamVec& theta0);

}  // namespace gcmp
