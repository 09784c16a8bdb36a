#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gcmp/pathspace.hpp"

namespace gcmp {

using ParamVec = std::vector<double>;

// Sequential law of X: probability of x_t given the history x_1..x_{t-1}.
// t is 1-based; hist has length t-1 of product-coded states.
using ProcessKernelFn = std::function<double(
    const ParamVec& theta, int t, std::span<const int> hist, int x_t)>;

struct ProcessModel {
  StateSpace states;
  TimeGrid grid;
  ProcessKernelFn kernel;
  std::vector<ParamVec> theta_grid;
  std::optional<int> absorbing_state;  // product-coded
};

enum class DependenceClass { PastObservedOnly, PastXOnly, Anticipating };

// Sequential law of R given the FULL x-path (anticipating mechanisms are
// expressible on purpose) and the r-history r_1..r_{t-1}. Takes no theta.
using MechanismKernelFn = std::function<double(
    const ParamVec& psi, int t, std::span<const int> x_full,
    std::span<const unsigned> r_hist, unsigned r_t)>;

struct MechanismKernel {
  int r_dim = 1;
  MechanismKernelFn kernel;
  std::vector<ParamVec> psi_grid;
  DependenceClass declared = DependenceClass::Anticipating;
};

struct ParamPair {
  int theta = 0;
  int psi = 0;
  bool operator==(const ParamPair&) const = default;
};

inline constexpr int kMaskSentinel = -1;

// Realized observation: the r-path plus, per time and X-component, the
// observed symbol or kMaskSentinel where hidden. The sentinel is not a
// member of any alphabet, so masked zeros never collide with observed ones.
struct Observation {
  std::vector<unsigned> r;
  std::vector<std::vector<int>> x_obs;  // [t][component]

  bool operator==(const Observation&) const = default;
};

// Which X-components are revealed by the r-mask at one time point.
// r_dim == x_dim pairs components; r_dim == 1 gates the whole state.
unsigned visible_components(unsigned r_mask, int x_dim, int r_dim);

class JointModel {
 public:
  JointModel(ProcessModel process, MechanismKernel mechanism,
             ParamPair reference, std::size_t path_cap);

  const ProcessModel& process() const { return process_; }
  const MechanismKernel& mechanism() const { return mechanism_; }
  const PathSpace& space() const { return *space_; }
  ParamPair reference() const { return reference_; }
  int theta_count() const { return static_cast<int>(process_.theta_grid.size()); }
  int psi_count() const { return static_cast<int>(mechanism_.psi_grid.size()); }

  const Measure& measure(ParamPair params) const;
  const Measure& reference_measure() const { return measure(reference_); }

  // Exact whole-path marginals for arbitrary parameter values.
  double process_path_prob(const ParamVec& theta, std::span<const int> x) const;
  double mechanism_cond_prob(const ParamVec& psi, std::span<const int> x,
                             std::span<const unsigned> r) const;
  // Probability vector over the support for off-grid parameters (for
  // continuous-theta search); not cached.
  Measure make_measure(const ParamVec& theta, const ParamVec& psi) const;

  Observation observation_of(std::uint32_t path_index) const;
  Observation observation_of(const Path& p) const;

 private:
  ProcessModel process_;
  MechanismKernel mechanism_;
  ParamPair reference_;
  std::shared_ptr<PathSpace> space_;  // stable address, support-restricted
  std::vector<Measure> measures_;     // theta-major

  void validate_kernels_on(const PathSpace& full) const;
};

JointModel build_joint(ProcessModel process, MechanismKernel mechanism,
                       ParamPair reference, std::size_t path_cap = 100000);

// O = sigma(R_t X_t, R_t): atoms group paths with equal r and equal visible x.
Partition observed_partition(const JointModel& model);
// Same information truncated to times 1..t (t = 0 gives the trivial field).
Partition observed_partition_upto(const JointModel& model, int t);

// X^r = sigma(X_t : r_t = 1) for a FIXED r-path; ignores the actual R of
// each path. An all-zero r yields the trivial partition.
Partition fixed_r_partition(const JointModel& model,
                            std::span<const unsigned> r);

Partition sigma_x(const JointModel& model);
Partition sigma_x_upto(const JointModel& model, int t);
Partition sigma_r(const JointModel& model);
Partition sigma_r_upto(const JointModel& model, int t);

// Event {R = r} as the list of support path indices.
std::vector<std::uint32_t> event_r_equals(const JointModel& model,
                                          std::span<const unsigned> r);
// Distinct r-paths carried by the support.
std::vector<std::vector<unsigned>> support_r_paths(const JointModel& model);

// Deterministic, parameter-free coarsening of observed values.
struct VerticalCoarsener {
  // maps[h][symbol] -> coarse label for component h
  std::vector<std::vector<int>> maps;
  std::string label;
};

VerticalCoarsener identity_coarsener(const StateSpace& states);

// O' generated by (r, v(x_t) at visible coordinates); coarser than O.
Partition apply_vertical(const JointModel& model, const VerticalCoarsener& v);

// Rewrites the mechanism so that once the absorbing state has been observed,
// R is forced to all-ones afterwards, and rebuilds the model. Idempotent.
JointModel enforce_absorbing_convention(const JointModel& model,
                                        std::size_t path_cap = 100000);

// Some support path producing exactly this observation, if one exists.
std::optional<std::uint32_t> any_path_of_observation(const JointModel& model,
                                                     const Observation& obs);

}  // namespace gcmp
