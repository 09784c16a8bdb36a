#include "gcmp/battery.hpp"

#include <stdexcept>

namespace gcmp {

namespace {

double draw_prob(Xoshiro256& rng) { return 0.15 + 0.7 * rng.uniform(); }

}  // namespace

JointModel random_model(Xoshiro256& rng, std::size_t path_cap) {
  const int horizon = 2 + static_cast<int>(rng.next() % 2);

  ProcessModel proc;
  proc.states = StateSpace{{Alphabet{{"0", "1"}}}};
  proc.grid = {horizon, "random"};
  // theta = (P(x_1=1), P(x_t=1 | x_{t-1}=0), P(x_t=1 | x_{t-1}=1))
  proc.theta_grid.resize(2);
  for (auto& theta : proc.theta_grid)
    theta = {draw_prob(rng), draw_prob(rng), draw_prob(rng)};
  proc.kernel = [](const ParamVec& theta, int, std::span<const int> hist,
                   int x) {
    const double p = hist.empty() ? theta[0] : theta[1 + hist.back()];
    return x == 1 ? p : 1.0 - p;
  };

  MechanismKernel mech;
  mech.r_dim = 1;
  const int cls = static_cast<int>(rng.next() % 3);
  // psi: per-condition probabilities of r_t = 1. Conditions by class:
  //   PastObservedOnly: t=1 | previously unobserved | last seen x = 0 | = 1
  //   PastXOnly:        t=1 | x_{t-1} = 0 | x_{t-1} = 1
  //   Anticipating:     x_t = 0 | x_t = 1
  const int psi_len = cls == 0 ? 4 : (cls == 1 ? 3 : 2);
  mech.psi_grid.resize(2);
  for (auto& psi : mech.psi_grid) {
    psi.resize(psi_len);
    for (auto& v : psi) v = draw_prob(rng);
  }
  switch (cls) {
    case 0:
      mech.declared = DependenceClass::PastObservedOnly;
      mech.kernel = [](const ParamVec& psi, int t, std::span<const int> x,
                       std::span<const unsigned> r_hist, unsigned r) {
        double p;
        if (t == 1)
          p = psi[0];
        else if (r_hist[t - 2] == 0u)
          p = psi[1];
        else
          p = psi[2 + x[t - 2]];
        return r == 1u ? p : 1.0 - p;
      };
      break;
    case 1:
      mech.declared = DependenceClass::PastXOnly;
      mech.kernel = [](const ParamVec& psi, int t, std::span<const int> x,
                       std::span<const unsigned>, unsigned r) {
        const double p = t == 1 ? psi[0] : psi[1 + x[t - 2]];
        return r == 1u ? p : 1.0 - p;
      };
      break;
    default:
      mech.declared = DependenceClass::Anticipating;
      mech.kernel = [](const ParamVec& psi, int t, std::span<const int> x,
                       std::span<const unsigned>, unsigned r) {
        const double p = psi[x[t - 1]];
        return r == 1u ? p : 1.0 - p;
      };
      break;
  }
  return build_joint(std::move(proc), std::move(mech), {0, 0}, path_cap);
}

RandomBatteryReport run_random_battery(std::uint64_t seed, int n,
                                       std::size_t path_cap,
                                       const BatteryHook& hook) {
  if (n < 0) throw std::invalid_argument("invalid battery size");
  RandomBatteryReport report;
  report.requested = n;
  for (int k = 0; k < n; ++k) {
    Xoshiro256 rng = Xoshiro256::stream(seed, static_cast<std::uint64_t>(k));
    BatteryResult result;
    try {
      const JointModel model = random_model(rng, path_cap);
      result = theorem_battery(model);
    } catch (const std::runtime_error& e) {
      if (std::string(e.what()) == "path cap exceeded") {
        ++report.skipped_cap;
        continue;
      }
      throw;
    }
    ++report.evaluated;
    if (hook) {
      hook(result);
      result.violated_arrows = implication_violations(result);
    }
    if (!result.violated_arrows.empty())
      report.violations.emplace_back(k, result.violated_arrows);
  }
  return report;
}

}  // namespace gcmp
