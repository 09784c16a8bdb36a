#include "gcmp/likelihood.hpp"

#include <cmath>
#include <stdexcept>

namespace gcmp {

PathFunction lr(const JointModel& model, ParamPair num, ParamPair den,
                const Partition& field) {
  if (field.space != &model.space())
    throw std::invalid_argument("incompatible spaces");
  return rn_derivative(model.measure(num), model.measure(den), field);
}

PathFunction lr(const LRQuery& query) {
  if (!query.model || !query.field) throw std::invalid_argument("empty query");
  return lr(*query.model, query.num, query.den, *query.field);
}

PathFunction conditional_lr(const JointModel& model, const Partition& target,
                            const Partition& given, ParamPair num,
                            ParamPair den) {
  const Partition both = join(target, given);
  const PathFunction l_both = lr(model, num, den, both);
  const PathFunction l_given = lr(model, num, den, given);
  PathFunction out;
  out.space = l_both.space;
  out.v.resize(l_both.v.size());
  for (std::size_t i = 0; i < out.v.size(); ++i)
    out.v[i] = l_both.v[i] / l_given.v[i];
  return out;
}

AtomValue observed_lr(const JointModel& model, const Observation& obs,
                      ParamPair num, ParamPair den) {
  const auto hit = any_path_of_observation(model, obs);
  if (!hit) throw std::runtime_error("observation off support");
  const Partition o = observed_partition(model);
  const std::uint32_t atom = o.atom_of[*hit];

  const Measure& mu_num = model.measure(num);
  const Measure& mu_den = model.measure(den);
  const double top = mu_num.mass(o.atoms[atom]);
  const double bot = mu_den.mass(o.atoms[atom]);
  if (bot <= 0.0) throw std::runtime_error("observation off support");
  const double ratio = top / bot;

  // Cross-check via the conditional-expectation route.
  PathFunction l_full = lr(model, num, den, discrete_partition(model.space()));
  const PathFunction proj = cond_expect(l_full, o, mu_den);
  if (!nearly_equal(proj.v[*hit], ratio, kSumTol))
    throw std::runtime_error("observed_lr cross-check failed");

  return {ratio, atom};
}

AtomValue ignoring_lr(const JointModel& model, const Observation& obs,
                      int theta, int theta0) {
  const auto hit = any_path_of_observation(model, obs);
  if (!hit) throw std::runtime_error("observation off support");
  const Partition xr = fixed_r_partition(model, obs.r);
  const std::uint32_t atom = xr.atom_of[*hit];
  // The X^r-atom mass aggregates over all r-paths, so the mechanism factor
  // integrates out: mass under (theta, psi) = marginal P_theta of the atom.
  const int psi_ref = model.reference().psi;
  const Measure& mu_num = model.measure({theta, psi_ref});
  const Measure& mu_den = model.measure({theta0, psi_ref});
  const double bot = mu_den.mass(xr.atoms[atom]);
  if (bot <= 0.0) throw std::runtime_error("observation off support");
  return {mu_num.mass(xr.atoms[atom]) / bot, atom};
}

double jacod_phi(std::span<const std::vector<double>> lambda_num,
                 std::span<const std::vector<double>> lambda_den,
                 std::span<const int> n) {
  const std::size_t tau = n.size();
  if (lambda_num.size() != tau || lambda_den.size() != tau)
    throw std::invalid_argument("invalid times");
  std::vector<double> factors;
  factors.reserve(tau);
  for (std::size_t t = 0; t < tau; ++t) {
    const auto& ln = lambda_num[t];
    const auto& ld = lambda_den[t];
    if (ln.size() != ld.size() || ln.empty())
      throw std::invalid_argument("invalid compensator increment");
    CompensatedSum tot_n, tot_d;
    for (std::size_t h = 0; h < ln.size(); ++h) {
      if (!(ln[h] > 0.0 && ln[h] < 1.0) || !(ld[h] > 0.0 && ld[h] < 1.0))
        throw std::runtime_error("invalid compensator increment");
      tot_n.add(ln[h]);
      tot_d.add(ld[h]);
    }
    if (!(tot_n.value() < 1.0) || !(tot_d.value() < 1.0))
      throw std::runtime_error("invalid compensator increment");
    if (n[t] < 0) {
      factors.push_back((1.0 - tot_n.value()) / (1.0 - tot_d.value()));
    } else {
      if (n[t] >= static_cast<int>(ln.size()))
        throw std::invalid_argument("simultaneous jumps unsupported");
      factors.push_back(ln[n[t]] / ld[n[t]]);
    }
  }
  // Short products stay in the linear domain; long ones go through logs to
  // dodge underflow.
  if (factors.size() <= 32) {
    double out = 1.0;
    for (double f : factors) out *= f;
    return out;
  }
  CompensatedSum logsum;
  for (double f : factors) logsum.add(std::log(f));
  return std::exp(logsum.value());
}

double survival_lr(const HazardSpec& h, std::optional<int> event_time,
                   int censor_time, const ParamVec& theta,
                   const ParamVec& theta0) {
  if (censor_time < 0 || censor_time > h.grid.horizon)
    throw std::invalid_argument("invalid times");
  if (event_time && (*event_time < 1 || *event_time > censor_time))
    throw std::invalid_argument("invalid times");
  const int last = event_time ? *event_time : censor_time;
  std::vector<double> factors;
  for (int t = 1; t <= last; ++t) {
    const double ln = h.hazard(theta, t);
    const double ld = h.hazard(theta0, t);
    if (!(ln > 0.0 && ln < 1.0) || !(ld > 0.0 && ld < 1.0))
      throw std::runtime_error("invalid compensator increment");
    if (event_time && t == *event_time)
      factors.push_back(ln / ld);
    else
      factors.push_back((1.0 - ln) / (1.0 - ld));
  }
  if (factors.size() <= 32) {
    double out = 1.0;
    for (double f : factors) out *= f;
    return out;
  }
  CompensatedSum logsum;
  for (double f : factors) logsum.add(std::log(f));
  return std::exp(logsum.value());
}

}  // namespace gcmp
