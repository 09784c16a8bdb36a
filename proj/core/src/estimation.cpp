#include "gcmp/estimation.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gcmp {

namespace {

int sample_index(Xoshiro256& rng, std::span<const double> probs) {
  const double u = rng.uniform();
  double acc = 0.0;
  int last_positive = -1;
  for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = i;
    acc += probs[i];
    if (u < acc) return i;
  }
  if (last_positive < 0) throw std::runtime_error("invalid kernel");
  return last_positive;  // u landed in the rounding slack
}

std::string obs_key(const Observation& obs) {
  std::ostringstream os;
  for (std::size_t t = 0; t < obs.r.size(); ++t) {
    os << obs.r[t] << ':';
    for (int v : obs.x_obs[t]) os << v << ',';
    os << ';';
  }
  return os.str();
}

bool path_matches_coords(const JointModel& model, const Path& p,
                         const Observation& obs) {
  const StateSpace& states = model.process().states;
  const int d = states.dim();
  for (std::size_t t = 0; t < obs.r.size(); ++t) {
    const unsigned vis =
        visible_components(obs.r[t], d, model.mechanism().r_dim);
    for (int h = 0; h < d; ++h)
      if ((vis >> h) & 1u)
        if (states.component_of(p.x[t], h) != obs.x_obs[t][h]) return false;
  }
  return true;
}

// Per distinct observation: its weight in the objective plus the support
// material needed to evaluate both likelihood flavours.
struct ObsGroup {
  Observation obs;
  double weight = 0.0;
  std::vector<std::uint32_t> joint_paths;   // observation_of(p) == obs
  std::vector<std::vector<int>> x_compat;   // distinct x matching the coords
};

std::vector<ObsGroup> group_support(const JointModel& model) {
  std::map<std::string, ObsGroup> groups;
  const PathSpace& space = model.space();
  for (std::uint32_t i = 0; i < space.size(); ++i) {
    Observation obs = model.observation_of(i);
    auto [it, fresh] = groups.try_emplace(obs_key(obs));
    if (fresh) it->second.obs = std::move(obs);
    it->second.joint_paths.push_back(i);
  }
  for (auto& [key, g] : groups) {
    std::set<std::vector<int>> seen;
    for (std::uint32_t i = 0; i < space.size(); ++i) {
      const Path& p = space.path(i);
      if (path_matches_coords(model, p, g.obs) && seen.insert(p.x).second)
        g.x_compat.push_back(p.x);
    }
  }
  std::vector<ObsGroup> out;
  out.reserve(groups.size());
  for (auto& [key, g] : groups) out.push_back(std::move(g));
  return out;
}

double group_likelihood(const JointModel& model, const ObsGroup& g,
                        FitMethod method, const ParamVec& theta,
                        const ParamVec& psi_true) {
  CompensatedSum sum;
  if (method == FitMethod::Correct) {
    for (std::uint32_t i : g.joint_paths) {
      const Path& p = model.space().path(i);
      sum.add(model.process_path_prob(theta, p.x) *
              model.mechanism_cond_prob(psi_true, p.x, p.r));
    }
  } else {
    for (const auto& x : g.x_compat)
      sum.add(model.process_path_prob(theta, x));
  }
  return sum.value();
}

double objective(const JointModel& model, const std::vector<ObsGroup>& groups,
                 FitMethod method, const ParamVec& theta,
                 const ParamVec& psi_true) {
  CompensatedSum ll;
  for (const auto& g : groups) {
    if (g.weight == 0.0) continue;
    const double v = group_likelihood(model, g, method, theta, psi_true);
    if (v <= 0.0) return -std::numeric_limits<double>::infinity();
    ll.add(g.weight * std::log(v));
  }
  return ll.value();
}

double maximize_1d(const std::function<double(double)>& f,
                   const SearchSpec& spec) {
  if (!(spec.lo < spec.hi) || spec.coarse_points < 3 || spec.tol <= 0.0)
    throw std::invalid_argument("invalid search spec");
  const int n = spec.coarse_points;
  std::vector<double> grid(n);
  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    grid[i] = spec.lo + (spec.hi - spec.lo) * i / (n - 1);
    const double v = f(grid[i]);
    if (v > best_val) {  // ties resolve toward the smallest theta
      best_val = v;
      best = i;
    }
  }
  double a = grid[best > 0 ? best - 1 : 0];
  double b = grid[best + 1 < n ? best + 1 : n - 1];
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > spec.tol) {
    if (fc >= fd) {  // keep the left interval on ties
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return (a + b) / 2.0;
}

ParamVec with_component(const ParamVec& base, int component, double value) {
  if (component < 0 || component >= static_cast<int>(base.size()))
    throw std::invalid_argument("invalid search spec");
  ParamVec out = base;
  out[component] = value;
  return out;
}

}  // namespace

Dataset simulate(const JointModel& model, const ParamVec& theta,
                 const ParamVec& psi, int n, std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("invalid sample size");
  const ProcessModel& proc = model.process();
  const int tau = proc.grid.horizon;
  const int codes = proc.states.product_size();
  const unsigned masks = model.space().r_mask_count();

  Dataset data;
  data.rows.reserve(n);
  for (int row = 0; row < n; ++row) {
    Xoshiro256 rng = Xoshiro256::stream(seed, static_cast<std::uint64_t>(row));
    Path p;
    std::vector<double> probs;
    for (int t = 1; t <= tau; ++t) {
      probs.assign(codes, 0.0);
      for (int x = 0; x < codes; ++x)
        probs[x] = proc.kernel(theta, t, p.x, x);
      p.x.push_back(sample_index(rng, probs));
    }
    for (int t = 1; t <= tau; ++t) {
      probs.assign(masks, 0.0);
      for (unsigned r = 0; r < masks; ++r)
        probs[r] = model.mechanism().kernel(psi, t, p.x, p.r, r);
      p.r.push_back(static_cast<unsigned>(sample_index(rng, probs)));
    }
    data.rows.push_back(model.observation_of(p));
  }
  return data;
}

void export_dataset(const Dataset& data, const JointModel& model,
                    std::ostream& out) {
  const StateSpace& states = model.process().states;
  out << "id\tt\tr";
  for (int h = 0; h < states.dim(); ++h) out << "\tx" << h;
  out << '\n';
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    const Observation& obs = data.rows[i];
    for (std::size_t t = 0; t < obs.r.size(); ++t) {
      out << i << '\t' << (t + 1) << '\t' << obs.r[t];
      for (int h = 0; h < states.dim(); ++h) {
        const int v = obs.x_obs[t][h];
        if (v == kMaskSentinel)
          out << "\tNA";
        else
          out << '\t' << states.components[h].symbols[v];
      }
      out << '\n';
    }
  }
}

FitResult fit_mle(const JointModel& model, const Dataset& data,
                  FitMethod method, const ParamVec& theta_template,
                  const ParamVec& psi_true, const SearchSpec& spec) {
  std::vector<ObsGroup> groups = group_support(model);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < groups.size(); ++i)
    index.emplace(obs_key(groups[i].obs), i);
  for (const Observation& obs : data.rows) {
    auto it = index.find(obs_key(obs));
    if (it == index.end())
      throw std::runtime_error("observation off support");
    groups[it->second].weight += 1.0;
  }

  auto f = [&](double v) {
    return objective(model, groups, method,
                     with_component(theta_template, spec.component, v),
                     psi_true);
  };
  FitResult result;
  result.theta_hat = maximize_1d(f, spec);
  result.loglik = f(result.theta_hat);
  return result;
}

double population_argmax(const JointModel& model, FitMethod method,
                         const ParamVec& theta_true, const ParamVec& psi_true,
                         const ParamVec& theta_template,
                         const SearchSpec& spec) {
  std::vector<ObsGroup> groups = group_support(model);
  for (auto& g : groups) {
    CompensatedSum w;
    for (std::uint32_t i : g.joint_paths) {
      const Path& p = model.space().path(i);
      w.add(model.process_path_prob(theta_true, p.x) *
            model.mechanism_cond_prob(psi_true, p.x, p.r));
    }
    g.weight = w.value();
  }
  auto f = [&](double v) {
    return objective(model, groups, method,
                     with_component(theta_template, spec.component, v),
                     psi_true);
  };
  return maximize_1d(f, spec);
}

StudyResult run_study(const JointModel& model, FitMethod method,
                      const ParamVec& theta_true, const ParamVec& psi_true,
                      const ParamVec& theta_template, int n, int replicates,
                      std::uint64_t base_seed, const SearchSpec& spec) {
  if (replicates < 1) throw std::invalid_argument("invalid sample size");
  StudyResult out;
  out.estimates.reserve(replicates);
  for (int k = 0; k < replicates; ++k) {
    // Replicate k draws its rows from streams derived off its own sub-seed,
    // so replicates never share RNG output.
    const std::uint64_t rep_seed =
        base_seed ^ ((static_cast<std::uint64_t>(k) + 1) * 0x9E3779B97F4A7C15ull);
    Dataset data = simulate(model, theta_true, psi_true, n, rep_seed);
    out.estimates.push_back(
        fit_mle(model, data, method, theta_template, psi_true, spec).theta_hat);
  }
  CompensatedSum sum;
  for (double e : out.estimates) sum.add(e);
  out.mean = sum.value() / replicates;
  CompensatedSum sq;
  for (double e : out.estimates) sq.add((e - out.mean) * (e - out.mean));
  out.sd = replicates > 1 ? std::sqrt(sq.value() / (replicates - 1)) : 0.0;
  out.se_mean = out.sd / std::sqrt(static_cast<double>(replicates));
  out.bias = out.mean - theta_true[spec.component];
  return out;
}

}  // namespace gcmp
