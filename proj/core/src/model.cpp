#include "gcmp/model.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace gcmp {

unsigned visible_components(unsigned r_mask, int x_dim, int r_dim) {
  if (r_dim == x_dim) return r_mask;
  if (r_dim == 1) return r_mask ? (1u << x_dim) - 1u : 0u;
  throw std::invalid_argument("r_dim must be 1 or equal to the X dimension");
}

namespace {

std::vector<int> observation_key(const StateSpace& states, int r_dim,
                                 const Path& p) {
  std::vector<int> key;
  const int d = states.dim();
  for (std::size_t t = 0; t < p.x.size(); ++t) {
    key.push_back(static_cast<int>(p.r[t]));
    const unsigned vis = visible_components(p.r[t], d, r_dim);
    for (int h = 0; h < d; ++h)
      key.push_back((vis >> h) & 1u ? states.component_of(p.x[t], h)
                                    : kMaskSentinel);
  }
  return key;
}

}  // namespace

JointModel::JointModel(ProcessModel process, MechanismKernel mechanism,
                       ParamPair reference, std::size_t path_cap)
    : process_(std::move(process)),
      mechanism_(std::move(mechanism)),
      reference_(reference) {
  if (process_.theta_grid.empty() || mechanism_.psi_grid.empty())
    throw std::invalid_argument("empty parameter grid");
  if (reference_.theta < 0 || reference_.theta >= theta_count() ||
      reference_.psi < 0 || reference_.psi >= psi_count())
    throw std::invalid_argument("reference pair outside the grids");
  if (mechanism_.r_dim != 1 && mechanism_.r_dim != process_.states.dim())
    throw std::invalid_argument("r_dim must be 1 or equal to the X dimension");

  PathSpace full =
      PathSpace::enumerate(process_.grid, process_.states, mechanism_.r_dim);
  if (full.size() > path_cap) throw std::runtime_error("path cap exceeded");

  validate_kernels_on(full);

  // Support = common positivity set; must agree across the whole family.
  std::vector<char> keep(full.size(), 0);
  std::vector<char> ref_keep;
  for (int ti = 0; ti < theta_count(); ++ti) {
    for (int pi = 0; pi < psi_count(); ++pi) {
      for (std::size_t i = 0; i < full.size(); ++i) {
        const Path& p = full.path(i);
        const double w = process_path_prob(process_.theta_grid[ti], p.x) *
                         mechanism_cond_prob(mechanism_.psi_grid[pi], p.x, p.r);
        keep[i] = w > 0.0 ? 1 : 0;
      }
      if (ref_keep.empty())
        ref_keep = keep;
      else if (ref_keep != keep)
        throw std::runtime_error("non-equivalent family");
    }
  }

  space_ = std::make_shared<PathSpace>(full.restrict(ref_keep));

  measures_.reserve(static_cast<std::size_t>(theta_count()) * psi_count());
  for (int ti = 0; ti < theta_count(); ++ti) {
    for (int pi = 0; pi < psi_count(); ++pi) {
      Measure mu =
          make_measure(process_.theta_grid[ti], mechanism_.psi_grid[pi]);
      mu.theta_index = ti;
      mu.psi_index = pi;
      check_probability(mu);
      measures_.push_back(std::move(mu));
    }
  }
}

void JointModel::validate_kernels_on(const PathSpace& full) const {
  const int tau = process_.grid.horizon;
  const int nx = process_.states.product_size();
  const unsigned nr = 1u << mechanism_.r_dim;

  // Per-step rows must be sub-unit-normalized probabilities.
  std::set<std::vector<int>> x_hists;
  for (const auto& p : full.paths())
    for (int t = 0; t < tau; ++t)
      x_hists.insert(std::vector<int>(p.x.begin(), p.x.begin() + t));
  for (const auto& theta : process_.theta_grid) {
    for (const auto& hist : x_hists) {
      CompensatedSum row;
      bool any_pos = false;
      for (int x = 0; x < nx; ++x) {
        const double q = process_.kernel(theta, static_cast<int>(hist.size()) + 1,
                                         hist, x);
        if (q < 0.0) throw std::runtime_error("invalid kernel");
        any_pos = any_pos || q > 0.0;
        row.add(q);
      }
      if (!any_pos || !nearly_equal(row.value(), 1.0, kSumTol))
        throw std::runtime_error("invalid kernel");
    }
  }
  if (process_.absorbing_state) {
    const int a = *process_.absorbing_state;
    for (const auto& theta : process_.theta_grid) {
      for (const auto& hist : x_hists) {
        if (hist.empty() || hist.back() != a) continue;
        const double q =
            process_.kernel(theta, static_cast<int>(hist.size()) + 1, hist, a);
        if (!nearly_equal(q, 1.0, kSumTol))
          throw std::runtime_error("absorbing state not absorbing");
      }
    }
  }

  for (const auto& psi : mechanism_.psi_grid) {
    for (const auto& p : full.paths()) {
      for (int t = 1; t <= tau; ++t) {
        std::span<const unsigned> r_hist(p.r.data(), t - 1);
        CompensatedSum row;
        bool any_pos = false;
        for (unsigned r = 0; r < nr; ++r) {
          const double q = mechanism_.kernel(psi, t, p.x, r_hist, r);
          if (q < 0.0) throw std::runtime_error("invalid kernel");
          any_pos = any_pos || q > 0.0;
          row.add(q);
        }
        if (!any_pos || !nearly_equal(row.value(), 1.0, kSumTol))
          throw std::runtime_error("invalid kernel");
      }
    }
  }
}

const Measure& JointModel::measure(ParamPair params) const {
  if (params.theta < 0 || params.theta >= theta_count() || params.psi < 0 ||
      params.psi >= psi_count())
    throw std::invalid_argument("parameter pair outside the grids");
  return measures_[static_cast<std::size_t>(params.theta) * psi_count() +
                   params.psi];
}

double JointModel::process_path_prob(const ParamVec& theta,
                                     std::span<const int> x) const {
  double w = 1.0;
  for (std::size_t t = 0; t < x.size(); ++t)
    w *= process_.kernel(theta, static_cast<int>(t) + 1, x.subspan(0, t), x[t]);
  return w;
}

double JointModel::mechanism_cond_prob(const ParamVec& psi,
                                       std::span<const int> x,
                                       std::span<const unsigned> r) const {
  double w = 1.0;
  for (std::size_t t = 0; t < r.size(); ++t)
    w *= mechanism_.kernel(psi, static_cast<int>(t) + 1, x, r.subspan(0, t),
                           r[t]);
  return w;
}

Measure JointModel::make_measure(const ParamVec& theta,
                                 const ParamVec& psi) const {
  Measure mu;
  mu.space = space_.get();
  mu.p.resize(space_->size());
  for (std::size_t i = 0; i < space_->size(); ++i) {
    const Path& p = space_->path(i);
    mu.p[i] = process_path_prob(theta, p.x) * mechanism_cond_prob(psi, p.x, p.r);
  }
  return mu;
}

Observation JointModel::observation_of(std::uint32_t path_index) const {
  return observation_of(space_->path(path_index));
}

Observation JointModel::observation_of(const Path& p) const {
  Observation obs;
  obs.r = p.r;
  const int d = process_.states.dim();
  obs.x_obs.resize(p.x.size());
  for (std::size_t t = 0; t < p.x.size(); ++t) {
    obs.x_obs[t].assign(d, kMaskSentinel);
    const unsigned vis = visible_components(p.r[t], d, mechanism_.r_dim);
    for (int h = 0; h < d; ++h)
      if ((vis >> h) & 1u)
        obs.x_obs[t][h] = process_.states.component_of(p.x[t], h);
  }
  return obs;
}

Partition observed_partition(const JointModel& model) {
  const auto& states = model.process().states;
  const int r_dim = model.mechanism().r_dim;
  return generate_partition(
      model.space(),
      [&states, r_dim](const Path& p) {
        return observation_key(states, r_dim, p);
      },
      "O");
}

Partition observed_partition_upto(const JointModel& model, int t) {
  if (t < 0 || t > model.process().grid.horizon)
    throw std::invalid_argument("time outside grid");
  const auto& states = model.process().states;
  const int r_dim = model.mechanism().r_dim;
  return generate_partition(
      model.space(),
      [&states, r_dim, t](const Path& p) {
        Path trunc;
        trunc.x.assign(p.x.begin(), p.x.begin() + t);
        trunc.r.assign(p.r.begin(), p.r.begin() + t);
        return observation_key(states, r_dim, trunc);
      },
      "O_" + std::to_string(t));
}

Partition fixed_r_partition(const JointModel& model,
                            std::span<const unsigned> r) {
  if (static_cast<int>(r.size()) != model.process().grid.horizon)
    throw std::invalid_argument("r-path length mismatch");
  const auto& states = model.process().states;
  const int d = states.dim();
  const int r_dim = model.mechanism().r_dim;
  std::vector<unsigned> rv(r.begin(), r.end());
  return generate_partition(
      model.space(),
      [&states, d, r_dim, rv](const Path& p) {
        std::vector<int> key;
        for (std::size_t t = 0; t < p.x.size(); ++t) {
          const unsigned vis = visible_components(rv[t], d, r_dim);
          for (int h = 0; h < d; ++h)
            if ((vis >> h) & 1u) key.push_back(states.component_of(p.x[t], h));
        }
        return key;
      },
      "X^r");
}

Partition sigma_x(const JointModel& model) {
  return sigma_x_upto(model, model.process().grid.horizon);
}

Partition sigma_x_upto(const JointModel& model, int t) {
  if (t < 0 || t > model.process().grid.horizon)
    throw std::invalid_argument("time outside grid");
  return generate_partition(
      model.space(),
      [t](const Path& p) {
        return std::vector<int>(p.x.begin(), p.x.begin() + t);
      },
      "X_" + std::to_string(t));
}

Partition sigma_r(const JointModel& model) {
  return sigma_r_upto(model, model.process().grid.horizon);
}

Partition sigma_r_upto(const JointModel& model, int t) {
  if (t < 0 || t > model.process().grid.horizon)
    throw std::invalid_argument("time outside grid");
  return generate_partition(
      model.space(),
      [t](const Path& p) {
        std::vector<int> key;
        for (int s = 0; s < t; ++s) key.push_back(static_cast<int>(p.r[s]));
        return key;
      },
      "R_" + std::to_string(t));
}

std::vector<std::uint32_t> event_r_equals(const JointModel& model,
                                          std::span<const unsigned> r) {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < model.space().size(); ++i) {
    const Path& p = model.space().path(i);
    if (std::equal(p.r.begin(), p.r.end(), r.begin(), r.end()))
      out.push_back(static_cast<std::uint32_t>(i));
  }
  return out;
}

std::vector<std::vector<unsigned>> support_r_paths(const JointModel& model) {
  std::set<std::vector<unsigned>> seen;
  for (const auto& p : model.space().paths()) seen.insert(p.r);
  return {seen.begin(), seen.end()};
}

VerticalCoarsener identity_coarsener(const StateSpace& states) {
  VerticalCoarsener v;
  v.label = "identity";
  for (const auto& a : states.components) {
    std::vector<int> m(a.size());
    for (int s = 0; s < a.size(); ++s) m[s] = s;
    v.maps.push_back(std::move(m));
  }
  return v;
}

Partition apply_vertical(const JointModel& model, const VerticalCoarsener& v) {
  const auto& states = model.process().states;
  if (static_cast<int>(v.maps.size()) != states.dim())
    throw std::invalid_argument("coarsener dimension mismatch");
  const int d = states.dim();
  const int r_dim = model.mechanism().r_dim;
  return generate_partition(
      model.space(),
      [&states, &v, d, r_dim](const Path& p) {
        std::vector<int> key;
        for (std::size_t t = 0; t < p.x.size(); ++t) {
          key.push_back(static_cast<int>(p.r[t]));
          const unsigned vis = visible_components(p.r[t], d, r_dim);
          for (int h = 0; h < d; ++h)
            key.push_back((vis >> h) & 1u
                              ? v.maps[h][states.component_of(p.x[t], h)]
                              : kMaskSentinel);
        }
        return key;
      },
      "O'(" + v.label + ")");
}

JointModel enforce_absorbing_convention(const JointModel& model,
                                        std::size_t path_cap) {
  if (!model.process().absorbing_state)
    throw std::invalid_argument("no absorbing state");
  const int a = *model.process().absorbing_state;
  const int d = model.process().states.dim();
  const int r_dim = model.mechanism().r_dim;
  const unsigned full_mask = (1u << r_dim) - 1u;

  MechanismKernel wrapped = model.mechanism();
  MechanismKernelFn inner = model.mechanism().kernel;
  wrapped.kernel = [inner, a, d, r_dim, full_mask](
                       const ParamVec& psi, int t, std::span<const int> x_full,
                       std::span<const unsigned> r_hist, unsigned r_t) {
    // Absorbing state counted as observed once seen under a full r-mask.
    bool seen = false;
    for (int s = 0; s < t - 1; ++s) {
      if (x_full[s] == a &&
          visible_components(r_hist[s], d, r_dim) == ((1u << d) - 1u)) {
        seen = true;
        break;
      }
    }
    if (seen) return r_t == full_mask ? 1.0 : 0.0;
    return inner(psi, t, x_full, r_hist, r_t);
  };
  return JointModel(model.process(), std::move(wrapped), model.reference(),
                    path_cap);
}

JointModel build_joint(ProcessModel process, MechanismKernel mechanism,
                       ParamPair reference, std::size_t path_cap) {
  return JointModel(std::move(process), std::move(mechanism), reference,
                    path_cap);
}

std::optional<std::uint32_t> any_path_of_observation(const JointModel& model,
                                                     const Observation& obs) {
  for (std::size_t i = 0; i < model.space().size(); ++i)
    if (model.observation_of(static_cast<std::uint32_t>(i)) == obs)
      return static_cast<std::uint32_t>(i);
  return std::nullopt;
}

}  // namespace gcmp
