#include "gcmp/pathspace.hpp"

#include <map>
#include <stdexcept>

namespace gcmp {

int StateSpace::encode(std::span<const int> comps) const {
  if (static_cast<int>(comps.size()) != dim())
    throw std::invalid_argument("state component count mismatch");
  int code = 0;
  int radix = 1;
  for (int h = 0; h < dim(); ++h) {
    if (comps[h] < 0 || comps[h] >= components[h].size())
      throw std::invalid_argument("state symbol out of range");
    code += comps[h] * radix;
    radix *= components[h].size();
  }
  return code;
}

std::vector<int> StateSpace::decode(int code) const {
  std::vector<int> comps(dim());
  for (int h = 0; h < dim(); ++h) {
    comps[h] = code % components[h].size();
    code /= components[h].size();
  }
  return comps;
}

int StateSpace::component_of(int code, int comp) const {
  for (int h = 0; h < comp; ++h) code /= components[h].size();
  return code % components[comp].size();
}

std::string StateSpace::describe(int code) const {
  std::string out;
  auto comps = decode(code);
  for (int h = 0; h < dim(); ++h) {
    if (h) out += ",";
    out += components[h].symbols[comps[h]];
  }
  return out;
}

PathSpace PathSpace::enumerate(TimeGrid grid, StateSpace states, int r_dim,
                               int max_horizon) {
  if (grid.horizon < 1 || grid.horizon > max_horizon)
    throw std::invalid_argument("horizon out of range");
  if (r_dim < 1 || r_dim > 8) throw std::invalid_argument("bad r_dim");
  for (const auto& a : states.components)
    if (a.size() < 1) throw std::invalid_argument("empty alphabet");

  PathSpace ps;
  ps.grid_ = std::move(grid);
  ps.states_ = std::move(states);
  ps.r_dim_ = r_dim;

  const int tau = ps.grid_.horizon;
  const int nx = ps.states_.product_size();
  const unsigned nr = 1u << r_dim;

  std::size_t total = 1;
  for (int t = 0; t < tau; ++t) total *= static_cast<std::size_t>(nx) * nr;
  ps.paths_.reserve(total);

  Path p;
  p.x.assign(tau, 0);
  p.r.assign(tau, 0);
  // Odometer over (x_t, r_t) slots, r of the last time varying fastest.
  std::function<void(int)> rec = [&](int t) {
    if (t == tau) {
      ps.paths_.push_back(p);
      return;
    }
    for (int x = 0; x < nx; ++x) {
      for (unsigned r = 0; r < nr; ++r) {
        p.x[t] = x;
        p.r[t] = r;
        rec(t + 1);
      }
    }
  };
  rec(0);
  ps.rebuild_index();
  return ps;
}

PathSpace PathSpace::restrict(const std::vector<char>& keep) const {
  if (keep.size() != paths_.size())
    throw std::invalid_argument("keep mask size mismatch");
  PathSpace ps;
  ps.grid_ = grid_;
  ps.states_ = states_;
  ps.r_dim_ = r_dim_;
  for (std::size_t i = 0; i < paths_.size(); ++i)
    if (keep[i]) ps.paths_.push_back(paths_[i]);
  if (ps.paths_.empty()) throw std::invalid_argument("empty support");
  ps.rebuild_index();
  return ps;
}

std::uint64_t PathSpace::key_of(const Path& p) const {
  const std::uint64_t radix =
      static_cast<std::uint64_t>(states_.product_size()) * r_mask_count();
  std::uint64_t key = 0;
  for (int t = 0; t < grid_.horizon; ++t) {
    key = key * radix +
          static_cast<std::uint64_t>(p.x[t]) * r_mask_count() + p.r[t];
  }
  return key;
}

void PathSpace::rebuild_index() {
  // Guard against u64 key overflow: radix^horizon must fit.
  long double span = 1.0L;
  for (int t = 0; t < grid_.horizon; ++t)
    span *= static_cast<long double>(states_.product_size()) * r_mask_count();
  if (span > 1.8e18L) throw std::invalid_argument("path space too large");
  index_.clear();
  index_.reserve(paths_.size());
  for (std::size_t i = 0; i < paths_.size(); ++i)
    index_[key_of(paths_[i])] = static_cast<std::uint32_t>(i);
}

std::optional<std::uint32_t> PathSpace::index_of(const Path& p) const {
  if (static_cast<int>(p.x.size()) != grid_.horizon ||
      static_cast<int>(p.r.size()) != grid_.horizon)
    return std::nullopt;
  auto it = index_.find(key_of(p));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double Measure::mass(std::span<const std::uint32_t> atom) const {
  CompensatedSum s;
  for (auto i : atom) s.add(p[i]);
  return s.value();
}

void check_probability(const Measure& mu) {
  if (!mu.space || mu.p.size() != mu.space->size())
    throw std::invalid_argument("measure/space mismatch");
  CompensatedSum s;
  for (double x : mu.p) {
    if (!(x > 0.0)) throw std::invalid_argument("measure not strictly positive");
    s.add(x);
  }
  if (!nearly_equal(s.value(), 1.0, kSumTol))
    throw std::invalid_argument("measure does not sum to 1");
}

Partition generate_partition(const PathSpace& space, const ClassifyFn& classify,
                             std::string label) {
  Partition part;
  part.space = &space;
  part.generator_label = std::move(label);
  part.atom_of.resize(space.size());
  std::map<std::vector<int>, std::uint32_t> seen;
  for (std::size_t i = 0; i < space.size(); ++i) {
    auto key = classify(space.path(i));
    auto [it, fresh] =
        seen.emplace(std::move(key), static_cast<std::uint32_t>(part.atoms.size()));
    if (fresh) part.atoms.emplace_back();
    part.atoms[it->second].push_back(static_cast<std::uint32_t>(i));
    part.atom_of[i] = it->second;
  }
  return part;
}

Partition trivial_partition(const PathSpace& space) {
  return generate_partition(
      space, [](const Path&) { return std::vector<int>{0}; }, "trivial");
}

Partition discrete_partition(const PathSpace& space) {
  std::uint32_t i = 0;
  return generate_partition(
      space,
      [&i](const Path&) mutable {
        return std::vector<int>{static_cast<int>(i++)};
      },
      "discrete");
}

Partition join(const Partition& a, const Partition& b) {
  if (a.space != b.space) throw std::invalid_argument("incompatible spaces");
  const Partition* pa = &a;
  const Partition* pb = &b;
  return generate_partition(
      *a.space,
      [pa, pb, i = std::uint32_t{0}](const Path&) mutable {
        std::vector<int> key{static_cast<int>(pa->atom_of[i]),
                             static_cast<int>(pb->atom_of[i])};
        ++i;
        return key;
      },
      a.generator_label + "|" + b.generator_label);
}

bool refines(const Partition& fine, const Partition& coarse) {
  if (fine.space != coarse.space) throw std::invalid_argument("incompatible spaces");
  for (const auto& atom : fine.atoms) {
    const std::uint32_t c = coarse.atom_of[atom.front()];
    for (auto i : atom)
      if (coarse.atom_of[i] != c) return false;
  }
  return true;
}

bool same_partition(const Partition& a, const Partition& b) {
  return refines(a, b) && refines(b, a);
}

PathFunction cond_expect(const PathFunction& f, const Partition& g,
                         const Measure& mu) {
  if (f.space != g.space || f.space != mu.space)
    throw std::invalid_argument("incompatible spaces");
  PathFunction out;
  out.space = f.space;
  out.v.resize(f.space->size());
  for (const auto& atom : g.atoms) {
    CompensatedSum num, den;
    for (auto i : atom) {
      num.add(f.v[i] * mu.p[i]);
      den.add(mu.p[i]);
    }
    if (den.value() <= 0.0) throw std::runtime_error("null atom");
    const double val = num.value() / den.value();
    for (auto i : atom) out.v[i] = val;
  }
  return out;
}

PathFunction rn_derivative(const Measure& num, const Measure& den,
                           const Partition& g) {
  if (num.space != den.space || num.space != g.space)
    throw std::invalid_argument("incompatible spaces");
  PathFunction out;
  out.space = g.space;
  out.v.resize(g.space->size());
  for (const auto& atom : g.atoms) {
    CompensatedSum top, bot;
    for (auto i : atom) {
      top.add(num.p[i]);
      bot.add(den.p[i]);
    }
    if (bot.value() <= 0.0) throw std::runtime_error("dominance violated");
    const double val = top.value() / bot.value();
    for (auto i : atom) out.v[i] = val;
  }
  return out;
}

bool is_measurable(const PathFunction& f, const Partition& g, double tol) {
  if (f.space != g.space) throw std::invalid_argument("incompatible spaces");
  for (const auto& atom : g.atoms) {
    const double v0 = f.v[atom.front()];
    for (auto i : atom)
      if (!nearly_equal(f.v[i], v0, tol)) return false;
  }
  return true;
}

}  // namespace gcmp
