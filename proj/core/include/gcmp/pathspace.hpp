#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gcmp/numeric.hpp"

namespace gcmp {

// Largest horizon the exhaustive engine accepts by default.
inline constexpr int kDefaultMaxHorizon = 8;

struct TimeGrid {
  int horizon = 1;  // time indices run 1..horizon
  std::string label;
};

// Finite alphabet of one state component.
struct Alphabet {
  std::vector<std::string> symbols;
  int size() const { return static_cast<int>(symbols.size()); }
};

// State of the X process at one time point: a tuple of component symbols,
// stored product-coded (mixed radix, component 0 least significant).
struct StateSpace {
  std::vector<Alphabet> components;

  int dim() const { return static_cast<int>(components.size()); }
  int product_size() const {
    int n = 1;
    for (const auto& a : components) n *= a.size();
    return n;
  }
  int encode(std::span<const int> comps) const;
  std::vector<int> decode(int code) const;
  int component_of(int code, int comp) const;
  std::string describe(int code) const;
};

// One joint trajectory: x[t] is the product-coded X state at time t+1,
// r[t] is the response-indicator bitmask (bit h = component h of R).
struct Path {
  std::vector<int> x;
  std::vector<unsigned> r;

  bool operator==(const Path&) const = default;
};

// Exhaustive, deterministically ordered list of joint (X,R) trajectories.
// Enumeration order is lexicographic in (x_1, r_1, x_2, r_2, ...), i.e. the
// path index read as a mixed-radix number with time 1 most significant and
// the r-mask varying fastest within each time slot.
class PathSpace {
 public:
  static PathSpace enumerate(TimeGrid grid, StateSpace states, int r_dim,
                             int max_horizon = kDefaultMaxHorizon);

  // New space containing only the paths with keep[i] != 0, in the same order.
  PathSpace restrict(const std::vector<char>& keep) const;

  const TimeGrid& grid() const { return grid_; }
  const StateSpace& states() const { return states_; }
  int r_dim() const { return r_dim_; }
  unsigned r_mask_count() const { return 1u << r_dim_; }
  std::size_t size() const { return paths_.size(); }
  const Path& path(std::size_t i) const { return paths_[i]; }
  const std::vector<Path>& paths() const { return paths_; }
  std::optional<std::uint32_t> index_of(const Path& p) const;

  bool same_space(const PathSpace& other) const { return this == &other; }

 private:
  TimeGrid grid_;
  StateSpace states_;
  int r_dim_ = 1;
  std::vector<Path> paths_;
  std::unordered_map<std::uint64_t, std::uint32_t> index_;

  std::uint64_t key_of(const Path& p) const;
  void rebuild_index();
};

// Strictly positive probability vector over the paths of one space.
struct Measure {
  const PathSpace* space = nullptr;
  std::vector<double> p;
  int theta_index = -1;
  int psi_index = -1;

  double mass(std::span<const std::uint32_t> atom) const;
};

// A sigma-field on a finite space, represented as a partition into atoms.
struct Partition {
  const PathSpace* space = nullptr;
  std::vector<std::vector<std::uint32_t>> atoms;
  std::vector<std::uint32_t> atom_of;  // path index -> atom index
  std::string generator_label;

  std::size_t atom_count() const { return atoms.size(); }
};

// A real-valued function on the path space.
struct PathFunction {
  const PathSpace* space = nullptr;
  std::vector<double> v;
};

using ClassifyFn = std::function<std::vector<int>(const Path&)>;

Partition generate_partition(const PathSpace& space, const ClassifyFn& classify,
                             std::string label = {});
Partition trivial_partition(const PathSpace& space);
Partition discrete_partition(const PathSpace& space);

// Common refinement a ∨ b.
Partition join(const Partition& a, const Partition& b);

// True iff every atom of fine lies inside an atom of coarse.
bool refines(const Partition& fine, const Partition& coarse);

bool same_partition(const Partition& a, const Partition& b);

// E_mu[f | g]: constant on each atom, value = atom-average of f under mu.
PathFunction cond_expect(const PathFunction& f, const Partition& g,
                         const Measure& mu);

// Radon-Nikodym derivative of num against den restricted to g:
// value on atom A is num(A)/den(A).
PathFunction rn_derivative(const Measure& num, const Measure& den,
                           const Partition& g);

bool is_measurable(const PathFunction& f, const Partition& g,
                   double tol = kSumTol);

void check_probability(const Measure& mu);

}  // namespace gcmp
