#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "gcmp/model.hpp"
#include "gcmp/scenarios.hpp"

using namespace gcmp;

namespace {

// Set of path index sets, for comparing partition traces on an event.
std::set<std::vector<std::uint32_t>> trace_on(
    const Partition& part, const std::vector<std::uint32_t>& event) {
  std::set<std::uint32_t> ev(event.begin(), event.end());
  std::set<std::vector<std::uint32_t>> out;
  for (const auto& atom : part.atoms) {
    std::vector<std::uint32_t> cut;
    for (auto i : atom)
      if (ev.count(i)) cut.push_back(i);
    if (!cut.empty()) out.insert(cut);
  }
  return out;
}

}  // namespace

TEST_CASE("M1 support drops the never-observed first visit") {
  const JointModel m = make_m1_ignorable();
  CHECK(m.space().size() == 8);  // 16 full paths, r_1 = 0 half removed
  for (const auto& p : m.space().paths()) CHECK(p.r[0] == 1u);
  CHECK(m.theta_count() == 2);
  CHECK(m.psi_count() == 2);
  for (int ti = 0; ti < 2; ++ti)
    for (int pi = 0; pi < 2; ++pi) CHECK_NOTHROW(check_probability(m.measure({ti, pi})));
}

TEST_CASE("observed atom of a half-masked observation") {
  const JointModel m = make_m1_ignorable();
  const Partition o = observed_partition(m);
  Observation obs;
  obs.r = {1, 0};
  obs.x_obs = {{1}, {kMaskSentinel}};
  const auto idx = any_path_of_observation(m, obs);
  REQUIRE(idx.has_value());
  const auto& atom = o.atoms[o.atom_of[*idx]];
  REQUIRE(atom.size() == 2);
  std::set<std::vector<int>> xs;
  for (auto i : atom) {
    CHECK(m.space().path(i).r == std::vector<unsigned>{1, 0});
    xs.insert(m.space().path(i).x);
  }
  CHECK(xs == std::set<std::vector<int>>{{1, 0}, {1, 1}});
}

TEST_CASE("MASK sentinel keeps atoms apart that r*x masking merges") {
  const JointModel m = make_m1_ignorable();
  // Observation coded as the products r_t * x_t only (no indicator kept):
  // a hidden value and an observed 0 both read as 0.
  const Partition by_product = generate_partition(
      m.space(),
      [](const Path& p) {
        std::vector<int> key;
        for (std::size_t t = 0; t < p.x.size(); ++t)
          key.push_back(static_cast<int>(p.r[t]) * p.x[t]);
        return key;
      },
      "r*x");
  const Partition o = observed_partition(m);
  CHECK(refines(o, by_product));
  CHECK(!refines(by_product, o));

  // Witness pair: x=(1,0) observed both times vs x=(1,0) with the second
  // hidden. Products agree (1,0) but the observations differ.
  Path seen{{1, 0}, {1, 1}};
  Path hidden{{1, 0}, {1, 0}};
  const auto a = m.space().index_of(seen);
  const auto b = m.space().index_of(hidden);
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK(by_product.atom_of[*a] == by_product.atom_of[*b]);
  CHECK(o.atom_of[*a] != o.atom_of[*b]);
}

TEST_CASE("observed field sits between sigma(R) and sigma(X) v sigma(R)") {
  for (auto* build : {&make_m1_ignorable, &make_m1_anticipating}) {
    const JointModel m = (*build)();
    const Partition o = observed_partition(m);
    CHECK(refines(o, sigma_r(m)));
    CHECK(refines(join(sigma_x(m), sigma_r(m)), o));
  }
}

TEST_CASE("trace of O on {R=r} equals trace of X^r v sigma(R)") {
  const JointModel m = make_m1_ignorable();
  const Partition o = observed_partition(m);
  for (const auto& r : support_r_paths(m)) {
    const auto event = event_r_equals(m, r);
    const Partition mix = join(fixed_r_partition(m, r), sigma_r(m));
    CHECK(trace_on(o, event) == trace_on(mix, event));
  }
}

TEST_CASE("fixed_r_partition extremes") {
  const JointModel m = make_m1_ignorable();
  std::vector<unsigned> ones{1, 1}, zeros{0, 0}, first{1, 0};
  CHECK(same_partition(fixed_r_partition(m, ones), sigma_x(m)));
  CHECK(fixed_r_partition(m, zeros).atom_count() == 1);
  CHECK(fixed_r_partition(m, first).atom_count() == 2);  // by X_1 only
}

TEST_CASE("mechanism takes no theta: sigma(R)-conditional law invariant") {
  // P_{(theta, psi)}(A | sigma(X)-atom) must not move with theta, for every
  // A generated by R.
  for (auto* build : {&make_m1_ignorable, &make_m1_anticipating}) {
    const JointModel m = (*build)();
    const Partition x = sigma_x(m);
    for (int pi = 0; pi < m.psi_count(); ++pi) {
      for (const auto& r : support_r_paths(m)) {
        const auto event = event_r_equals(m, r);
        std::vector<double> cond_by_theta;
        for (int ti = 0; ti < m.theta_count(); ++ti) {
          const Measure& mu = m.measure({ti, pi});
          for (const auto& atom : x.atoms) {
            double pa = 0.0, pax = 0.0;
            for (auto i : atom) {
              pax += mu.p[i];
              if (std::find(event.begin(), event.end(), i) != event.end())
                pa += mu.p[i];
            }
            cond_by_theta.push_back(pa / pax);
          }
        }
        const std::size_t k = cond_by_theta.size() / m.theta_count();
        for (std::size_t j = 0; j < k; ++j)
          CHECK(cond_by_theta[j] ==
                doctest::Approx(cond_by_theta[k + j]).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("joint mass factorizes exactly into process times mechanism") {
  const JointModel m = make_m1_anticipating();
  for (int ti = 0; ti < 2; ++ti) {
    for (int pi = 0; pi < 2; ++pi) {
      const Measure& mu = m.measure({ti, pi});
      for (std::uint32_t i = 0; i < m.space().size(); ++i) {
        const Path& p = m.space().path(i);
        const double expect =
            m.process_path_prob(m.process().theta_grid[ti], p.x) *
            m.mechanism_cond_prob(m.mechanism().psi_grid[pi], p.x, p.r);
        CHECK(mu.p[i] == doctest::Approx(expect).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("visible_components for shared and per-component masks") {
  CHECK(visible_components(1u, 3, 1) == 0b111u);
  CHECK(visible_components(0u, 3, 1) == 0u);
  CHECK(visible_components(0b101u, 3, 3) == 0b101u);
}

TEST_CASE("kernel validation") {
  ProcessModel proc;
  proc.states = StateSpace{{Alphabet{{"0", "1"}}}};
  proc.grid = {2, "bad"};
  proc.theta_grid = {{0.3}};
  MechanismKernel mech;
  mech.r_dim = 1;
  mech.psi_grid = {{}};
  mech.kernel = [](const ParamVec&, int, std::span<const int>,
                   std::span<const unsigned>, unsigned r) {
    return r == 1u ? 1.0 : 0.0;
  };

  SUBCASE("rows must normalize") {
    proc.kernel = [](const ParamVec&, int, std::span<const int>, int) {
      return 0.6;
    };
    CHECK_THROWS_WITH(build_joint(proc, mech, {0, 0}), "invalid kernel");
  }
  SUBCASE("negative mass refused") {
    proc.kernel = [](const ParamVec&, int, std::span<const int>, int x) {
      return x == 1 ? 1.4 : -0.4;
    };
    CHECK_THROWS_WITH(build_joint(proc, mech, {0, 0}), "invalid kernel");
  }
  SUBCASE("support must match across the grid") {
    proc.theta_grid = {{0.3}, {1.0}};  // second point kills x=0 paths
    proc.kernel = [](const ParamVec& theta, int, std::span<const int>, int x) {
      return x == 1 ? theta[0] : 1.0 - theta[0];
    };
    CHECK_THROWS_WITH(build_joint(proc, mech, {0, 0}),
                      "non-equivalent family");
  }
  SUBCASE("path cap") {
    proc.kernel = [](const ParamVec& theta, int, std::span<const int>, int x) {
      return x == 1 ? theta[0] : 1.0 - theta[0];
    };
    CHECK_THROWS_WITH(build_joint(proc, mech, {0, 0}, 4),
                      "path cap exceeded");
  }
}

TEST_CASE("absorbing convention forces observation after an observed event") {
  ProcessModel proc;
  proc.states = StateSpace{{Alphabet{{"0", "1"}}}};
  proc.grid = {4, "survival"};
  proc.theta_grid = {{0.3}, {0.5}};
  proc.absorbing_state = 1;
  proc.kernel = [](const ParamVec& theta, int, std::span<const int> hist,
                   int x) {
    const int prev = hist.empty() ? 0 : hist.back();
    if (prev == 1) return x == 1 ? 1.0 : 0.0;
    return x == 1 ? theta[0] : 1.0 - theta[0];
  };
  MechanismKernel mech;
  mech.r_dim = 1;
  mech.psi_grid = {{0.3}};
  mech.kernel = [](const ParamVec& psi, int, std::span<const int>,
                   std::span<const unsigned>, unsigned r) {
    return r == 1u ? 1.0 - psi[0] : psi[0];
  };
  const JointModel base = build_joint(proc, mech, {1, 0});
  const JointModel conv = enforce_absorbing_convention(base);
  for (const auto& p : conv.space().paths()) {
    // Once the event is observed, every later slot is observed.
    bool seen = false;
    for (std::size_t t = 0; t < p.x.size(); ++t) {
      if (seen) CHECK(p.r[t] == 1u);
      if (p.x[t] == 1 && p.r[t] == 1u) seen = true;
    }
  }
  // Jump observed at t=2 implies r_3 = r_4 = 1 on every support path.
  for (const auto& p : conv.space().paths())
    if (p.x[0] == 0 && p.x[1] == 1 && p.r[1] == 1u)
      CHECK((p.r[2] == 1u && p.r[3] == 1u));

  SUBCASE("idempotent") {
    const JointModel twice = enforce_absorbing_convention(conv);
    REQUIRE(twice.space().size() == conv.space().size());
    for (std::uint32_t i = 0; i < conv.space().size(); ++i) {
      CHECK(twice.space().path(i) == conv.space().path(i));
      CHECK(twice.measure({0, 0}).p[i] ==
            doctest::Approx(conv.measure({0, 0}).p[i]).epsilon(1e-14));
    }
  }
  SUBCASE("requires an absorbing state") {
    ProcessModel p2 = proc;
    p2.absorbing_state.reset();
    const JointModel m2 = build_joint(p2, mech, {1, 0});
    CHECK_THROWS_WITH(enforce_absorbing_convention(m2), "no absorbing state");
  }
}

TEST_CASE("observation round trip") {
  const JointModel m = make_m1_anticipating();
  for (std::uint32_t i = 0; i < m.space().size(); ++i) {
    const Observation obs = m.observation_of(i);
    const auto back = any_path_of_observation(m, obs);
    REQUIRE(back.has_value());
    CHECK(m.observation_of(*back) == obs);
  }
  Observation off;
  off.r = {0, 1};
  off.x_obs = {{kMaskSentinel}, {0}};
  CHECK(!any_path_of_observation(m, off).has_value());
}

TEST_CASE("vertical coarsening partitions") {
  const JointModel m = make_m1_ignorable();
  const Partition o = observed_partition(m);
  CHECK(same_partition(apply_vertical(m, identity_coarsener(m.process().states)), o));
  VerticalCoarsener constant;
  constant.maps = {{0, 0}};
  constant.label = "constant";
  CHECK(same_partition(apply_vertical(m, constant), sigma_r(m)));
  const Partition coarse = apply_vertical(m, constant);
  CHECK(refines(o, coarse));
}

TEST_CASE("multivariate r: per-component masks show the right coordinates") {
  const JointModel m = find_scenario("adaptive_stopping_threshold").build();
  CHECK(m.mechanism().r_dim == 2);
  for (std::uint32_t i = 0; i < m.space().size(); ++i) {
    const Path& p = m.space().path(i);
    const Observation obs = m.observation_of(i);
    for (std::size_t t = 0; t < p.x.size(); ++t) {
      for (int h = 0; h < 2; ++h) {
        const int val = m.process().states.component_of(p.x[t], h);
        if ((p.r[t] >> h) & 1u)
          CHECK(obs.x_obs[t][h] == val);
        else
          CHECK(obs.x_obs[t][h] == kMaskSentinel);
      }
    }
  }
}
