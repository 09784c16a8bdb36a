#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gcmp/pathspace.hpp"

using namespace gcmp;

namespace {

PathSpace binary_space(int horizon) {
  return PathSpace::enumerate({horizon, "test"},
                              StateSpace{{Alphabet{{"0", "1"}}}}, 1);
}

Measure uniform_measure(const PathSpace& s) {
  Measure mu;
  mu.space = &s;
  mu.p.assign(s.size(), 1.0 / static_cast<double>(s.size()));
  return mu;
}

}  // namespace

TEST_CASE("state space mixed-radix coding round-trips") {
  StateSpace s{{Alphabet{{"a", "b"}}, Alphabet{{"x", "y", "z"}}}};
  CHECK(s.dim() == 2);
  CHECK(s.product_size() == 6);
  for (int code = 0; code < 6; ++code) {
    const auto comps = s.decode(code);
    CHECK(s.encode(comps) == code);
    CHECK(s.component_of(code, 0) == comps[0]);
    CHECK(s.component_of(code, 1) == comps[1]);
  }
  CHECK(s.describe(0) == "a,x");
}

TEST_CASE("enumeration is exhaustive and lexicographic") {
  const PathSpace s = binary_space(2);
  REQUIRE(s.size() == 16);
  // Index read as mixed radix over (x1, r1, x2, r2), r fastest.
  for (std::uint32_t i = 0; i < 16; ++i) {
    const Path& p = s.path(i);
    const std::uint32_t key =
        (((static_cast<std::uint32_t>(p.x[0]) * 2 + p.r[0]) * 2 +
          static_cast<std::uint32_t>(p.x[1])) *
             2 +
         p.r[1]);
    CHECK(key == i);
    CHECK(s.index_of(p) == i);
  }
}

TEST_CASE("enumeration respects the horizon cap") {
  CHECK_THROWS_WITH(
      PathSpace::enumerate({9, "big"}, StateSpace{{Alphabet{{"0", "1"}}}}, 1),
      "horizon out of range");
  CHECK_NOTHROW(
      PathSpace::enumerate({9, "big"}, StateSpace{{Alphabet{{"0", "1"}}}}, 1,
                           12));
}

TEST_CASE("restrict keeps order and rebuilds the index") {
  const PathSpace s = binary_space(2);
  std::vector<char> keep(s.size(), 0);
  keep[3] = keep[7] = keep[12] = 1;
  const PathSpace sub = s.restrict(keep);
  REQUIRE(sub.size() == 3);
  CHECK(sub.path(0) == s.path(3));
  CHECK(sub.path(1) == s.path(7));
  CHECK(sub.path(2) == s.path(12));
  CHECK(sub.index_of(s.path(7)) == 1);
  CHECK(!sub.index_of(s.path(0)).has_value());
  CHECK_THROWS_WITH(s.restrict(std::vector<char>(s.size(), 0)),
                    "empty support");
}

TEST_CASE("partitions: trivial, discrete, generated") {
  const PathSpace s = binary_space(2);
  CHECK(trivial_partition(s).atom_count() == 1);
  CHECK(discrete_partition(s).atom_count() == s.size());
  const Partition by_x1 = generate_partition(
      s, [](const Path& p) { return std::vector<int>{p.x[0]}; }, "x1");
  CHECK(by_x1.atom_count() == 2);
  for (std::uint32_t i = 0; i < s.size(); ++i)
    CHECK(by_x1.atom_of[i] == by_x1.atom_of[s.path(i).x[0] == 0 ? 0 : 8]);
}

TEST_CASE("join, refines, same_partition") {
  const PathSpace s = binary_space(2);
  const Partition by_x1 = generate_partition(
      s, [](const Path& p) { return std::vector<int>{p.x[0]}; });
  const Partition by_r1 = generate_partition(
      s, [](const Path& p) { return std::vector<int>{(int)p.r[0]}; });
  const Partition j = join(by_x1, by_r1);
  CHECK(j.atom_count() == 4);
  CHECK(refines(j, by_x1));
  CHECK(refines(j, by_r1));
  CHECK(!refines(by_x1, j));
  CHECK(same_partition(j, join(by_r1, by_x1)));
  const Partition by_pair = generate_partition(
      s, [](const Path& p) { return std::vector<int>{p.x[0], (int)p.r[0]}; });
  CHECK(same_partition(j, by_pair));
}

TEST_CASE("conditional expectation against the trivial and fine fields") {
  const PathSpace s = binary_space(2);
  const Measure mu = uniform_measure(s);
  PathFunction f{&s, {}};
  f.v.resize(s.size());
  for (std::uint32_t i = 0; i < s.size(); ++i) f.v[i] = double(i);
  const PathFunction e_triv = cond_expect(f, trivial_partition(s), mu);
  for (double v : e_triv.v) CHECK(v == doctest::Approx(7.5).epsilon(1e-14));
  const PathFunction e_fine = cond_expect(f, discrete_partition(s), mu);
  for (std::uint32_t i = 0; i < s.size(); ++i) CHECK(e_fine.v[i] == f.v[i]);
  CHECK(is_measurable(e_triv, trivial_partition(s)));
}

TEST_CASE("tower property of conditional expectation") {
  const PathSpace s = binary_space(2);
  Measure mu;
  mu.space = &s;
  mu.p.resize(s.size());
  double total = 0.0;
  for (std::uint32_t i = 0; i < s.size(); ++i) total += (mu.p[i] = i + 1.0);
  for (auto& p : mu.p) p /= total;
  PathFunction f{&s, {}};
  f.v.resize(s.size());
  for (std::uint32_t i = 0; i < s.size(); ++i) f.v[i] = (i % 3) - 1.0;
  const Partition fine = generate_partition(
      s, [](const Path& p) { return std::vector<int>{p.x[0], (int)p.r[0]}; });
  const Partition coarse = generate_partition(
      s, [](const Path& p) { return std::vector<int>{p.x[0]}; });
  const PathFunction one_step = cond_expect(f, coarse, mu);
  const PathFunction two_step = cond_expect(cond_expect(f, fine, mu), coarse, mu);
  for (std::uint32_t i = 0; i < s.size(); ++i)
    CHECK(one_step.v[i] == doctest::Approx(two_step.v[i]).epsilon(1e-13));
}

TEST_CASE("radon-nikodym derivative is an atom mass ratio") {
  const PathSpace s = binary_space(2);
  const Measure den = uniform_measure(s);
  Measure num;
  num.space = &s;
  num.p.assign(s.size(), 0.0);
  for (std::uint32_t i = 0; i < s.size(); ++i)
    num.p[i] = (i < 8) ? 0.1 : 0.025;
  const Partition by_x1 = generate_partition(
      s, [](const Path& p) { return std::vector<int>{p.x[0]}; });
  const PathFunction d = rn_derivative(num, den, by_x1);
  // num mass of {x1=0} is 0.8 against 0.5 under den.
  CHECK(d.v[0] == doctest::Approx(1.6).epsilon(1e-14));
  CHECK(d.v[15] == doctest::Approx(0.4).epsilon(1e-14));
  // Expectation of the derivative under den is 1.
  double e = 0.0;
  for (std::uint32_t i = 0; i < s.size(); ++i) e += d.v[i] * den.p[i];
  CHECK(e == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("dominance violations and null atoms are refused") {
  const PathSpace s = binary_space(2);
  Measure num = uniform_measure(s);
  Measure den = uniform_measure(s);
  // All den mass on {x1=1}: the {x1=0} atom has zero den mass.
  for (std::uint32_t i = 0; i < 8; ++i) den.p[i] = 0.0;
  for (std::uint32_t i = 8; i < 16; ++i) den.p[i] = 0.125;
  const Partition by_x1 = generate_partition(
      s, [](const Path& p) { return std::vector<int>{p.x[0]}; });
  CHECK_THROWS_WITH(rn_derivative(num, den, by_x1), "dominance violated");

  PathFunction f{&s, std::vector<double>(s.size(), 1.0)};
  CHECK_THROWS_WITH(cond_expect(f, by_x1, den), "null atom");
}

TEST_CASE("check_probability validates mass") {
  const PathSpace s = binary_space(2);
  Measure mu = uniform_measure(s);
  CHECK_NOTHROW(check_probability(mu));
  mu.p[0] = -mu.p[0];
  CHECK_THROWS(check_probability(mu));
  mu = uniform_measure(s);
  mu.p[0] *= 2.0;
  CHECK_THROWS(check_probability(mu));
}

TEST_CASE("fields from different spaces are rejected") {
  const PathSpace a = binary_space(2);
  const PathSpace b = binary_space(2);
  const Partition pa = trivial_partition(a);
  const Partition pb = trivial_partition(b);
  CHECK_THROWS_WITH(join(pa, pb), "incompatible spaces");
  PathFunction f{&a, std::vector<double>(a.size(), 1.0)};
  CHECK_THROWS_WITH(cond_expect(f, pb, uniform_measure(a)),
                    "incompatible spaces");
}

TEST_CASE("multivariate r masks enumerate fully") {
  const PathSpace s = PathSpace::enumerate(
      {2, "mv"}, StateSpace{{Alphabet{{"0", "1"}}, Alphabet{{"0", "1"}}}}, 2);
  CHECK(s.r_mask_count() == 4);
  CHECK(s.size() == 4 * 4 * 4 * 4);  // (4 states x 4 masks)^2
}
