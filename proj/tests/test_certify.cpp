#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gcmp/battery.hpp"
#include "gcmp/certify.hpp"
#include "gcmp/likelihood.hpp"
#include "gcmp/scenarios.hpp"

using namespace gcmp;

TEST_CASE("filtrations increase stage by stage") {
  const JointModel m = make_m1_anticipating();
  const Filtration o = observed_filtration(m);
  const Filtration fs = fstar_filtration(m);
  REQUIRE(o.stages.size() == 3);  // t = 0, 1, 2
  CHECK(o.stages[0].atom_count() == 1);
  CHECK(same_partition(fs.stages[0], sigma_x(m)));
  for (std::size_t t = 1; t < o.stages.size(); ++t) {
    CHECK(refines(o.stages[t], o.stages[t - 1]));
    CHECK(refines(fs.stages[t], fs.stages[t - 1]));
    CHECK(refines(fs.stages[t], o.stages[t]));
  }
  CHECK(same_partition(o.stages.back(), observed_partition(m)));
}

TEST_CASE("visit counting of R reads off the r-path") {
  const JointModel m = make_m1_ignorable();
  const CountingProcess n = counting_of_R(m, CountingConvention::Visits);
  CHECK(n.mark_count == 2);
  for (std::uint32_t i = 0; i < m.space().size(); ++i)
    for (std::size_t t = 0; t < 2; ++t)
      CHECK(n.marks[i][t] == m.space().path(i).r[t]);
}

TEST_CASE("window counting of R jumps once at the censoring flip") {
  const JointModel m = find_scenario("right_censor_deterministic").build();
  const CountingProcess n = counting_of_R(m, CountingConvention::Windows);
  for (std::uint32_t i = 0; i < m.space().size(); ++i) {
    const Path& p = m.space().path(i);
    unsigned prev = 1, flips = 0;
    for (std::size_t t = 0; t < p.r.size(); ++t) {
      const unsigned expect = p.r[t] != prev ? 1u : 0u;
      CHECK(n.marks[i][t] == expect);
      flips += expect;
      prev = p.r[t];
    }
    CHECK(flips <= 1);  // windows close once here
  }
}

TEST_CASE("counting of X refuses non-monotone components") {
  const JointModel m = make_m1_ignorable();  // Bernoulli flips up and down
  CHECK_THROWS_WITH(counting_of_X(m, 0), "not applicable");
  const JointModel surv = find_scenario("right_censor_independent").build();
  CHECK_NOTHROW(counting_of_X(surv, 0));
}

TEST_CASE("compensator read-offs on the desk models") {
  SUBCASE("ignorable, F*, second visit hazard is the kernel value") {
    const JointModel m = make_m1_ignorable();
    const CountingProcess n = counting_of_R(m, CountingConvention::Visits);
    const Compensator c = compensator(m, n, fstar_filtration(m), {0, 1});
    for (std::uint32_t i = 0; i < m.space().size(); ++i) {
      const double expect = m.space().path(i).x[0] == 1 ? 0.7 : 0.4;
      CHECK(c.increments[1][1].v[i] == doctest::Approx(expect).epsilon(1e-13));
    }
  }
  SUBCASE("anticipating, F* sees X_2 but O only mixes over it") {
    const JointModel m = make_m1_anticipating();
    const CountingProcess n = counting_of_R(m, CountingConvention::Visits);
    const Compensator cf = compensator(m, n, fstar_filtration(m), {0, 0});
    const Compensator co = compensator(m, n, observed_filtration(m), {0, 0});
    for (std::uint32_t i = 0; i < m.space().size(); ++i) {
      const Path& p = m.space().path(i);
      CHECK(cf.increments[1][1].v[i] ==
            doctest::Approx(p.x[1] == 1 ? 0.9 : 0.5).epsilon(1e-13));
      // theta = 0.3: mixture 0.9 theta + 0.5 (1 - theta) = 0.62.
      CHECK(co.increments[1][1].v[i] == doctest::Approx(0.62).epsilon(1e-13));
    }
  }
}

TEST_CASE("compensator increments satisfy the martingale property") {
  const JointModel m = find_scenario("right_censor_independent").build();
  const CountingProcess n = counting_of_R(m, CountingConvention::Windows);
  for (const Filtration& f : {observed_filtration(m), fstar_filtration(m)}) {
    for (int ti = 0; ti < m.theta_count(); ++ti) {
      for (int pi = 0; pi < m.psi_count(); ++pi) {
        const ParamPair params{ti, pi};
        const Compensator c = compensator(m, n, f, params);
        const Measure& mu = m.measure(params);
        const int horizon = m.space().grid().horizon;
        for (int t = 1; t <= horizon; ++t) {
          for (int mk = 0; mk < n.mark_count; ++mk) {
            const auto& lam = c.increments[t - 1][mk];
            CHECK(is_measurable(lam, f.stages[t - 1], 1e-12));
            for (const auto& atom : f.stages[t - 1].atoms) {
              double resid = 0.0, mass = 0.0;
              for (auto i : atom) {
                const double dn =
                    n.marks[i][t - 1] == static_cast<unsigned>(mk) ? 1.0 : 0.0;
                resid += mu.p[i] * (dn - lam.v[i]);
                mass += mu.p[i];
              }
              CHECK(std::abs(resid) / mass < 1e-12);
            }
          }
        }
      }
    }
  }
}

TEST_CASE("innovation consistency between O and F* compensators") {
  const JointModel m = make_m1_ignorable();
  const CountingProcess n = counting_of_R(m, CountingConvention::Visits);
  const Filtration o = observed_filtration(m);
  const Filtration fs = fstar_filtration(m);
  const ParamPair params{0, 1};
  const Compensator co = compensator(m, n, o, params);
  const Compensator cf = compensator(m, n, fs, params);
  const Measure& mu = m.measure(params);
  const int horizon = m.space().grid().horizon;
  for (int t = 1; t <= horizon; ++t) {
    for (int mk = 0; mk < n.mark_count; ++mk) {
      const PathFunction proj =
          cond_expect(cf.increments[t - 1][mk], o.stages[t - 1], mu);
      for (std::uint32_t i = 0; i < m.space().size(); ++i)
        CHECK(co.increments[t - 1][mk].v[i] ==
              doctest::Approx(proj.v[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("CAR certificates on the ignorable desk model") {
  const JointModel m = make_m1_ignorable();
  CHECK(check_car_dyn(m).verdict == Verdict::Holds);
  CHECK(check_car_gcmp(m).verdict == Verdict::Holds);
  CHECK(check_car_rel(m).verdict == Verdict::Holds);
  CHECK(check_car_abs(m).verdict == Verdict::Holds);
  CHECK(check_stepwise_kernel_mar(m).verdict == Verdict::Holds);
  CHECK(check_factorization(m).verdict == Verdict::Holds);
  CHECK(!is_predictable(m));
}

TEST_CASE("CAR certificates fail together on the anticipating desk model") {
  const JointModel m = make_m1_anticipating();
  const Certificate dyn = check_car_dyn(m);
  const Certificate gcmp = check_car_gcmp(m);
  const Certificate rel = check_car_rel(m);
  const Certificate abs = check_car_abs(m);
  CHECK(dyn.verdict == Verdict::Fails);
  CHECK(gcmp.verdict == Verdict::Fails);
  CHECK(rel.verdict == Verdict::Fails);
  CHECK(abs.verdict == Verdict::Fails);
  CHECK(check_stepwise_kernel_mar(m).verdict == Verdict::Fails);
  CHECK(check_factorization(m).verdict == Verdict::PreconditionFailed);

  // Failing certificates must carry a re-checkable witness.
  REQUIRE(gcmp.witness.has_value());
  const Witness& w = *gcmp.witness;
  const Partition o = observed_partition(m);
  CHECK(o.atom_of[w.path_a] == o.atom_of[w.path_b]);
  const PathFunction ratio =
      conditional_lr(m, sigma_r(m), sigma_x(m), w.num, w.den);
  CHECK(std::abs(ratio.v[w.path_a] - ratio.v[w.path_b]) > derived_tol());

  REQUIRE(dyn.witness.has_value());
  CHECK(dyn.witness->t == 2);
}

TEST_CASE("loc and ignorable per r-path") {
  const JointModel good = make_m1_ignorable();
  const JointModel bad = make_m1_anticipating();
  const std::vector<unsigned> half{1, 0}, both{1, 1}, off{0, 1};

  CHECK(check_car_loc(good, half).verdict == Verdict::Holds);
  CHECK(check_ignorable(good, half).verdict == Verdict::Holds);
  CHECK(check_car_loc(bad, half).verdict == Verdict::Fails);
  CHECK(check_ignorable(bad, half).verdict == Verdict::Fails);

  // Everything-seen r is ignorable regardless of the mechanism.
  CHECK(check_ignorable(good, both).verdict == Verdict::Holds);
  CHECK(check_ignorable(bad, both).verdict == Verdict::Holds);

  CHECK_THROWS_WITH(check_car_loc(good, off), "r off support");
  CHECK_THROWS_WITH(check_ignorable(good, off), "r off support");
}

TEST_CASE("factorization splits L_O and the X-factor ignores psi0") {
  const JointModel m = make_m1_ignorable();
  const Partition o = observed_partition(m);
  const ParamPair num{0, 1};
  const PathFunction l_rx =
      conditional_lr(m, sigma_r(m), sigma_x(m), num, {1, 0});
  std::vector<PathFunction> x_factor;
  for (int p0 = 0; p0 < m.psi_count(); ++p0) {
    const PathFunction l_x = lr(m, {0, p0}, {1, p0}, sigma_x(m));
    x_factor.push_back(cond_expect(l_x, o, m.measure({1, p0})));
  }
  const PathFunction l_o = lr(m, num, {1, 0}, o);
  for (std::uint32_t i = 0; i < m.space().size(); ++i) {
    CHECK(l_o.v[i] ==
          doctest::Approx(l_rx.v[i] * x_factor[0].v[i]).epsilon(1e-12));
    CHECK(x_factor[0].v[i] ==
          doctest::Approx(x_factor[1].v[i]).epsilon(1e-12));
  }
}

TEST_CASE("independent censoring certificate") {
  CHECK(check_independent_censoring(
            find_scenario("right_censor_independent").build())
            .verdict == Verdict::Holds);
  CHECK(check_independent_censoring(
            find_scenario("right_censor_deterministic").build())
            .verdict == Verdict::Holds);
  CHECK(check_independent_censoring(
            find_scenario("right_censor_informative").build())
            .verdict == Verdict::Fails);
  // X must be a counting process for the certificate to mean anything.
  CHECK(check_independent_censoring(make_m1_ignorable()).verdict ==
        Verdict::NotApplicable);
}

TEST_CASE("independent censoring tracks CAR(DYN) on censoring models") {
  for (const char* name : {"right_censor_deterministic",
                           "right_censor_independent",
                           "right_censor_informative"}) {
    const Scenario& s = find_scenario(name);
    const JointModel m = s.build();
    const Certificate dyn = check_car_dyn(m, s.convention);
    const Certificate ind = check_independent_censoring(m, s.survival_component);
    CHECK(dyn.verdict == ind.verdict);
  }
}

TEST_CASE("predictability certificate") {
  CHECK(is_predictable(find_scenario("right_censor_deterministic").build(),
                       CountingConvention::Windows));
  CHECK(is_predictable(find_scenario("observation_windows").build()));
  CHECK(is_predictable(find_scenario("adaptive_stopping_threshold").build()));
  CHECK(!is_predictable(make_m1_ignorable()));
}

TEST_CASE("theorem battery on the desk models keeps every arrow") {
  for (auto* build : {&make_m1_ignorable, &make_m1_anticipating}) {
    const BatteryResult r = theorem_battery((*build)());
    CHECK(r.violated_arrows.empty());
    CHECK(r.gcmp.verdict == r.rel.verdict);
  }
}

TEST_CASE("implication checker catches tampered results") {
  BatteryResult r = theorem_battery(make_m1_ignorable());
  REQUIRE(implication_violations(r).empty());
  r.gcmp.verdict = Verdict::Fails;  // DYN holds but GCMP "fails"
  const auto broken = implication_violations(r);
  CHECK(!broken.empty());

  BatteryResult r2 = theorem_battery(make_m1_ignorable());
  REQUIRE(!r2.loc.empty());
  r2.ignorable.front().second.verdict = Verdict::Fails;
  CHECK(!implication_violations(r2).empty());
}

TEST_CASE("random battery finds no implication violations") {
  const RandomBatteryReport rep = run_random_battery(20240101, 50);
  CHECK(rep.requested == 50);
  CHECK(rep.evaluated + rep.skipped_cap == 50);
  CHECK(rep.evaluated > 0);
  CHECK(rep.violations.empty());
}

TEST_CASE("random battery hook self-test: tampering is detected") {
  const auto tamper = [](BatteryResult& r) {
    if (r.dyn.verdict == Verdict::Holds) r.gcmp.verdict = Verdict::Fails;
  };
  const RandomBatteryReport rep = run_random_battery(20240101, 50, 100000, tamper);
  CHECK(!rep.violations.empty());
}

TEST_CASE("stepwise kernel MAR agrees with CAR(DYN) on visit-style scenarios") {
  for (const char* name :
       {"m1_ignorable", "m1_anticipating", "interval_censor_fixed_visits",
        "mixed_monitoring", "marker_visit_schedule"}) {
    const Scenario& s = find_scenario(name);
    const JointModel m = s.build();
    CHECK(check_stepwise_kernel_mar(m).verdict ==
          check_car_dyn(m, s.convention).verdict);
  }
}
