#include <benchmark/benchmark.h>

#include "gcmp/battery.hpp"
#include "gcmp/certify.hpp"
#include "gcmp/estimation.hpp"
#include "gcmp/likelihood.hpp"
#include "gcmp/scenarios.hpp"

using namespace gcmp;

namespace {

void BM_BuildDeskModel(benchmark::State& state) {
  for (auto _ : state) {
    JointModel m = make_m1_anticipating();
    benchmark::DoNotOptimize(m.space().size());
  }
}
BENCHMARK(BM_BuildDeskModel);

void BM_BuildCensoringScenario(benchmark::State& state) {
  const Scenario& s = find_scenario("right_censor_independent");
  for (auto _ : state) {
    JointModel m = s.build();
    benchmark::DoNotOptimize(m.space().size());
  }
}
BENCHMARK(BM_BuildCensoringScenario);

void BM_ObservedPartition(benchmark::State& state) {
  const JointModel m = find_scenario("marker_visit_schedule").build();
  for (auto _ : state) {
    Partition o = observed_partition(m);
    benchmark::DoNotOptimize(o.atom_count());
  }
}
BENCHMARK(BM_ObservedPartition);

void BM_Compensator(benchmark::State& state) {
  const JointModel m = find_scenario("right_censor_independent").build();
  const CountingProcess n = counting_of_R(m, CountingConvention::Windows);
  const Filtration f = observed_filtration(m);
  for (auto _ : state) {
    Compensator c = compensator(m, n, f, {0, 0});
    benchmark::DoNotOptimize(c.increments.size());
  }
}
BENCHMARK(BM_Compensator);

void BM_CarDynCertificate(benchmark::State& state) {
  const JointModel m = find_scenario("joint_model_dropout_observed").build();
  for (auto _ : state) {
    Certificate c = check_car_dyn(m);
    benchmark::DoNotOptimize(c.verdict);
  }
}
BENCHMARK(BM_CarDynCertificate);

void BM_TheoremBattery(benchmark::State& state) {
  const JointModel m = make_m1_ignorable();
  for (auto _ : state) {
    BatteryResult r = theorem_battery(m);
    benchmark::DoNotOptimize(r.violated_arrows.size());
  }
}
BENCHMARK(BM_TheoremBattery);

void BM_SimulateAndFit(benchmark::State& state) {
  const JointModel m = make_m1_ignorable();
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const Dataset d = simulate(m, {0.3}, {0.5, 0.5}, n, 20240101);
    const FitResult r = fit_mle(m, d, FitMethod::Correct, {0.3}, {0.5, 0.5});
    benchmark::DoNotOptimize(r.theta_hat);
  }
}
BENCHMARK(BM_SimulateAndFit)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
