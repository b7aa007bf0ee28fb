// Serial reference versus OpenMP replicate loops on the two heaviest kernels:
// coupled block runs and stationary path sampling for correlations.

#include <benchmark/benchmark.h>

#include "gmix/analysis.hpp"
#include "gmix/coupling.hpp"
#include "gmix/parallel.hpp"
#include "gmix/potential.hpp"

namespace {

const gmix::PotentialModel& long_memory() {
  static const gmix::PotentialModel model = gmix::PotentialModel::long_memory(0.2, 1.5, 1000);
  return model;
}

gmix::ExecPolicy policy_for(const benchmark::State& state) {
  return state.range(0) == 0 ? gmix::ExecPolicy::serial() : gmix::ExecPolicy::parallel();
}

void BM_Coupling(benchmark::State& state) {
  const gmix::BlockSchedule schedule(1.0);
  const gmix::RngStream rng(7, 0);
  const auto policy = policy_for(state);
  for (auto _ : state) {
    auto counts = gmix::simulate_coupling(long_memory(), gmix::History({}, 1), gmix::History({}, 0), 100, 2000,
                                          schedule, gmix::BlockMaximal{}, rng, policy);
    benchmark::DoNotOptimize(counts.block_fail.data());
  }
  state.SetItemsProcessed(state.iterations() * 2000);
}

void BM_Correlations(benchmark::State& state) {
  const auto f = gmix::Observable::symbol_values({0.0, 1.0});
  const gmix::SimulationPlan plan{500, 20000, 8};
  const gmix::RngStream rng(11, 0);
  const auto policy = policy_for(state);
  for (auto _ : state) {
    auto est = gmix::correlation_decay(long_memory(), f, f, {1, 2, 4, 8}, plan, rng, policy);
    benchmark::DoNotOptimize(est.data());
  }
  state.SetItemsProcessed(state.iterations() * 8);
}

}  // namespace

// Argument 0 = serial reference, 1 = OpenMP.
BENCHMARK(BM_Coupling)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Correlations)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
