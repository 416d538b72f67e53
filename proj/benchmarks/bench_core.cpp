#include <benchmark/benchmark.h>

#include <random>

#include "qkdmm/attack_sim.hpp"
#include "qkdmm/characterization.hpp"
#include "qkdmm/eve_optimizer.hpp"
#include "qkdmm/sweep.hpp"
#include "qkdmm/virtual_filter.hpp"
#include "support/generators.hpp"

using namespace qkdmm;

static void BM_MismatchSpectrum(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const DetectorPair pair = testing::random_pair(rng, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mismatch_spectrum(pair));
}
BENCHMARK(BM_MismatchSpectrum)->Arg(2)->Arg(8)->Arg(32);

static void BM_EvaluateStatistics(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const Index d = state.range(0);
  const DetectorPair pair = testing::random_pair(rng, d);
  const VirtualFilter filter = compute_virtual_filter(mismatch_spectrum(pair), pair);
  const EveState eve = testing::random_state(rng, d, 2);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_statistics(eve, pair, filter));
}
BENCHMARK(BM_EvaluateStatistics)->Arg(2)->Arg(8);

static void BM_MinimizeFilteringProbability(benchmark::State& state) {
  const DetectorPair pair = testing::correlated_pair();
  const VirtualFilter filter = compute_virtual_filter(mismatch_spectrum(pair), pair);
  SolverConfig config;
  config.starts = static_cast<int>(state.range(0));
  config.threads = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(minimize_filtering_probability(pair, filter, {0.05, 0.05}, config));
  }
}
BENCHMARK(BM_MinimizeFilteringProbability)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_Sweep(benchmark::State& state) {
  const DetectorPair pair = testing::correlated_pair();
  SweepOptions options;
  options.steps = 20;
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(pair, options));
}
BENCHMARK(BM_Sweep)->Unit(benchmark::kMillisecond)->Iterations(1);

static void BM_DiscretizeResponse(benchmark::State& state) {
  const ContinuousResponse flat({-5e-9, 10e-9}, {0.5, 0.5});
  const FilteredGate gate = sample_grid(static_cast<double>(state.range(0)) * 1e9, 0.0, 2e-9);
  for (auto _ : state) benchmark::DoNotOptimize(discretize_response(flat, gate));
}
BENCHMARK(BM_DiscretizeResponse)->Arg(1)->Arg(4);

static void BM_TimeShiftAttack(benchmark::State& state) {
  const DetectorPair pair = testing::correlated_pair();
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_time_shift({pair, {{0, 0.5}, {1, 0.5}}, 1000000, 1, 1}));
  }
}
BENCHMARK(BM_TimeShiftAttack)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
