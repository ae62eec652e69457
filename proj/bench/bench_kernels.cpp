#include <benchmark/benchmark.h>

#include "pp/simulator.hpp"
#include "pp/verifier.hpp"

using namespace pp;

namespace {

const BoundProtocol& robustness_subject() {
  static const auto bp = build_from_expression("weak_convert(inhom_tower_cancel(x:2,y:-1;3))");
  return bp;
}

void BM_CheckRobustnessParallel(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(check_robustness(robustness_subject(), n));
}

void BM_CheckRobustnessSerial(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(check_robustness_serial(robustness_subject(), n));
}

BatchOptions batch_options(std::uint64_t trials) {
  BatchOptions opts;
  opts.trials = trials;
  opts.master_seed = 1;
  opts.snipe_budgets = {0, 1, 2};
  return opts;
}

void BM_BatchEstimateParallel(benchmark::State& state) {
  static const auto bp = build_tower(5);
  const auto c0 = bp.initial_configuration({12});
  const auto opts = batch_options(static_cast<std::uint64_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(batch_estimate(bp, c0, opts));
}

void BM_BatchEstimateSerial(benchmark::State& state) {
  static const auto bp = build_tower(5);
  const auto c0 = bp.initial_configuration({12});
  const auto opts = batch_options(static_cast<std::uint64_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(batch_estimate_serial(bp, c0, opts));
}

}  // namespace

BENCHMARK(BM_CheckRobustnessParallel)->Arg(5)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CheckRobustnessSerial)->Arg(5)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchEstimateParallel)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchEstimateSerial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
