#include <benchmark/benchmark.h>

#include <numbers>

#include "sgeo/cross_section.hpp"
#include "sgeo/experiments.hpp"
#include "sgeo/warp.hpp"

namespace {

using namespace sgeo;

void run_sweep(benchmark::State& state, Execution exec) {
  const auto wf = make_power_warp(2.0, 1.5);
  const auto cs = circle_section(2.0 * std::numbers::pi, {}, 1.5);
  const auto launch = default_launch(cs);
  const auto deltas = default_delta_ladder(wf);
  for (auto _ : state) {
    auto res = delta_sweep(wf, cs, deltas, launch, {}, exec);
    benchmark::DoNotOptimize(res.lengths.data());
  }
  state.counters["deltas"] = static_cast<double>(deltas.size());
}

void run_campaign(benchmark::State& state, Execution exec) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto rep = run_bounds_campaign(n, 20240601, exec);
    benchmark::DoNotOptimize(rep.cases.data());
  }
}

void BM_SweepSerial(benchmark::State& s) { run_sweep(s, Execution::serial); }
void BM_SweepParallel(benchmark::State& s) { run_sweep(s, Execution::parallel); }
void BM_CampaignSerial(benchmark::State& s) { run_campaign(s, Execution::serial); }
void BM_CampaignParallel(benchmark::State& s) { run_campaign(s, Execution::parallel); }

}  // namespace

BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CampaignSerial)->Arg(16)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CampaignParallel)->Arg(16)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
