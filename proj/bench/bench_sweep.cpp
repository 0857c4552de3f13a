#include <benchmark/benchmark.h>

#include "safeadapt/scenario.hpp"
#include "safeadapt/simulator.hpp"

namespace sa = safeadapt;

namespace {

sa::SimConfig bench_config() {
  sa::SimConfig c = sa::preset("obstacle");
  c.t_end = 5.0;
  return c;
}

void BM_SweepSerial(benchmark::State& state) {
  const auto cfg = bench_config();
  const auto ics = sa::ring_initial_conditions(0.0, 0.0, 2.5, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sa::sweep_serial(cfg, ics));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SweepParallel(benchmark::State& state) {
  const auto cfg = bench_config();
  const auto ics = sa::ring_initial_conditions(0.0, 0.0, 2.5, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sa::sweep(cfg, ics));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_SweepSerial)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepParallel)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
