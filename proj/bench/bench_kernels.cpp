#include <benchmark/benchmark.h>

#include "amctl/experiment.hpp"

using namespace amctl;

namespace {

Execution exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void BM_BuildTable(benchmark::State& state) {
  const SpectralModel model = example_model(16, 1.0, MemoryKernel::exponential(1, 1));
  const TimeGrid grid(1.0, static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(build_table(model, grid, exec_of(state)));
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}
BENCHMARK(BM_BuildTable)->ArgsProduct({{0, 1}, {500, 2000}})->Unit(benchmark::kMillisecond);

void BM_Sweep(benchmark::State& state) {
  const SpectralModel model = example_model(8, 1.0, MemoryKernel::exponential(1, 1));
  SpectralField mean = SpectralField::LinSpaced(8, 1.0, 0.125);
  const SweepConfig cfg{model, 200, {1.0, 0.1, 0.01}, static_cast<int>(state.range(1)),
                        SteeringTarget::affine(mean, 0.5, 1), SweepMode::stochastic, 1,
                        SolveOptions{}, GrowthEnvelope::example_safe(8)};
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(cfg, exec_of(state)));
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}
BENCHMARK(BM_Sweep)->ArgsProduct({{0, 1}, {16, 64}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
