#include <benchmark/benchmark.h>

#include "smallgain/density.hpp"
#include "smallgain/example_system.hpp"
#include "smallgain/sim.hpp"

using namespace smallgain;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

const SystemModel& model() {
  static const SystemModel m = example::make_model({}, 0.5);
  return m;
}

void label(benchmark::State& state) { state.SetLabel(state.range(0) == 0 ? "serial" : "parallel"); }

}  // namespace

static void BM_SgcScan(benchmark::State& state) {
  SgcOptions o;
  o.exec = mode(state);
  o.grid_step = 1e-2;
  const double bound = 1.1 * example::ExampleParams{}.a();
  for (auto _ : state) benchmark::DoNotOptimize(find_sgc_intervals(model().gamma_12, model().gamma_21, bound, o));
  label(state);
}
BENCHMARK(BM_SgcScan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_IssGrid(benchmark::State& state) {
  IssCheckOptions o;
  o.exec = mode(state);
  const auto grid = BoxGrid::square(-60, 60, 121);
  for (auto _ : state) benchmark::DoNotOptimize(check_iss_lyapunov(model(), 1, grid, o));
  label(state);
}
BENCHMARK(BM_IssGrid)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_DensityGrid(benchmark::State& state) {
  DensityCheckOptions o;
  o.exec = mode(state);
  DensityRegion region{"box", BoxGrid::square(-60, 60, 200), std::nullopt, std::nullopt};
  for (auto _ : state)
    benchmark::DoNotOptimize(check_density_propagation(example::density(), model(), region, DensityGate{}, {}, o));
  label(state);
}
BENCHMARK(BM_DensityGrid)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_Sweep(benchmark::State& state) {
  SweepOptions o;
  o.exec = mode(state);
  o.t_end = 5.0;
  o.equilibria = example::equilibrium_states({});
  const auto grid = BoxGrid::square(0, 60, 8);
  for (auto _ : state) benchmark::DoNotOptimize(sweep(model(), {}, grid, o));
  label(state);
}
BENCHMARK(BM_Sweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
