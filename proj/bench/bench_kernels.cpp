#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ldg/kernels.hpp"

namespace {

using namespace ldg;

struct Setup {
  explicit Setup(double resolution)
      : grid(Grid::build(ShapeSpec{Disk{1.0}, {0.0, 0.0}}, resolution)),
        params(1.0, 0.5, 0.5, BulkSpec::classic(-1.0, 1.0, 1.0), 0.05),
        x(static_cast<std::size_t>(grid->num_nodes()) * 3),
        grad(x.size()) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 0.5);
    for (double& v : x) v = n(rng);
  }
  std::shared_ptr<const Grid> grid;
  ModelParams params;
  std::vector<double> x, grad;
};

void BM_LdGParallel(benchmark::State& state) {
  Setup s(static_cast<double>(state.range(0)));
  set_worker_count(static_cast<int>(state.range(1)));
  Assembler<LdGDensity> a(*s.grid, LdGDensity(s.params));
  for (auto _ : state) {
    const EnergyBreakdown e = a.evaluate(s.x.data(), s.grad.data());
    benchmark::DoNotOptimize(e);
    benchmark::ClobberMemory();
  }
  set_worker_count(0);
  state.SetItemsProcessed(state.iterations() * s.grid->num_cells());
}

void BM_LdGSerial(benchmark::State& state) {
  Setup s(static_cast<double>(state.range(0)));
  Assembler<LdGDensity> a(*s.grid, LdGDensity(s.params));
  for (auto _ : state) {
    const EnergyBreakdown e = a.evaluate_serial(s.x.data(), s.grad.data());
    benchmark::DoNotOptimize(e);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * s.grid->num_cells());
}

void BM_LdGEnergyOnly(benchmark::State& state) {
  Setup s(static_cast<double>(state.range(0)));
  Assembler<LdGDensity> a(*s.grid, LdGDensity(s.params));
  for (auto _ : state) benchmark::DoNotOptimize(a.evaluate(s.x.data(), nullptr));
}

}  // namespace

BENCHMARK(BM_LdGParallel)->ArgsProduct({{32, 64, 128}, {1, 2, 4}})->UseRealTime()->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_LdGSerial)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_LdGEnergyOnly)->Arg(64)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
