#include <benchmark/benchmark.h>

#include "kinchain/kinetic.hpp"

using namespace kinchain;
using kinetic::cplx;

static void BM_EvolveKineticStep(benchmark::State& state) {
  auto m = model::DispersionModel::unpinned_nn();
  quad::Grid grid = quad::graded_grid(static_cast<int>(state.range(0)), 1e-8, 8);
  auto f = kinetic::make_field(grid, 1.0, [](double k) {
    return cplx{std::exp(-30.0 * (k - 0.2) * (k - 0.2)), 0.0};
  });
  kinetic::EvolveOptions opt;
  opt.dt = 0.05;
  double t = 0.0;
  for (auto _ : state) {
    t += 10 * opt.dt;
    auto r = kinetic::evolve_kinetic(f, m, t, opt);
    f = std::move(r.field);
    benchmark::DoNotOptimize(f.values[0]);
  }
  state.SetItemsProcessed(state.iterations() * 10 * grid.size());
}
BENCHMARK(BM_EvolveKineticStep)->Arg(128)->Arg(512);

static void BM_ResolventSystem(benchmark::State& state) {
  for (auto _ : state) {
    auto rec = kinetic::resolvent_system({0.7, 0.3});
    benchmark::DoNotOptimize(rec.delta);
  }
}
BENCHMARK(BM_ResolventSystem);

BENCHMARK_MAIN();
