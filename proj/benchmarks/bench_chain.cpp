#include <benchmark/benchmark.h>

#include "kinchain/chain.hpp"
#include "kinchain/functionals.hpp"

using namespace kinchain;

static void BM_SampleStationary(benchmark::State& state) {
  StreamRng rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(chain::sample_stationary(rng).k);
}
BENCHMARK(BM_SampleStationary);

static void BM_SkeletonStep(benchmark::State& state) {
  StreamRng rng(2, 0);
  TorusPoint k = chain::sample_stationary(rng);
  for (auto _ : state) {
    k = chain::skeleton_step(k, rng);
    benchmark::DoNotOptimize(k.k);
  }
}
BENCHMARK(BM_SkeletonStep);

static void BM_JumpProcessSegment(benchmark::State& state) {
  StreamRng rng(3, 0);
  double acc = 0.0;
  for (auto _ : state) {
    chain::run_jump_process(std::nullopt, 100.0, rng,
                            [&](const chain::JumpSegment& s) { acc += s.dt; });
  }
  benchmark::DoNotOptimize(acc);
  state.SetItemsProcessed(state.iterations() * 150);  // ~1.5 jumps per unit time
}
BENCHMARK(BM_JumpProcessSegment);

static void BM_AdditiveFunctionalPath(benchmark::State& state) {
  auto m = model::DispersionModel::unpinned_nn();
  const double N = state.range(0);
  std::uint64_t i = 0;
  for (auto _ : state) {
    auto ys = functionals::simulate_y_samples(
        [&m](double k) { return m.omega_prime(TorusPoint{k}); }, N, 1.0, 1.5, 1,
        7, i++, 1);
    benchmark::DoNotOptimize(ys[0]);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(1.5 * N));
}
BENCHMARK(BM_AdditiveFunctionalPath)->Arg(1000)->Arg(10000);

BENCHMARK_MAIN();
