#include <benchmark/benchmark.h>

#include "kinchain/lattice.hpp"

using namespace kinchain;

static void BM_HarmonicStep(benchmark::State& state) {
  auto m = model::DispersionModel::unpinned_nn();
  StreamRng rng(1, 0);
  auto s = lattice::init_state(m, static_cast<int>(state.range(0)), 0.1,
                               lattice::PacketSpec{}, rng);
  for (auto _ : state) {
    lattice::step_harmonic(s, m, 0.02);
    benchmark::DoNotOptimize(s.p[0]);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_HarmonicStep)->Arg(1024)->Arg(4096);

static void BM_NoiseStep(benchmark::State& state) {
  auto m = model::DispersionModel::unpinned_nn();
  StreamRng rng(2, 0), nrng(3, 0);
  auto s = lattice::init_state(m, static_cast<int>(state.range(0)), 0.1,
                               lattice::PacketSpec{}, rng);
  for (auto _ : state) {
    lattice::step_noise(s, 0.02, nrng);
    benchmark::DoNotOptimize(s.p[0]);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NoiseStep)->Arg(1024)->Arg(4096);

static void BM_WignerEstimate(benchmark::State& state) {
  auto m = model::DispersionModel::unpinned_nn();
  auto ens = lattice::init_ensemble(m, 1024, 0.1, lattice::PacketSpec{}, 8, 5);
  std::vector<int> shifts;
  for (int mm = -8; mm <= 8; ++mm) shifts.push_back(mm);
  for (auto _ : state) {
    auto w = lattice::wigner_estimate(ens, shifts, 1);
    benchmark::DoNotOptimize(w.mean[0][0]);
  }
}
BENCHMARK(BM_WignerEstimate);

BENCHMARK_MAIN();
