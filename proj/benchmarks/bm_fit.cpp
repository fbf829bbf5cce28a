#include <benchmark/benchmark.h>

#include "superk/superk.hpp"

namespace {

void BM_FitMoons(benchmark::State& state) {
  const superk::Dataset d = superk::make_moons(static_cast<std::size_t>(state.range(0)), 0.15, 0);
  superk::Hyperparams hp;
  hp.k = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(superk::fit(d, hp));
}
BENCHMARK(BM_FitMoons)->Args({400, 10})->Args({2000, 10})->Args({2000, 40})->Unit(benchmark::kMillisecond);

void BM_VoxelizeClass(benchmark::State& state) {
  superk::Rng rng(3);
  const auto m = static_cast<std::size_t>(state.range(0));
  superk::Matrix X(2000, m);
  for (std::size_t r = 0; r < X.rows(); ++r) {
    for (std::size_t c = 0; c < m; ++c) X(r, c) = rng.normal();
  }
  for (auto _ : state) benchmark::DoNotOptimize(superk::voxelize_class(X, 50));
}
BENCHMARK(BM_VoxelizeClass)->Arg(2)->Arg(16)->Arg(64);

}  // namespace
