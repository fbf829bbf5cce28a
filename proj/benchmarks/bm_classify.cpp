#include <benchmark/benchmark.h>

#include "superk/superk.hpp"

namespace {

superk::Matrix random_matrix(superk::Rng& rng, std::size_t rows, std::size_t cols) {
  superk::Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rng.uniform(-1.0, 1.0);
  }
  return m;
}

superk::Model random_model(superk::Rng& rng, std::size_t n, std::size_t m) {
  superk::Model model;
  model.generators = superk::precompute_offsets(superk::GeneratorSet(random_matrix(rng, n, m)));
  model.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) model.labels[i] = static_cast<int>(i % 10);
  model.n_classes = 10;
  return model;
}

// args: generators, batch rows
void BM_ClassifyBatch(benchmark::State& state) {
  superk::Rng rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto b = static_cast<std::size_t>(state.range(1));
  const superk::Model model = random_model(rng, n, 16);
  const superk::Matrix X = random_matrix(rng, b, 16);
  for (auto _ : state) benchmark::DoNotOptimize(superk::classify_batch(X, model));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * b));
  state.SetComplexityN(static_cast<std::int64_t>(n * b));
}
BENCHMARK(BM_ClassifyBatch)
    ->ArgsProduct({{64, 128, 256, 512, 1024}, {1024}})
    ->ArgsProduct({{256}, {512, 1024, 2048, 4096, 8192}})
    ->Complexity(benchmark::oN);

void BM_ClassifyPerRow(benchmark::State& state) {
  superk::Rng rng(2);
  const superk::Model model = random_model(rng, static_cast<std::size_t>(state.range(0)), 16);
  const superk::Matrix X = random_matrix(rng, 1024, 16);
  for (auto _ : state) {
    for (std::size_t r = 0; r < X.rows(); ++r) benchmark::DoNotOptimize(superk::classify(X.row(r), model));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * X.rows()));
}
BENCHMARK(BM_ClassifyPerRow)->Arg(64)->Arg(256)->Arg(1024);

void BM_Knn1(benchmark::State& state) {
  const superk::Dataset d = superk::make_moons(static_cast<std::size_t>(state.range(0)), 0.15, 0);
  for (auto _ : state) benchmark::DoNotOptimize(superk::knn_predict(d, d.features, 1));
}
BENCHMARK(BM_Knn1)->Arg(500)->Arg(1000)->Arg(2000);

}  // namespace
