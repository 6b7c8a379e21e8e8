// Microbenchmarks for the metric and loss kernels that dominate training time.
#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "matinfo/linalg.hpp"
#include "matinfo/losses.hpp"
#include "matinfo/metrics.hpp"
#include "matinfo/rng.hpp"
#include "matinfo/trainer.hpp"

namespace {

using namespace matinfo;

Eigen::MatrixXd random_matrix(long rows, long cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (long j = 0; j < cols; ++j) {
    for (long i = 0; i < rows; ++i) m(i, j) = rng.gaussian();
  }
  return m;
}

void BM_gram(benchmark::State& state) {
  const FeatureMatrix z(random_matrix(128, state.range(0), 1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gram(z));
  }
}
BENCHMARK(BM_gram)->Arg(64)->Arg(256);

void BM_matrix_entropy(benchmark::State& state) {
  const GramMatrix k = gram(FeatureMatrix(random_matrix(128, state.range(0), 2)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(matrix_entropy(k));
  }
}
BENCHMARK(BM_matrix_entropy)->Arg(64)->Arg(256);

void BM_entropy_grad(benchmark::State& state) {
  const GramMatrix k = gram(FeatureMatrix(random_matrix(128, state.range(0), 3)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(entropy_grad(k));
  }
}
BENCHMARK(BM_entropy_grad)->Arg(64)->Arg(256);

void BM_mi_loss(benchmark::State& state) {
  const int b = static_cast<int>(state.range(0));
  std::vector<int> labels(b);
  for (int i = 0; i < b; ++i) labels[i] = i % 10;
  const FeatureMatrix f(random_matrix(128, b, 4), labels);
  const FeatureMatrix w(random_matrix(128, 10, 5));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mi_loss(f, w, 0.5));
  }
}
BENCHMARK(BM_mi_loss)->Arg(64)->Arg(256);

void BM_cma_loss(benchmark::State& state) {
  const int b = static_cast<int>(state.range(0));
  std::vector<int> labels(b);
  for (int i = 0; i < b; ++i) labels[i] = i % 10;
  const FeatureMatrix f(random_matrix(128, b, 6), labels);
  const FeatureMatrix w(random_matrix(128, 10, 7));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cma_loss(f, w));
  }
}
BENCHMARK(BM_cma_loss)->Arg(64)->Arg(256);

void BM_train_steps(benchmark::State& state) {
  TrainConfig cfg;
  cfg.dataset.kind = DatasetSpec::Kind::blobs;
  cfg.dataset.blobs = {10, 32, 50, 4.0, 1.0};
  cfg.steps = state.range(0);
  cfg.hidden_dims = {128, 128};
  cfg.seed = 8;
  cfg.data_seed = 8;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train(cfg, nullptr));
  }
  state.SetItemsProcessed(state.iterations() * cfg.steps);
}
BENCHMARK(BM_train_steps)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
