#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "gfd/feature_matrix.hpp"
#include "gfd/model.hpp"
#include "gfd/rng.hpp"

namespace {

gfd::FeatureMatrix blobs(std::size_t per, std::size_t k, std::size_t dim,
                         std::uint64_t seed) {
  gfd::Rng rng(seed);
  gfd::FeatureMatrix m;
  m.rows = per * k;
  m.cols = dim;
  for (std::size_t c = 0; c < dim; ++c) m.names.push_back("f" + std::to_string(c));
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < per; ++i) {
      for (std::size_t d = 0; d < dim; ++d)
        m.values.push_back(4.0 * static_cast<double>(c) + rng.gaussian());
      m.labels.push_back(static_cast<int>(c));
    }
  }
  return m;
}

void bm_train_forest(benchmark::State& state) {
  const auto m = blobs(static_cast<std::size_t>(state.range(0)), 4, 23, 51);
  gfd::TrainConfig cfg;
  cfg.kind = gfd::ModelKind::random_forest;
  cfg.trees = 100;
  cfg.seed = 7;
  for (auto _ : state) {
    auto model = gfd::train_model(m, m.labels, cfg);
    benchmark::DoNotOptimize(model.forest.data());
  }
}
BENCHMARK(bm_train_forest)->RangeMultiplier(2)->Range(32, 256);

void bm_train_softmax(benchmark::State& state) {
  const auto m = blobs(static_cast<std::size_t>(state.range(0)), 4, 23, 52);
  gfd::TrainConfig cfg;
  cfg.kind = gfd::ModelKind::softmax;
  cfg.epochs = 500;
  cfg.seed = 7;
  for (auto _ : state) {
    auto model = gfd::train_model(m, m.labels, cfg);
    benchmark::DoNotOptimize(model.weights.data());
  }
}
BENCHMARK(bm_train_softmax)->RangeMultiplier(2)->Range(32, 256);

void bm_predict_forest(benchmark::State& state) {
  const auto m = blobs(static_cast<std::size_t>(state.range(0)), 4, 23, 53);
  gfd::TrainConfig cfg;
  cfg.kind = gfd::ModelKind::random_forest;
  cfg.trees = 100;
  cfg.seed = 7;
  const auto model = gfd::train_model(m, m.labels, cfg);
  for (auto _ : state) {
    auto pred = gfd::predict(model, m);
    benchmark::DoNotOptimize(pred.labels.data());
  }
}
BENCHMARK(bm_predict_forest)->RangeMultiplier(2)->Range(32, 256);

}  // namespace

BENCHMARK_MAIN();
