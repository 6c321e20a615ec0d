#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "gfd/feature_matrix.hpp"
#include "gfd/graph.hpp"
#include "gfd/rng.hpp"

namespace {

gfd::FeatureMatrix random_points(std::size_t n, std::size_t dim, std::uint64_t seed) {
  gfd::Rng rng(seed);
  gfd::FeatureMatrix m;
  m.rows = n;
  m.cols = dim;
  m.values.resize(n * dim);
  for (auto& v : m.values) v = rng.gaussian();
  return m;
}

void bm_knn_graph(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto z = random_points(n, 23, 31);
  std::vector<int> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  for (auto _ : state) {
    auto g = gfd::build_knn_graph(z, rows, 5, 95.0);
    benchmark::DoNotOptimize(g.edges.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_knn_graph)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

gfd::WeightedGraph ring_with_chords(int n, std::uint64_t seed) {
  gfd::Rng rng(seed);
  gfd::WeightedGraph g;
  for (int i = 0; i < n; ++i) g.node_ids.push_back(i);
  for (int i = 0; i < n; ++i) g.edges.push_back({std::min(i, (i + 1) % n),
                                                 std::max(i, (i + 1) % n),
                                                 0.2 + 0.8 * rng.uniform()});
  for (int i = 0; i < n / 4; ++i) {
    int u = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    if (u == v) continue;
    g.edges.push_back({std::min(u, v), std::max(u, v), 0.2 + 0.8 * rng.uniform()});
  }
  return g;
}

void bm_avg_shortest_path(benchmark::State& state) {
  const auto g = ring_with_chords(static_cast<int>(state.range(0)), 32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        gfd::avg_shortest_path_length(g, gfd::PathCost::similarity));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_avg_shortest_path)->RangeMultiplier(2)->Range(32, 512)->Complexity();

void bm_spectral_gap(benchmark::State& state) {
  const auto g = ring_with_chords(static_cast<int>(state.range(0)), 33);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gfd::spectral_gap(g));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_spectral_gap)->RangeMultiplier(2)->Range(16, 256)->Complexity();

}  // namespace

BENCHMARK_MAIN();
