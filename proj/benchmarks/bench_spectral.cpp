#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "gfd/rng.hpp"
#include "gfd/spectral.hpp"

namespace {

std::vector<double> noisy_tone(std::size_t n, std::uint64_t seed) {
  gfd::Rng rng(seed);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = std::sin(0.07 * static_cast<double>(i)) + 0.3 * rng.gaussian();
  return x;
}

void bm_fft_magnitude(benchmark::State& state) {
  const auto x = noisy_tone(static_cast<std::size_t>(state.range(0)), 11);
  for (auto _ : state) {
    auto spec = gfd::fft_magnitude(x, 8192.0);
    benchmark::DoNotOptimize(spec.magnitudes.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_fft_magnitude)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void bm_welch_psd(benchmark::State& state) {
  const auto x = noisy_tone(static_cast<std::size_t>(state.range(0)), 12);
  for (auto _ : state) {
    auto psd = gfd::welch_psd(x, 8192.0, 256);
    benchmark::DoNotOptimize(psd.power.data());
  }
}
BENCHMARK(bm_welch_psd)->RangeMultiplier(4)->Range(1024, 16384);

void bm_hilbert_envelope(benchmark::State& state) {
  const auto x = noisy_tone(static_cast<std::size_t>(state.range(0)), 13);
  for (auto _ : state) {
    auto env = gfd::hilbert_envelope(x);
    benchmark::DoNotOptimize(env.data());
  }
}
BENCHMARK(bm_hilbert_envelope)->RangeMultiplier(4)->Range(256, 16384);

}  // namespace

BENCHMARK_MAIN();
