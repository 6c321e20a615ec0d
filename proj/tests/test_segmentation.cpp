#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gfd/errors.hpp"
#include "gfd/rng.hpp"
#include "gfd/segmentation.hpp"
#include "test_support.hpp"

using test_support::make_record;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> iota_samples(std::size_t n) {
  std::vector<double> v(n);
  std::iota(v.begin(), v.end(), 0.0);
  return v;
}

gfd::SegmentView view_of(const gfd::SignalRecord& rec) {
  return {rec.samples.data(), rec.rows, rec.channels};
}

}  // namespace

TEST_CASE("freedman-diaconis bin counts") {
  CHECK(gfd::freedman_diaconis_bins(std::vector<double>(50, 3.0)) == 1);

  // {0..999}: range 999, interpolated iqr 499.5, h = 999/10 = 99.9,
  // ceil(999/99.9) = ceil(10.009) = 11
  CHECK(gfd::freedman_diaconis_bins(iota_samples(1000)) == 11);

  // {0,1}: range 1, iqr 0.5, h = 1/cbrt(2), ceil(1.2599) = 2
  CHECK(gfd::freedman_diaconis_bins(std::vector<double>{0.0, 1.0}) == 2);

  // zero iqr with nonzero range falls back to 1
  CHECK(gfd::freedman_diaconis_bins(std::vector<double>{5, 5, 5, 5, 7}) == 1);

  // huge range against a tight iqr hits the upper clamp
  gfd::Rng rng(3);
  std::vector<double> wide(98);
  for (auto& v : wide) v = rng.uniform();
  wide.push_back(1e6);
  wide.push_back(-1e6);
  CHECK(gfd::freedman_diaconis_bins(wide) == 512);

  CHECK_THROWS_AS(gfd::freedman_diaconis_bins(std::vector<double>{1.0}), gfd::TooShort);
}

TEST_CASE("freedman-diaconis stays inside [1, 512] for arbitrary inputs") {
  gfd::Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(500);
    std::vector<double> v(n);
    const double scale = std::exp(10.0 * (rng.uniform() - 0.5));
    for (auto& x : v) {
      x = scale * rng.gaussian();
      if (rng.uniform() < 0.05) x *= 1e4;  // occasional heavy tail
    }
    const auto bins = gfd::freedman_diaconis_bins(v);
    CHECK(bins >= 1);
    CHECK(bins <= 512);
  }
}

TEST_CASE("histogram probabilities") {
  const auto single = gfd::histogram_probs(std::vector<double>(8, 2.5), 3);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == doctest::Approx(1.0).epsilon(1e-9));

  const auto sym = gfd::histogram_probs(std::vector<double>{0, 0, 1, 1}, 2);
  REQUIRE(sym.size() == 2);
  CHECK(sym[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(sym[1] == doctest::Approx(0.5).epsilon(1e-9));

  // 0.5 lands in the upper half of [0,1] split in two; the max clamps into the top bin
  const auto thirds = gfd::histogram_probs(std::vector<double>{0.0, 0.5, 1.0}, 2);
  REQUIRE(thirds.size() == 2);
  CHECK(thirds[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(thirds[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));

  // mass sums to n/(n+1e-10)
  double total = 0.0;
  for (double p : sym) total += p;
  CHECK(total == doctest::Approx(4.0 / (4.0 + 1e-10)).epsilon(1e-15));
}

TEST_CASE("histogram of uniform samples is near-flat") {
  gfd::Rng rng(5);
  std::vector<double> v(10000);
  for (auto& x : v) x = rng.uniform();
  const auto probs = gfd::histogram_probs(v, 10);
  REQUIRE(probs.size() == 10);
  for (double p : probs) CHECK(std::fabs(p - 0.1) < 0.02);
}

TEST_CASE("shannon entropy identities") {
  CHECK(gfd::shannon_entropy(std::vector<double>{1.0, 0.0, 0.0}) == 0.0);
  CHECK(gfd::shannon_entropy(std::vector<double>{0.25, 0.25, 0.25, 0.25}) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(gfd::shannon_entropy(std::vector<double>{0.5, 0.5}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // zero entries contribute nothing
  CHECK(gfd::shannon_entropy(std::vector<double>{0.5, 0.5, 0.0}) ==
        gfd::shannon_entropy(std::vector<double>{0.5, 0.5}));
  CHECK_THROWS_AS(gfd::shannon_entropy(std::vector<double>{0.5, -0.1}),
                  gfd::NegativeProbability);
}

TEST_CASE("shannon entropy never exceeds ln of the support size") {
  gfd::Rng rng(29);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 2 + rng.below(63);
    std::vector<double> p(k);
    double total = 0.0;
    for (auto& x : p) {
      x = rng.uniform() + 1e-12;
      total += x;
    }
    for (auto& x : p) x /= total;
    CHECK(gfd::shannon_entropy(p) <= std::log(static_cast<double>(k)) + 1e-9);
  }
}

TEST_CASE("segment entropies of a constant segment are near zero in the time domain") {
  const auto rec = make_record(std::vector<double>(64, 1.5), 1, 1000.0);
  const auto prof = gfd::segment_entropies(view_of(rec), 1000.0);
  CHECK(prof.h_amplitude < 1e-9);
  CHECK(prof.h_envelope < 1e-9);
}

TEST_CASE("segment entropies separate tones from noise in the spectrum") {
  const std::size_t n = 4096;
  const double fs = 8192.0;
  std::vector<double> sine(n);
  for (std::size_t i = 0; i < n; ++i)
    sine[i] = std::sin(2.0 * kPi * 500.0 * static_cast<double>(i) / fs);
  gfd::Rng rng(37);
  std::vector<double> noise(n);
  for (auto& v : noise) v = rng.gaussian();

  const auto rec_sine = make_record(std::move(sine), 1, fs);
  const auto rec_noise = make_record(std::move(noise), 1, fs);
  const auto ps = gfd::segment_entropies(view_of(rec_sine), fs);
  const auto pn = gfd::segment_entropies(view_of(rec_noise), fs);
  CHECK(ps.h_spectrum < pn.h_spectrum);

  // near-flat psd: welch length min(256, n/2) = 256 gives 129 bins
  CHECK(pn.h_spectrum >= 0.9 * std::log(129.0));
}

TEST_CASE("amplitude entropy is invariant under constant offset") {
  gfd::Rng rng(43);
  std::vector<double> x(256), y(256);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.gaussian();
    y[i] = x[i] + 5.0;
  }
  const auto a = gfd::segment_entropies(view_of(make_record(std::move(x), 1, 1000.0)), 1000.0);
  const auto b = gfd::segment_entropies(view_of(make_record(std::move(y), 1, 1000.0)), 1000.0);
  CHECK(a.h_amplitude == doctest::Approx(b.h_amplitude).epsilon(1e-9));
}

TEST_CASE("segment entropies require 32 rows") {
  const auto rec = make_record(std::vector<double>(31, 1.0), 1, 100.0);
  CHECK_THROWS_AS(gfd::segment_entropies(view_of(rec), 100.0), gfd::TooShort);
}

TEST_CASE("objective score formula identities") {
  const gfd::EntropyWeights w{};
  gfd::EntropyProfile ones{1.0, 1.0, 1.0, 1.0};
  // denominator ln(1+omega) = 1 at omega = e-1
  CHECK(gfd::objective_score(ones, std::exp(1.0) - 1.0, w) ==
        doctest::Approx(1.0).epsilon(1e-12));

  gfd::EntropyProfile amp_only{2.0, 0.0, 0.0, 0.0};
  const gfd::EntropyWeights all_time{1.0, 1.0, 0.5};
  CHECK(gfd::objective_score(amp_only, 1.0, all_time) ==
        doctest::Approx(2.0 / std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("objective score ignores time entropies when alpha is zero") {
  gfd::EntropyWeights w{0.0, 0.5, 0.5};
  gfd::EntropyProfile a{1.0, 2.0, 0.7, 0.9};
  gfd::EntropyProfile b{9.0, -3.0, 0.7, 0.9};
  CHECK(gfd::objective_score(a, 512.0, w) == gfd::objective_score(b, 512.0, w));
}

TEST_CASE("objective score decreases as the window grows, profile fixed") {
  const gfd::EntropyWeights w{};
  gfd::EntropyProfile p{1.3, 0.8, 2.1, 1.7};
  double prev = gfd::objective_score(p, 128.0, w);
  for (double omega : {256.0, 512.0, 1024.0, 4096.0}) {
    const double cur = gfd::objective_score(p, omega, w);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("optimize_window returns the only candidate of a singleton space") {
  gfd::Rng rng(53);
  std::vector<double> x(4096);
  for (auto& v : x) v = rng.gaussian();
  const auto rec = make_record(std::move(x), 1, 8192.0);

  gfd::SearchSpace space;
  space.window_sizes = {512};
  space.overlap_ratios = {0.5};
  const auto params = gfd::optimize_window(rec, space, gfd::EntropyWeights{});
  CHECK(params.window == 512);
  CHECK(params.step == 256);
}

TEST_CASE("optimize_window prefers windows that span an impulse period") {
  // impulses every 400 samples: a 128 window usually sees none
  gfd::Rng rng(59);
  std::vector<double> x(8192);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = 0.1 * rng.gaussian();
    if (i % 400 == 0) x[i] += 5.0;
  }
  const auto rec = make_record(std::move(x), 1, 8192.0);

  gfd::SearchSpace space;
  space.window_sizes = {128, 512, 2048};
  space.overlap_ratios = {0.5};
  const auto params = gfd::optimize_window(rec, space, gfd::EntropyWeights{});
  CHECK(params.window >= 512);
}

TEST_CASE("optimize_window is deterministic and validates the space") {
  gfd::Rng rng(61);
  std::vector<double> x(4096);
  for (auto& v : x) v = rng.gaussian();
  const auto rec = make_record(std::move(x), 1, 8192.0);

  const auto a = gfd::optimize_window(rec, gfd::SearchSpace{}, gfd::EntropyWeights{});
  const auto b = gfd::optimize_window(rec, gfd::SearchSpace{}, gfd::EntropyWeights{});
  CHECK(a.window == b.window);
  CHECK(a.step == b.step);
  CHECK(a.score == b.score);

  gfd::SearchSpace empty;
  empty.window_sizes.clear();
  CHECK_THROWS_AS(gfd::optimize_window(rec, empty, gfd::EntropyWeights{}),
                  gfd::EmptySearchSpace);

  gfd::SearchSpace too_big;
  too_big.window_sizes = {8192};
  too_big.overlap_ratios = {0.5};
  const auto small = make_record(std::vector<double>(1000, 0.0), 1, 100.0);
  CHECK_THROWS_AS(gfd::optimize_window(small, too_big, gfd::EntropyWeights{}),
                  gfd::WindowExceedsSignal);
}

TEST_CASE("optimize_window_dataset averages record scores deterministically") {
  gfd::Rng rng(67);
  gfd::DatasetManifest ds;
  for (int r = 0; r < 2; ++r) {
    std::vector<double> x(4096);
    for (auto& v : x) v = rng.gaussian();
    ds.records.push_back(make_record(std::move(x), 1, 8192.0, r));
  }
  gfd::SearchSpace space;
  space.window_sizes = {256, 512};
  space.overlap_ratios = {0.5};
  const auto a = gfd::optimize_window_dataset(ds, space, gfd::EntropyWeights{});
  const auto b = gfd::optimize_window_dataset(ds, space, gfd::EntropyWeights{});
  CHECK(a.window == b.window);
  CHECK(a.step == b.step);
  CHECK(a.score == doctest::Approx(b.score).epsilon(1e-15));

  gfd::DatasetManifest one;
  one.records.push_back(ds.records[0]);
  const auto single = gfd::optimize_window_dataset(one, space, gfd::EntropyWeights{});
  const auto direct = gfd::optimize_window(ds.records[0], space, gfd::EntropyWeights{});
  CHECK(single.window == direct.window);
  CHECK(single.score == doctest::Approx(direct.score).epsilon(1e-15));
}

TEST_CASE("segment_signal count formula and offsets") {
  const auto rec = make_record(iota_samples(10), 1, 10.0);
  const auto segs = gfd::segment_signal(rec, 4, 2);
  REQUIRE(segs.size() == 3);  // floor((10-4)/2)
  for (std::size_t i = 0; i < segs.size(); ++i) {
    CHECK(segs[i].rows == 4);
    CHECK(segs[i].data == rec.samples.data() + i * 2);
    CHECK(segs[i].at(0, 0) == static_cast<double>(i * 2));
  }

  // floor((10-10)/1) = 0 segments
  CHECK_THROWS_AS(gfd::segment_signal(rec, 10, 1), gfd::NoSegments);
  CHECK_THROWS_AS(gfd::segment_signal(rec, 11, 1), gfd::WindowExceedsSignal);
}

TEST_CASE("segment_signal arithmetic at scale") {
  const std::size_t n = 4753 * 64;
  const auto rec = make_record(std::vector<double>(n, 0.0), 1, 1.0);
  const auto segs = gfd::segment_signal(rec, 2048, 1228);
  CHECK(segs.size() == (n - 2048) / 1228);
  CHECK(segs.size() == 246);
}

TEST_CASE("segments tile the signal") {
  const auto rec = make_record(iota_samples(1000), 1, 1.0);
  const auto segs = gfd::segment_signal(rec, 128, 37);
  REQUIRE(!segs.empty());
  for (std::size_t i = 0; i < segs.size(); ++i) {
    CHECK(segs[i].at(0, 0) == rec.at(i * 37, 0));
    CHECK(segs[i].at(127, 0) == rec.at(i * 37 + 127, 0));
  }
}
