#include "gfd/segmentation.hpp"

#include <algorithm>
#include <cmath>

#include "gfd/errors.hpp"
#include "gfd/spectral.hpp"

namespace gfd {

namespace {

// linear-interpolation quantile on a sorted copy
double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double rank = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(rank);
  if (lo + 1 >= v.size()) return v.back();
  const double frac = rank - static_cast<double>(lo);
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

double entropy_of_histogram(std::span<const double> values) {
  const std::size_t bins = freedman_diaconis_bins(values);
  const auto probs = histogram_probs(values, bins);
  return shannon_entropy(probs);
}

double entropy_of_psd(const Psd& psd) {
  double total = 0.0;
  for (double p : psd.power) total += p;
  std::vector<double> probs(psd.power.size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    probs[i] = psd.power[i] / (total + 1e-10);
  return shannon_entropy(probs);
}

std::size_t welch_len_for(std::size_t window) {
  return std::min<std::size_t>(256, window / 2);
}

// mean objective over the segments of one record for a fixed (window, step)
double candidate_score(const SignalRecord& signal, std::size_t window, std::size_t step,
                       const EntropyWeights& weights, std::size_t max_segments) {
  auto segments = segment_signal(signal, window, step);
  std::size_t count = segments.size();
  if (max_segments > 0) count = std::min(count, max_segments);

  EntropyProfile mean;
  for (std::size_t i = 0; i < count; ++i) {
    auto p = segment_entropies(segments[i], signal.sample_rate_hz);
    mean.h_amplitude += p.h_amplitude;
    mean.h_envelope += p.h_envelope;
    mean.h_spectrum += p.h_spectrum;
    mean.h_env_spectrum += p.h_env_spectrum;
  }
  const auto n = static_cast<double>(count);
  mean.h_amplitude /= n;
  mean.h_envelope /= n;
  mean.h_spectrum /= n;
  mean.h_env_spectrum /= n;
  return objective_score(mean, static_cast<double>(window), weights);
}

}  // namespace

std::size_t freedman_diaconis_bins(std::span<const double> samples) {
  if (samples.size() < 2) throw TooShort("freedman_diaconis_bins: need at least 2 samples");
  std::vector<double> v(samples.begin(), samples.end());
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  const double range = *mx - *mn;
  const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
  if (range <= 0.0 || iqr <= 0.0) return 1;
  const double h = 2.0 * iqr / std::cbrt(static_cast<double>(v.size()));
  const double bins = std::ceil(range / h);
  if (bins < 1.0) return 1;
  if (bins > 512.0) return 512;
  return static_cast<std::size_t>(bins);
}

std::vector<double> histogram_probs(std::span<const double> samples, std::size_t bins) {
  if (samples.empty()) throw TooShort("histogram_probs: empty input");
  if (bins == 0) throw Error("histogram_probs: bins must be positive");
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *mn, hi = *mx;
  const double denom = static_cast<double>(samples.size()) + 1e-10;
  if (hi == lo) return {static_cast<double>(samples.size()) / denom};

  std::vector<double> counts(bins, 0.0);
  const double scale = static_cast<double>(bins) / (hi - lo);
  for (double v : samples) {
    auto idx = static_cast<std::size_t>((v - lo) * scale);
    if (idx >= bins) idx = bins - 1;  // top edge belongs to the last bin
    counts[idx] += 1.0;
  }
  for (double& c : counts) c /= denom;
  return counts;
}

double shannon_entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw NegativeProbability("shannon_entropy");
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

EntropyProfile segment_entropies(const SegmentView& segment, double sample_rate_hz) {
  if (segment.rows < 32) throw TooShort("segment_entropies: need at least 32 rows");

  const std::size_t welch_len = welch_len_for(segment.rows);
  EntropyProfile acc;
  for (std::size_t c = 0; c < segment.channels; ++c) {
    const auto x = segment.channel(c);
    const auto env = hilbert_envelope(x);
    acc.h_amplitude += entropy_of_histogram(x);
    acc.h_envelope += entropy_of_histogram(env);
    acc.h_spectrum += entropy_of_psd(welch_psd(x, sample_rate_hz, welch_len));
    acc.h_env_spectrum += entropy_of_psd(welch_psd(env, sample_rate_hz, welch_len));
  }
  const auto ch = static_cast<double>(segment.channels);
  return {acc.h_amplitude / ch, acc.h_envelope / ch, acc.h_spectrum / ch,
          acc.h_env_spectrum / ch};
}

double objective_score(const EntropyProfile& profile, double window,
                       const EntropyWeights& weights) {
  const double h_t =
      weights.alpha_t * profile.h_amplitude + (1.0 - weights.alpha_t) * profile.h_envelope;
  const double h_f =
      weights.alpha_s * profile.h_spectrum + (1.0 - weights.alpha_s) * profile.h_env_spectrum;
  return (weights.alpha * h_t + (1.0 - weights.alpha) * h_f) / std::log1p(window);
}

SegmentationParams optimize_window(const SignalRecord& signal, const SearchSpace& space,
                                   const EntropyWeights& weights, std::size_t max_segments) {
  if (space.window_sizes.empty() || space.overlap_ratios.empty())
    throw EmptySearchSpace("optimize_window");
  for (std::size_t w : space.window_sizes) {
    if (w > signal.rows)
      throw WindowExceedsSignal("optimize_window: window " + std::to_string(w) +
                                " > signal rows " + std::to_string(signal.rows));
  }

  SegmentationParams best;
  bool found = false;
  for (std::size_t w : space.window_sizes) {
    for (double rho : space.overlap_ratios) {
      const auto step = std::max<std::size_t>(
          1, static_cast<std::size_t>(static_cast<double>(w) * (1.0 - rho)));
      if ((signal.rows - w) / step < 1) continue;  // candidate yields no segments
      const double score = candidate_score(signal, w, step, weights, max_segments);
      const bool better =
          !found || score > best.score ||
          (score == best.score && (w < best.window || (w == best.window && step < best.step)));
      if (better) {
        best = {w, step, score};
        found = true;
      }
    }
  }
  if (!found) throw NoSegments("optimize_window: no candidate produced segments");
  return best;
}

SegmentationParams optimize_window_dataset(const DatasetManifest& dataset,
                                           const SearchSpace& space,
                                           const EntropyWeights& weights,
                                           std::size_t max_segments) {
  if (dataset.records.empty()) throw EmptySearchSpace("optimize_window_dataset: no records");
  if (space.window_sizes.empty() || space.overlap_ratios.empty())
    throw EmptySearchSpace("optimize_window_dataset");
  for (const auto& rec : dataset.records) {
    for (std::size_t w : space.window_sizes) {
      if (w > rec.rows)
        throw WindowExceedsSignal("optimize_window_dataset: window " + std::to_string(w) +
                                  " > record rows " + std::to_string(rec.rows));
    }
  }

  SegmentationParams best;
  bool found = false;
  for (std::size_t w : space.window_sizes) {
    for (double rho : space.overlap_ratios) {
      const auto step = std::max<std::size_t>(
          1, static_cast<std::size_t>(static_cast<double>(w) * (1.0 - rho)));
      double sum = 0.0;
      std::size_t scored = 0;
      for (const auto& rec : dataset.records) {
        if ((rec.rows - w) / step < 1) continue;
        sum += candidate_score(rec, w, step, weights, max_segments);
        ++scored;
      }
      if (scored == 0) continue;
      const double score = sum / static_cast<double>(scored);
      const bool better =
          !found || score > best.score ||
          (score == best.score && (w < best.window || (w == best.window && step < best.step)));
      if (better) {
        best = {w, step, score};
        found = true;
      }
    }
  }
  if (!found) throw NoSegments("optimize_window_dataset: no candidate produced segments");
  return best;
}

std::vector<SegmentView> segment_signal(const SignalRecord& signal, std::size_t window,
                                        std::size_t step) {
  if (window == 0 || step == 0) throw Error("segment_signal: window and step must be positive");
  if (window > signal.rows)
    throw WindowExceedsSignal("segment_signal: window " + std::to_string(window) +
                              " > signal rows " + std::to_string(signal.rows));
  const std::size_t count = (signal.rows - window) / step;
  if (count < 1) throw NoSegments("segment_signal: signal yields no segments");

  std::vector<SegmentView> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(SegmentView{signal.samples.data() + i * step * signal.channels, window,
                              signal.channels});
  }
  return out;
}

}  // namespace gfd
