#include "gfd/features.hpp"

#include <algorithm>
#include <cmath>

#include "gfd/errors.hpp"
#include "gfd/segmentation.hpp"
#include "gfd/spectral.hpp"

namespace gfd {

namespace {

const char* kFeatureStems[kFeaturesPerChannel] = {
    "mean",    "median",  "std",     "skewness", "kurtosis",
    "rms",     "peak",    "tkeo",    "fft_mean", "fft_std",
    "fft_low", "fft_mid", "fft_high", "psd_sum", "psd_peak",
    "psd_low", "psd_mid", "psd_high", "env_fft_mean", "env_fft_std"};

struct Moments {
  double mean, stddev, skewness, kurtosis;
};

Moments central_moments(const std::vector<double>& x) {
  const auto n = static_cast<double>(x.size());
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  if (*mn == *mx) return {*mn, 0.0, 0.0, 0.0};  // constant channel, exact

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 <= 0.0) return {mean, 0.0, 0.0, 0.0};
  const double sd = std::sqrt(m2);
  return {mean, sd, m3 / (m2 * sd), m4 / (m2 * m2)};
}

double median_of(std::vector<double> x) {
  const std::size_t n = x.size();
  auto mid = x.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(x.begin(), mid, x.end());
  if (n % 2 == 1) return *mid;
  double hi = *mid;
  double lo = *std::max_element(x.begin(), mid);
  return (lo + hi) / 2.0;
}

struct MeanStd {
  double mean, stddev;
};

MeanStd mean_std(std::span<const double> x) {
  const auto n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double m2 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
  }
  return {mean, std::sqrt(m2 / n)};
}

// band sums over [0, fs/6], (fs/6, fs/3], (fs/3, fs/2]; boundaries to the lower band
void band_sums(std::span<const double> freqs, std::span<const double> values, double fs,
               double out[3]) {
  const double b1 = fs / 6.0, b2 = fs / 3.0;
  out[0] = out[1] = out[2] = 0.0;
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    if (freqs[k] <= b1)
      out[0] += values[k];
    else if (freqs[k] <= b2)
      out[1] += values[k];
    else
      out[2] += values[k];
  }
}

}  // namespace

std::vector<std::string> feature_names(std::size_t channels) {
  std::vector<std::string> names;
  names.reserve(channels * kFeaturesPerChannel);
  for (std::size_t c = 1; c <= channels; ++c) {
    for (const char* stem : kFeatureStems) {
      names.push_back(std::string(stem) + "@" + std::to_string(c));
    }
  }
  return names;
}

FeatureVector extract_segment_features(const SegmentView& segment, double sample_rate_hz) {
  if (segment.rows < 32) throw TooShort("extract_segment_features: need at least 32 rows");

  FeatureVector fv;
  fv.names = feature_names(segment.channels);
  fv.values.reserve(segment.channels * kFeaturesPerChannel);

  const std::size_t welch_len = std::min<std::size_t>(256, segment.rows / 2);

  for (std::size_t c = 0; c < segment.channels; ++c) {
    const auto x = segment.channel(c);
    for (double v : x) {
      if (!std::isfinite(v)) throw NonFinite("extract_segment_features");
    }

    const auto mom = central_moments(x);
    double sumsq = 0.0, peak = 0.0;
    for (double v : x) {
      sumsq += v * v;
      peak = std::max(peak, std::fabs(v));
    }
    const double rms = std::sqrt(sumsq / static_cast<double>(x.size()));
    const double tkeo = teager_kaiser_energy(x);

    const auto spec = fft_magnitude(x, sample_rate_hz);
    const auto fft_ms = mean_std(spec.magnitudes);
    double fft_bands[3];
    band_sums(spec.freqs_hz, spec.magnitudes, sample_rate_hz, fft_bands);

    const auto psd = welch_psd(x, sample_rate_hz, welch_len);
    double psd_sum = 0.0, psd_peak = 0.0;
    for (double p : psd.power) {
      psd_sum += p;
      psd_peak = std::max(psd_peak, p);
    }
    double psd_bands[3];
    band_sums(psd.freqs_hz, psd.power, sample_rate_hz, psd_bands);

    const auto env = hilbert_envelope(x);
    const auto env_spec = fft_magnitude(env, sample_rate_hz);
    const auto env_ms = mean_std(env_spec.magnitudes);

    const double vals[kFeaturesPerChannel] = {
        mom.mean,     median_of(x), mom.stddev,  mom.skewness, mom.kurtosis,
        rms,          peak,         tkeo,        fft_ms.mean,  fft_ms.stddev,
        fft_bands[0], fft_bands[1], fft_bands[2], psd_sum,     psd_peak,
        psd_bands[0], psd_bands[1], psd_bands[2], env_ms.mean, env_ms.stddev};
    fv.values.insert(fv.values.end(), vals, vals + kFeaturesPerChannel);
  }
  return fv;
}

FeatureMatrix extract_all(const DatasetManifest& dataset, const ExtractionParams& params) {
  if (dataset.records.empty()) throw DataError("extract_all: empty dataset");
  const std::size_t channels = dataset.records.front().channels;
  for (const auto& rec : dataset.records) {
    if (rec.channels != channels)
      throw DimensionMismatch("extract_all: records disagree on channel count");
  }

  FeatureMatrix m;
  m.cols = channels * kFeaturesPerChannel;
  m.names = feature_names(channels);

  for (std::size_t ri = 0; ri < dataset.records.size(); ++ri) {
    const auto& rec = dataset.records[ri];
    const auto segments = segment_signal(rec, params.window, params.step);
    for (std::size_t si = 0; si < segments.size(); ++si) {
      auto fv = extract_segment_features(segments[si], rec.sample_rate_hz);
      m.values.insert(m.values.end(), fv.values.begin(), fv.values.end());
      m.labels.push_back(rec.label);
      m.segment_meta.emplace_back(static_cast<std::int32_t>(ri),
                                  static_cast<std::int32_t>(si));
      ++m.rows;
    }
  }
  return m;
}

}  // namespace gfd
