#ifndef GFD_FEATURES_HPP
#define GFD_FEATURES_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "gfd/feature_matrix.hpp"
#include "gfd/signal.hpp"

namespace gfd {

inline constexpr std::size_t kFeaturesPerChannel = 20;

// Frozen per-channel feature order. Channel suffixes are 1-based: "rms@1".
std::vector<std::string> feature_names(std::size_t channels);

// 20 features per channel: mean, median, std, skewness, kurtosis, rms, peak,
// tkeo, fft_mean, fft_std, fft_low, fft_mid, fft_high, psd_sum, psd_peak,
// psd_low, psd_mid, psd_high, env_fft_mean, env_fft_std. Bands split [0, fs/2]
// at fs/6 and fs/3; a bin exactly on a boundary counts toward the lower band.
FeatureVector extract_segment_features(const SegmentView& segment, double sample_rate_hz);

struct ExtractionParams {
  std::size_t window = 0;
  std::size_t step = 0;
};

// Features for every segment of every record, in record order then segment
// order. Labels come from the records; segment_meta tracks (record, segment).
FeatureMatrix extract_all(const DatasetManifest& dataset, const ExtractionParams& params);

}  // namespace gfd

#endif
