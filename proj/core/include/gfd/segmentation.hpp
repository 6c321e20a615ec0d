#ifndef GFD_SEGMENTATION_HPP
#define GFD_SEGMENTATION_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "gfd/signal.hpp"

namespace gfd {

struct EntropyWeights {
  double alpha = 0.5;    // time vs frequency mix
  double alpha_t = 0.5;  // amplitude vs envelope
  double alpha_s = 0.5;  // spectrum vs envelope spectrum
};

struct SearchSpace {
  std::vector<std::size_t> window_sizes{256, 512, 1024, 2048, 4096};
  std::vector<double> overlap_ratios{0.0, 0.25, 0.4, 0.5, 0.75};
};

struct SegmentationParams {
  std::size_t window = 0;
  std::size_t step = 0;
  double score = 0.0;  // objective at the optimum
};

// Mean of the four entropy terms over a segment's channels.
struct EntropyProfile {
  double h_amplitude = 0.0;     // raw amplitude histogram
  double h_envelope = 0.0;      // envelope histogram
  double h_spectrum = 0.0;      // normalized Welch PSD
  double h_env_spectrum = 0.0;  // normalized Welch PSD of the envelope
};

// Freedman-Diaconis bin count: ceil(range / (2 * IQR * n^(-1/3))), clamped to
// [1, 512]. Quartiles use linear interpolation. Returns 1 when IQR or range is 0.
std::size_t freedman_diaconis_bins(std::span<const double> samples);

// Equal-width histogram over [min, max]; p_i = count_i / (n + 1e-10). Collapses
// to a single bin when min == max.
std::vector<double> histogram_probs(std::span<const double> samples, std::size_t bins);

// -sum p ln p over positive entries. Entries must be non-negative.
double shannon_entropy(std::span<const double> probs);

// Segment must have at least 32 rows.
EntropyProfile segment_entropies(const SegmentView& segment, double sample_rate_hz);

// (alpha*H_t + (1-alpha)*H_f) / ln(1+window) with H_t = alpha_t*H_a +
// (1-alpha_t)*H_e and H_f = alpha_s*H_s + (1-alpha_s)*H_es.
double objective_score(const EntropyProfile& profile, double window,
                       const EntropyWeights& weights);

// Grid search over window_sizes x overlap_ratios; step = max(1,
// floor(window*(1-ratio))). Maximizes the mean objective over all segments;
// ties prefer the smaller window, then the smaller step. max_segments caps how
// many leading segments are scored per candidate (0 = all).
SegmentationParams optimize_window(const SignalRecord& signal, const SearchSpace& space,
                                   const EntropyWeights& weights,
                                   std::size_t max_segments = 0);

// Candidate scores averaged across all records of a dataset.
SegmentationParams optimize_window_dataset(const DatasetManifest& dataset,
                                           const SearchSpace& space,
                                           const EntropyWeights& weights,
                                           std::size_t max_segments = 0);

// floor((rows - window) / step) segments at offsets 0, step, 2*step, ...
std::vector<SegmentView> segment_signal(const SignalRecord& signal, std::size_t window,
                                        std::size_t step);

}  // namespace gfd

#endif
