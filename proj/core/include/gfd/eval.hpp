#ifndef GFD_EVAL_HPP
#define GFD_EVAL_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gfd/feature_matrix.hpp"
#include "gfd/model.hpp"

namespace gfd {

struct ConfusionMatrix {
  std::size_t k = 0;
  std::vector<long long> counts;  // k x k, rows = true label, cols = predicted

  long long at(std::size_t t, std::size_t p) const { return counts[t * k + p]; }
};

struct EvalReport {
  double accuracy = 0.0;
  std::vector<double> precision, recall, f1;  // per class
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  ConfusionMatrix confusion;
  bool zero_division = false;  // some class had an empty row or column
  bool has_cv = false;
  double cv_mean = 0.0;
  double cv_std = 0.0;  // population std over folds
  std::map<std::string, double> timing_s;
};

struct SplitIndices {
  std::vector<std::size_t> train, test;
};

// Per-class seeded shuffle; round(count * test_fraction) members of each class
// go to the test side. Every class needs at least 2 members.
SplitIndices stratified_split(std::span<const int> y, double test_fraction,
                              std::uint64_t seed);

// Per-class seeded shuffle, then round-robin fold assignment. k must not
// exceed the smallest class count. Returns k disjoint index sets.
std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> y, int k,
                                                       std::uint64_t seed);

// Labels must lie in [0, num_classes). Zero-denominator precision/recall are 0
// and flip zero_division.
EvalReport classification_report(std::span<const int> y_true, std::span<const int> y_pred,
                                 int num_classes);

struct CvResult {
  double mean = 0.0;
  double stddev = 0.0;  // population
  std::vector<EvalReport> folds;
};

CvResult cross_validate(const FeatureMatrix& z, std::span<const int> y,
                        const TrainConfig& cfg, int k, std::uint64_t seed);

// JSON object with accuracy, per-class arrays, confusion counts, macro and
// weighted F1, and cv_mean/cv_std when present. Timing is deliberately left
// out so reports from identical runs compare byte for byte.
std::string eval_report_json(const EvalReport& rep);

// One row per true class, one column per predicted class.
std::string confusion_csv(const ConfusionMatrix& c);

struct NoisePoint {
  double sigma = 0.0;
  double cv_mean = 0.0;
  double cv_std = 0.0;
};

// Cross-validation accuracy after adding N(0, sigma^2) noise to the features,
// one row per sigma. sigma = 0 reproduces the clean run exactly.
std::vector<NoisePoint> noise_sweep(const FeatureMatrix& z, std::span<const int> y,
                                    const TrainConfig& cfg, std::span<const double> sigmas,
                                    int k, std::uint64_t seed);

}  // namespace gfd

#endif
