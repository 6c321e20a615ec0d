#ifndef GFD_FEATURE_MATRIX_HPP
#define GFD_FEATURE_MATRIX_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gfd {

struct FeatureVector {
  std::vector<double> values;
  std::vector<std::string> names;
};

// Row-major [rows x cols]. labels is empty or one label per row. segment_meta
// is empty or one (record index, segment index) per row.
struct FeatureMatrix {
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::string> names;
  std::vector<int> labels;
  std::vector<std::pair<std::int32_t, std::int32_t>> segment_meta;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * cols, cols};
  }
};

// Per-column mean and population standard deviation.
struct Standardizer {
  std::vector<double> means;
  std::vector<double> stds;
};

// Copy of the given rows, in order, with labels and segment_meta subset along.
FeatureMatrix select_rows(const FeatureMatrix& m, std::span<const std::size_t> rows);

Standardizer standardize_fit(const FeatureMatrix& m, std::span<const std::size_t> fit_rows);

// (x - mean) / std per column; columns with std < 1e-12 map to 0.
FeatureMatrix standardize_apply(const FeatureMatrix& m, const Standardizer& s);

// Adds N(0, sigma^2) noise elementwise. sigma == 0 returns the input unchanged.
FeatureMatrix inject_feature_noise(const FeatureMatrix& m, double sigma, std::uint64_t seed);

// Header is the column names plus "label"; rows carry 17-significant-digit values.
void write_feature_csv(const FeatureMatrix& m, const std::filesystem::path& path);
FeatureMatrix read_feature_csv(const std::filesystem::path& path);

}  // namespace gfd

#endif
