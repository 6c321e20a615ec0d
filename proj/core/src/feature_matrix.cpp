#include "gfd/feature_matrix.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gfd/errors.hpp"
#include "gfd/rng.hpp"

namespace gfd {

FeatureMatrix select_rows(const FeatureMatrix& m, std::span<const std::size_t> rows) {
  FeatureMatrix out;
  out.cols = m.cols;
  out.names = m.names;
  out.rows = rows.size();
  out.values.reserve(rows.size() * m.cols);
  for (std::size_t r : rows) {
    const auto row = m.row(r);
    out.values.insert(out.values.end(), row.begin(), row.end());
    if (!m.labels.empty()) out.labels.push_back(m.labels[r]);
    if (!m.segment_meta.empty()) out.segment_meta.push_back(m.segment_meta[r]);
  }
  return out;
}

Standardizer standardize_fit(const FeatureMatrix& m, std::span<const std::size_t> fit_rows) {
  if (fit_rows.empty()) throw EmptyFitSet("standardize_fit");
  Standardizer s;
  s.means.assign(m.cols, 0.0);
  s.stds.assign(m.cols, 0.0);
  const auto n = static_cast<double>(fit_rows.size());
  for (std::size_t r : fit_rows)
    for (std::size_t c = 0; c < m.cols; ++c) s.means[c] += m.at(r, c);
  for (std::size_t c = 0; c < m.cols; ++c) s.means[c] /= n;
  for (std::size_t r : fit_rows)
    for (std::size_t c = 0; c < m.cols; ++c) {
      const double d = m.at(r, c) - s.means[c];
      s.stds[c] += d * d;
    }
  for (std::size_t c = 0; c < m.cols; ++c) s.stds[c] = std::sqrt(s.stds[c] / n);
  return s;
}

FeatureMatrix standardize_apply(const FeatureMatrix& m, const Standardizer& s) {
  if (s.means.size() != m.cols || s.stds.size() != m.cols)
    throw DimensionMismatch("standardize_apply: standardizer has " +
                            std::to_string(s.means.size()) + " columns, matrix has " +
                            std::to_string(m.cols));
  FeatureMatrix out = m;
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) {
      out.at(r, c) = s.stds[c] < 1e-12 ? 0.0 : (m.at(r, c) - s.means[c]) / s.stds[c];
    }
  return out;
}

FeatureMatrix inject_feature_noise(const FeatureMatrix& m, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw NegativeSigma("inject_feature_noise");
  FeatureMatrix out = m;
  if (sigma == 0.0) return out;
  Rng rng(seed);
  for (double& v : out.values) v += sigma * rng.gaussian();
  return out;
}

void write_feature_csv(const FeatureMatrix& m, const std::filesystem::path& path) {
  std::ostringstream text;
  for (std::size_t c = 0; c < m.cols; ++c) {
    if (c) text << ',';
    text << m.names.at(c);
  }
  text << ",label\n";
  char buf[64];
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (c) text << ',';
      int len = std::snprintf(buf, sizeof buf, "%.17g", m.at(r, c));
      text.write(buf, len);
    }
    text << ',' << (m.labels.empty() ? 0 : m.labels[r]) << '\n';
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << text.str();
  }
  std::filesystem::rename(tmp, path);
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("read_feature_csv: cannot open " + path.string());

  FeatureMatrix m;
  std::string line;
  if (!std::getline(in, line)) throw EmptyFile(path.string());
  {
    std::stringstream hdr(line);
    std::string field;
    while (std::getline(hdr, field, ',')) {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      m.names.push_back(field);
    }
  }
  if (m.names.empty() || m.names.back() != "label")
    throw MalformedRow(path.string() + ": last header column must be 'label'");
  m.names.pop_back();
  m.cols = m.names.size();

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::stringstream row(line);
    std::string field;
    std::vector<double> vals;
    while (std::getline(row, field, ',')) {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      double v = 0.0;
      auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw MalformedRow(path.string() + ":" + std::to_string(lineno));
      vals.push_back(v);
    }
    if (vals.size() != m.cols + 1)
      throw MalformedRow(path.string() + ":" + std::to_string(lineno) + ": field count");
    m.values.insert(m.values.end(), vals.begin(), vals.end() - 1);
    m.labels.push_back(static_cast<int>(std::llround(vals.back())));
    ++m.rows;
  }
  return m;
}

}  // namespace gfd
