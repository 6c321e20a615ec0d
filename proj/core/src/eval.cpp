#include "gfd/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "gfd/errors.hpp"
#include "gfd/rng.hpp"

namespace gfd {

namespace {

std::map<int, std::vector<std::size_t>> by_class(std::span<const int> y) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < y.size(); ++i) groups[y[i]].push_back(i);
  return groups;
}

}  // namespace

SplitIndices stratified_split(std::span<const int> y, double test_fraction,
                              std::uint64_t seed) {
  if (y.empty()) throw DataError("stratified_split: empty labels");
  if (test_fraction < 0.0 || test_fraction > 1.0)
    throw ConfigError("stratified_split: test_fraction outside [0, 1]");

  Rng rng(seed);
  SplitIndices out;
  for (auto& [label, members] : by_class(y)) {
    if (members.size() < 2)
      throw ClassTooSmall("stratified_split: class " + std::to_string(label) +
                          " has fewer than 2 members");
    rng.shuffle(members);
    const auto test_count = static_cast<std::size_t>(
        std::llround(static_cast<double>(members.size()) * test_fraction));
    for (std::size_t i = 0; i < members.size(); ++i) {
      (i < test_count ? out.test : out.train).push_back(members[i]);
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> y, int k,
                                                       std::uint64_t seed) {
  if (k < 2) throw KTooLarge("stratified_kfold: k must be at least 2");
  auto groups = by_class(y);
  for (const auto& [label, members] : groups) {
    if (members.size() < static_cast<std::size_t>(k))
      throw KTooLarge("stratified_kfold: class " + std::to_string(label) + " has " +
                      std::to_string(members.size()) + " members, k=" + std::to_string(k));
  }

  Rng rng(seed);
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  for (auto& [label, members] : groups) {
    rng.shuffle(members);
    for (std::size_t i = 0; i < members.size(); ++i) {
      folds[i % static_cast<std::size_t>(k)].push_back(members[i]);
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

EvalReport classification_report(std::span<const int> y_true, std::span<const int> y_pred,
                                 int num_classes) {
  if (y_true.size() != y_pred.size()) throw LengthMismatch("classification_report");
  if (y_true.empty()) throw DataError("classification_report: empty input");
  if (num_classes < 1) throw ConfigError("classification_report: num_classes must be positive");

  const auto k = static_cast<std::size_t>(num_classes);
  EvalReport rep;
  rep.confusion.k = k;
  rep.confusion.counts.assign(k * k, 0);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    if (t < 0 || t >= num_classes || p < 0 || p >= num_classes)
      throw DataError("classification_report: label outside [0, num_classes)");
    ++rep.confusion.counts[static_cast<std::size_t>(t) * k + static_cast<std::size_t>(p)];
  }

  const auto total = static_cast<double>(y_true.size());
  double trace = 0.0;
  rep.precision.assign(k, 0.0);
  rep.recall.assign(k, 0.0);
  rep.f1.assign(k, 0.0);
  double weighted = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    trace += static_cast<double>(rep.confusion.at(c, c));
    double row = 0.0, col = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      row += static_cast<double>(rep.confusion.at(c, j));
      col += static_cast<double>(rep.confusion.at(j, c));
    }
    const auto diag = static_cast<double>(rep.confusion.at(c, c));
    if (col > 0.0) {
      rep.precision[c] = diag / col;
    } else {
      rep.zero_division = true;
    }
    if (row > 0.0) {
      rep.recall[c] = diag / row;
    } else {
      rep.zero_division = true;
    }
    const double pr = rep.precision[c] + rep.recall[c];
    rep.f1[c] = pr > 0.0 ? 2.0 * rep.precision[c] * rep.recall[c] / pr : 0.0;
    rep.macro_f1 += rep.f1[c];
    weighted += row * rep.f1[c];
  }
  rep.accuracy = trace / total;
  rep.macro_f1 /= static_cast<double>(k);
  rep.weighted_f1 = weighted / total;
  return rep;
}

CvResult cross_validate(const FeatureMatrix& z, std::span<const int> y,
                        const TrainConfig& cfg, int k, std::uint64_t seed) {
  if (y.size() != z.rows) throw LengthMismatch("cross_validate");
  const auto folds = stratified_kfold(y, k, seed);

  int num_classes = 0;
  for (int c : y) num_classes = std::max(num_classes, c + 1);

  CvResult res;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::size_t> train_rows;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(train_rows.begin(), train_rows.end());

    auto train_z = select_rows(z, train_rows);
    std::vector<int> train_y;
    train_y.reserve(train_rows.size());
    for (std::size_t r : train_rows) train_y.push_back(y[r]);

    auto test_z = select_rows(z, folds[f]);
    std::vector<int> test_y;
    test_y.reserve(folds[f].size());
    for (std::size_t r : folds[f]) test_y.push_back(y[r]);

    const auto model = train_model(train_z, train_y, cfg);
    const auto pred = predict(model, test_z);
    res.folds.push_back(classification_report(test_y, pred.labels, num_classes));
  }

  for (const auto& rep : res.folds) res.mean += rep.accuracy;
  res.mean /= static_cast<double>(res.folds.size());
  double var = 0.0;
  for (const auto& rep : res.folds) {
    const double d = rep.accuracy - res.mean;
    var += d * d;
  }
  res.stddev = std::sqrt(var / static_cast<double>(res.folds.size()));
  return res;
}

std::string eval_report_json(const EvalReport& rep) {
  nlohmann::json confusion = nlohmann::json::array();
  for (std::size_t t = 0; t < rep.confusion.k; ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t p = 0; p < rep.confusion.k; ++p) row.push_back(rep.confusion.at(t, p));
    confusion.push_back(std::move(row));
  }
  nlohmann::json doc = {{"accuracy", rep.accuracy},
                        {"precision", rep.precision},
                        {"recall", rep.recall},
                        {"f1", rep.f1},
                        {"macro_f1", rep.macro_f1},
                        {"weighted_f1", rep.weighted_f1},
                        {"confusion", confusion},
                        {"zero_division", rep.zero_division}};
  if (rep.has_cv) {
    doc["cv_mean"] = rep.cv_mean;
    doc["cv_std"] = rep.cv_std;
  }
  return doc.dump(2);
}

std::string confusion_csv(const ConfusionMatrix& c) {
  std::string out;
  for (std::size_t t = 0; t < c.k; ++t) {
    for (std::size_t p = 0; p < c.k; ++p) {
      if (p) out += ',';
      out += std::to_string(c.at(t, p));
    }
    out += '\n';
  }
  return out;
}

std::vector<NoisePoint> noise_sweep(const FeatureMatrix& z, std::span<const int> y,
                                    const TrainConfig& cfg, std::span<const double> sigmas,
                                    int k, std::uint64_t seed) {
  std::vector<NoisePoint> out;
  out.reserve(sigmas.size());
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    const auto noisy =
        inject_feature_noise(z, sigmas[i], derive_seed(seed, "noise." + std::to_string(i)));
    const auto cv = cross_validate(noisy, y, cfg, k, seed);
    out.push_back({sigmas[i], cv.mean, cv.stddev});
  }
  return out;
}

}  // namespace gfd
