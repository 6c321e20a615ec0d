#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "gfd/errors.hpp"
#include "gfd/eval.hpp"
#include "gfd/model.hpp"
#include "gfd/rng.hpp"
#include "test_support.hpp"

using test_support::make_blobs;

namespace {

std::vector<int> two_class_labels(std::size_t per) {
  std::vector<int> y(per, 0);
  y.insert(y.end(), per, 1);
  return y;
}

}  // namespace

TEST_CASE("stratified split takes round(count * fraction) per class") {
  const auto y = two_class_labels(10);
  const auto s = gfd::stratified_split(y, 0.3, 42);
  CHECK(s.test.size() == 6);
  CHECK(s.train.size() == 14);

  std::size_t test_zero = 0;
  for (auto i : s.test) test_zero += y[i] == 0;
  CHECK(test_zero == 3);

  // the two sides partition the index range
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 20);
  CHECK(*all.begin() == 0);
  CHECK(*all.rbegin() == 19);

  const auto again = gfd::stratified_split(y, 0.3, 42);
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);

  const std::vector<int> lone{0, 0, 0, 1};
  CHECK_THROWS_AS(gfd::stratified_split(lone, 0.3, 1), gfd::ClassTooSmall);
}

TEST_CASE("stratified k-fold covers the data with balanced disjoint folds") {
  const auto y = two_class_labels(10);
  const auto folds = gfd::stratified_kfold(y, 5, 7);
  REQUIRE(folds.size() == 5);

  std::set<std::size_t> seen;
  for (const auto& fold : folds) {
    CHECK(fold.size() == 4);
    std::size_t zeros = 0;
    for (auto i : fold) {
      zeros += y[i] == 0;
      CHECK(seen.insert(i).second);  // disjoint
    }
    CHECK(zeros == 2);  // stratification holds inside each fold
  }
  CHECK(seen.size() == 20);

  CHECK_THROWS_AS(gfd::stratified_kfold(y, 11, 7), gfd::KTooLarge);
  CHECK_THROWS_AS(gfd::stratified_kfold(y, 1, 7), gfd::KTooLarge);
}

TEST_CASE("classification report on a worked example") {
  const std::vector<int> y_true{0, 0, 1, 1};
  const std::vector<int> y_pred{0, 1, 1, 1};
  const auto rep = gfd::classification_report(y_true, y_pred, 2);

  CHECK(rep.accuracy == doctest::Approx(0.75).epsilon(1e-15));
  REQUIRE(rep.precision.size() == 2);
  CHECK(rep.precision[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rep.precision[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(rep.recall[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(rep.recall[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rep.f1[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(rep.f1[1] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(rep.macro_f1 == doctest::Approx(11.0 / 15.0).epsilon(1e-15));
  CHECK(rep.weighted_f1 == doctest::Approx(11.0 / 15.0).epsilon(1e-15));
  CHECK(!rep.zero_division);

  REQUIRE(rep.confusion.k == 2);
  CHECK(rep.confusion.at(0, 0) == 1);
  CHECK(rep.confusion.at(0, 1) == 1);
  CHECK(rep.confusion.at(1, 0) == 0);
  CHECK(rep.confusion.at(1, 1) == 2);
}

TEST_CASE("classification report degenerate cases") {
  const std::vector<int> perfect{0, 1, 2, 1};
  const auto rep = gfd::classification_report(perfect, perfect, 3);
  CHECK(rep.accuracy == 1.0);
  CHECK(rep.macro_f1 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(!rep.zero_division);

  const std::vector<int> y_true{0, 0, 1, 1};
  const std::vector<int> wrong{1, 1, 0, 0};
  const auto bad = gfd::classification_report(y_true, wrong, 2);
  CHECK(bad.accuracy == 0.0);
  CHECK(bad.macro_f1 == doctest::Approx(0.0).epsilon(0).scale(1.0));

  // class 2 never occurs: empty row and column force the zero_division flag
  const auto padded = gfd::classification_report(y_true, wrong, 3);
  CHECK(padded.zero_division);
  CHECK(padded.precision[2] == 0.0);
  CHECK(padded.recall[2] == 0.0);
  CHECK(padded.f1[2] == 0.0);

  CHECK_THROWS_AS(gfd::classification_report(y_true, std::vector<int>{0, 1}, 2),
                  gfd::LengthMismatch);
  CHECK_THROWS_AS(gfd::classification_report(y_true, std::vector<int>{0, 1, 2, 3}, 2),
                  gfd::DataError);
}

TEST_CASE("accuracy equals support-weighted recall on random reports") {
  gfd::Rng rng(311);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(4));
    std::vector<int> y_true(200), y_pred(200);
    for (std::size_t i = 0; i < 200; ++i) {
      y_true[i] = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
      y_pred[i] = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    }
    const auto rep = gfd::classification_report(y_true, y_pred, k);

    double weighted_recall = 0.0;
    long long total = 0;
    for (int c = 0; c < k; ++c) {
      long long support = 0;
      for (int p = 0; p < k; ++p) support += rep.confusion.at(c, p);
      weighted_recall += static_cast<double>(support) * rep.recall[c];
      total += support;
    }
    CHECK(total == 200);
    CHECK(std::fabs(rep.accuracy - weighted_recall / 200.0) < 1e-12);
  }
}

TEST_CASE("cross validation aggregates fold accuracies") {
  const auto blobs = make_blobs(20, 3, 4, 6.0, 0.5, 401);
  gfd::TrainConfig cfg;
  cfg.kind = gfd::ModelKind::random_forest;
  cfg.trees = 50;
  cfg.seed = 5;

  const auto cv = gfd::cross_validate(blobs, blobs.labels, cfg, 5, 17);
  REQUIRE(cv.folds.size() == 5);

  double mean = 0.0;
  for (const auto& f : cv.folds) mean += f.accuracy;
  mean /= 5.0;
  CHECK(std::fabs(cv.mean - mean) < 1e-12);

  double var = 0.0;
  for (const auto& f : cv.folds) var += (f.accuracy - mean) * (f.accuracy - mean);
  CHECK(std::fabs(cv.stddev - std::sqrt(var / 5.0)) < 1e-12);

  CHECK(cv.mean >= 0.99);  // blobs this separated leave no excuse

  // every row is scored exactly once across the folds
  long long scored = 0;
  for (const auto& f : cv.folds) {
    for (std::size_t t = 0; t < f.confusion.k; ++t) {
      for (std::size_t p = 0; p < f.confusion.k; ++p) scored += f.confusion.at(t, p);
    }
  }
  CHECK(scored == 60);

  const auto again = gfd::cross_validate(blobs, blobs.labels, cfg, 5, 17);
  CHECK(again.mean == cv.mean);
  CHECK(again.stddev == cv.stddev);
  for (std::size_t i = 0; i < 5; ++i) CHECK(again.folds[i].accuracy == cv.folds[i].accuracy);
}

TEST_CASE("noise sweep at sigma zero reproduces the clean cross validation") {
  const auto blobs = make_blobs(15, 2, 3, 5.0, 0.8, 409);
  gfd::TrainConfig cfg;
  cfg.kind = gfd::ModelKind::softmax;
  cfg.seed = 3;

  const auto cv = gfd::cross_validate(blobs, blobs.labels, cfg, 3, 23);
  const std::vector<double> sigmas{0.0, 0.5};
  const auto sweep = gfd::noise_sweep(blobs, blobs.labels, cfg, sigmas, 3, 23);
  REQUIRE(sweep.size() == 2);
  CHECK(sweep[0].sigma == 0.0);
  CHECK(sweep[1].sigma == 0.5);
  CHECK(sweep[0].cv_mean == cv.mean);  // bitwise: sigma 0 must not touch the data
  CHECK(sweep[0].cv_std == cv.stddev);

  const auto again = gfd::noise_sweep(blobs, blobs.labels, cfg, sigmas, 3, 23);
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    CHECK(again[i].cv_mean == sweep[i].cv_mean);
    CHECK(again[i].cv_std == sweep[i].cv_std);
  }
}

TEST_CASE("report json carries the metrics and nothing about timing") {
  const std::vector<int> y_true{0, 0, 1, 1};
  const std::vector<int> y_pred{0, 1, 1, 1};
  auto rep = gfd::classification_report(y_true, y_pred, 2);
  rep.timing_s["train"] = 12.5;  // must not leak into the serialized report

  const auto text = gfd::eval_report_json(rep);
  CHECK(text.find("timing") == std::string::npos);
  CHECK(text.find("cv_mean") == std::string::npos);

  const auto doc = nlohmann::json::parse(text);
  CHECK(doc.at("accuracy").get<double>() == doctest::Approx(0.75));
  CHECK(doc.at("precision").size() == 2);
  CHECK(doc.at("recall").size() == 2);
  CHECK(doc.at("f1").size() == 2);
  CHECK(doc.at("macro_f1").get<double>() == doctest::Approx(11.0 / 15.0));
  CHECK(doc.at("weighted_f1").get<double>() == doctest::Approx(11.0 / 15.0));
  CHECK(doc.at("zero_division").get<bool>() == false);
  CHECK(doc.at("confusion")[0][1].get<long long>() == 1);

  rep.has_cv = true;
  rep.cv_mean = 0.9;
  rep.cv_std = 0.05;
  const auto with_cv = nlohmann::json::parse(gfd::eval_report_json(rep));
  CHECK(with_cv.at("cv_mean").get<double>() == doctest::Approx(0.9));
  CHECK(with_cv.at("cv_std").get<double>() == doctest::Approx(0.05));

  CHECK(gfd::eval_report_json(rep) == gfd::eval_report_json(rep));
}

TEST_CASE("confusion csv is bare comma-joined counts") {
  gfd::ConfusionMatrix c;
  c.k = 2;
  c.counts = {1, 1, 0, 2};
  CHECK(gfd::confusion_csv(c) == "1,1\n0,2\n");
}
