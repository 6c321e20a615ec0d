#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "gfd/errors.hpp"
#include "gfd/model.hpp"
#include "gfd/rng.hpp"

namespace gfd {

namespace {

struct TreeBuilder {
  const FeatureMatrix& z;
  const std::vector<int>& yi;  // class indices 0..k-1
  std::size_t k;
  std::size_t features_per_split;
  int max_depth;
  int min_leaf;
  Rng rng;
  std::vector<TreeNode> nodes;

  static double gini(const std::vector<double>& counts, double total) {
    double g = 1.0;
    for (double c : counts) {
      const double p = c / total;
      g -= p * p;
    }
    return g;
  }

  int make_leaf(const std::vector<double>& counts) {
    TreeNode leaf;
    leaf.counts = counts;
    nodes.push_back(std::move(leaf));
    return static_cast<int>(nodes.size() - 1);
  }

  // indices: row ids of this node's bootstrap sample (modified in place by
  // partitioning)
  int build(std::vector<std::size_t>& indices, std::size_t lo, std::size_t hi, int depth) {
    std::vector<double> counts(k, 0.0);
    for (std::size_t i = lo; i < hi; ++i)
      counts[static_cast<std::size_t>(yi[indices[i]])] += 1.0;
    const double total = static_cast<double>(hi - lo);

    const bool pure = std::count_if(counts.begin(), counts.end(),
                                    [](double c) { return c > 0.0; }) <= 1;
    if (pure || (max_depth > 0 && depth >= max_depth) ||
        hi - lo < 2 * static_cast<std::size_t>(min_leaf)) {
      return make_leaf(counts);
    }

    // random feature subset, then exhaustive threshold search per feature
    const auto feats = rng.sample_without_replacement(z.cols, features_per_split);

    double best_score = std::numeric_limits<double>::infinity();
    std::size_t best_feature = z.cols;
    double best_threshold = 0.0;

    std::vector<std::pair<double, int>> column(hi - lo);
    std::vector<double> left_counts(k);
    for (std::size_t f : feats) {
      for (std::size_t i = lo; i < hi; ++i)
        column[i - lo] = {z.at(indices[i], f), yi[indices[i]]};
      std::sort(column.begin(), column.end());

      std::fill(left_counts.begin(), left_counts.end(), 0.0);
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        left_counts[static_cast<std::size_t>(column[i].second)] += 1.0;
        if (column[i].first == column[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = total - nl;
        if (nl < min_leaf || nr < min_leaf) continue;

        double gl = 1.0, gr = 1.0;
        for (std::size_t c = 0; c < k; ++c) {
          const double pl = left_counts[c] / nl;
          const double pr = (counts[c] - left_counts[c]) / nr;
          gl -= pl * pl;
          gr -= pr * pr;
        }
        const double score = (nl * gl + nr * gr) / total;
        if (score < best_score) {
          best_score = score;
          best_feature = f;
          best_threshold = (column[i].first + column[i + 1].first) / 2.0;
        }
      }
    }

    if (best_feature == z.cols) return make_leaf(counts);  // no valid split

    const auto mid = static_cast<std::size_t>(
        std::partition(indices.begin() + static_cast<std::ptrdiff_t>(lo),
                       indices.begin() + static_cast<std::ptrdiff_t>(hi),
                       [&](std::size_t i) {
                         return z.at(i, best_feature) <= best_threshold;
                       }) -
        indices.begin());
    if (mid == lo || mid == hi) return make_leaf(counts);  // degenerate split

    TreeNode node;
    node.feature = static_cast<int>(best_feature);
    node.threshold = best_threshold;
    nodes.push_back(node);
    const auto self = static_cast<int>(nodes.size() - 1);
    const int left = build(indices, lo, mid, depth + 1);
    const int right = build(indices, mid, hi, depth + 1);
    nodes[static_cast<std::size_t>(self)].left = left;
    nodes[static_cast<std::size_t>(self)].right = right;
    return self;
  }
};

}  // namespace

TrainedModel train_random_forest(const FeatureMatrix& z, std::span<const int> y,
                                 const TrainConfig& cfg) {
  if (z.rows == 0 || z.cols == 0) throw DataError("train_random_forest: empty matrix");
  if (y.size() != z.rows) throw LengthMismatch("train_random_forest");
  if (cfg.trees < 1) throw ConfigError("train_random_forest: trees must be positive");
  if (cfg.min_leaf < 1) throw ConfigError("train_random_forest: min_leaf must be positive");

  TrainedModel model;
  model.kind = ModelKind::random_forest;
  {
    std::set<int> s(y.begin(), y.end());
    if (s.size() < 2) throw DegenerateLabels("train_random_forest: single class");
    model.classes.assign(s.begin(), s.end());
  }
  model.feature_names = z.names;

  std::vector<int> yi(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    yi[i] = static_cast<int>(std::lower_bound(model.classes.begin(), model.classes.end(),
                                              y[i]) -
                             model.classes.begin());
  }
  model.class_priors.assign(model.classes.size(), 0.0);
  for (int c : yi) model.class_priors[static_cast<std::size_t>(c)] += 1.0;
  for (double& p : model.class_priors) p /= static_cast<double>(y.size());

  std::size_t features_per_split = z.cols;
  switch (cfg.features_per_split) {
    case FeatureSubset::sqrt_count:
      features_per_split = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::sqrt(static_cast<double>(z.cols))));
      break;
    case FeatureSubset::all:
      features_per_split = z.cols;
      break;
    case FeatureSubset::fixed:
      if (cfg.fixed_features < 1 || static_cast<std::size_t>(cfg.fixed_features) > z.cols)
        throw ConfigError("train_random_forest: fixed_features out of range");
      features_per_split = static_cast<std::size_t>(cfg.fixed_features);
      break;
  }

  // one seed per tree, drawn up front so tree t is reproducible in isolation
  Rng seeder(cfg.seed);
  std::vector<std::uint64_t> tree_seeds(static_cast<std::size_t>(cfg.trees));
  for (auto& s : tree_seeds) s = seeder.next_u64();

  const std::size_t n = z.rows;
  for (int t = 0; t < cfg.trees; ++t) {
    TreeBuilder builder{z,           yi,          model.classes.size(), features_per_split,
                        cfg.max_depth, cfg.min_leaf, Rng(tree_seeds[static_cast<std::size_t>(t)]),
                        {}};
    std::vector<std::size_t> sample(n);
    for (std::size_t i = 0; i < n; ++i)
      sample[i] = static_cast<std::size_t>(builder.rng.below(n));  // bootstrap
    builder.build(sample, 0, n, 0);
    model.forest.push_back(std::move(builder.nodes));
  }
  return model;
}

}  // namespace gfd
