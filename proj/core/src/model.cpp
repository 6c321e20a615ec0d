#include "gfd/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "gfd/errors.hpp"
#include "gfd/eval.hpp"
#include "gfd/rng.hpp"

namespace gfd {

namespace {

std::vector<int> class_list(std::span<const int> y) {
  std::set<int> s(y.begin(), y.end());
  if (s.size() < 2) throw DegenerateLabels("training labels contain a single class");
  return {s.begin(), s.end()};
}

std::vector<int> index_labels(std::span<const int> y, const std::vector<int>& classes) {
  std::vector<int> idx(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto it = std::lower_bound(classes.begin(), classes.end(), y[i]);
    if (it == classes.end() || *it != y[i])
      throw DegenerateLabels("label " + std::to_string(y[i]) + " missing from class list");
    idx[i] = static_cast<int>(it - classes.begin());
  }
  return idx;
}

std::vector<double> priors_of(std::span<const int> yi, std::size_t k) {
  std::vector<double> p(k, 0.0);
  for (int c : yi) p[static_cast<std::size_t>(c)] += 1.0;
  for (double& v : p) v /= static_cast<double>(yi.size());
  return p;
}

void check_shapes(const FeatureMatrix& z, std::span<const int> y) {
  if (z.rows == 0 || z.cols == 0) throw DataError("train: empty feature matrix");
  if (y.size() != z.rows) throw LengthMismatch("train: labels do not match rows");
}

void warn_if_unstandardized(const FeatureMatrix& z) {
  for (std::size_t c = 0; c < z.cols; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < z.rows; ++r) mean += z.at(r, c);
    mean /= static_cast<double>(z.rows);
    if (std::fabs(mean) > 0.5) {
      std::fprintf(stderr,
                   "warning: column %zu has mean %.3f; features look unstandardized\n", c,
                   mean);
      return;
    }
  }
}

// rows x K scores for a linear model (W x + b)
void linear_scores(const TrainedModel& m, const FeatureMatrix& z, std::vector<double>& out) {
  const std::size_t k = m.classes.size(), d = z.cols;
  out.assign(z.rows * k, 0.0);
  for (std::size_t r = 0; r < z.rows; ++r) {
    const double* x = z.values.data() + r * d;
    for (std::size_t c = 0; c < k; ++c) {
      const double* w = m.weights.data() + c * d;
      double s = m.bias[c];
      for (std::size_t f = 0; f < d; ++f) s += w[f] * x[f];
      out[r * k + c] = s;
    }
  }
}

void softmax_rows(std::vector<double>& scores, std::size_t rows, std::size_t k) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = scores.data() + r * k;
    const double mx = *std::max_element(row, row + k);
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      row[c] = std::exp(row[c] - mx);
      sum += row[c];
    }
    for (std::size_t c = 0; c < k; ++c) row[c] /= sum;
  }
}

int tree_leaf(const std::vector<TreeNode>& tree, const double* x) {
  int node = 0;
  while (tree[static_cast<std::size_t>(node)].feature >= 0) {
    const auto& tn = tree[static_cast<std::size_t>(node)];
    node = x[tn.feature] <= tn.threshold ? tn.left : tn.right;
  }
  return node;
}

}  // namespace

TrainedModel train_softmax_regression(const FeatureMatrix& z, std::span<const int> y,
                                      const TrainConfig& cfg) {
  check_shapes(z, y);
  warn_if_unstandardized(z);

  TrainedModel model;
  model.kind = ModelKind::softmax;
  model.classes = class_list(y);
  model.feature_names = z.names;
  const auto yi = index_labels(y, model.classes);
  model.class_priors = priors_of(yi, model.classes.size());

  const std::size_t n = z.rows, d = z.cols, k = model.classes.size();
  model.weights.assign(k * d, 0.0);
  model.bias.assign(k, 0.0);

  std::vector<double> best_w = model.weights, best_b = model.bias;
  double best_loss = softmax_loss(model, z, y, cfg.lambda);

  std::vector<double> probs;
  std::vector<double> grad_w(k * d), grad_b(k);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    linear_scores(model, z, probs);
    softmax_rows(probs, n, k);

    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    std::fill(grad_b.begin(), grad_b.end(), 0.0);
    double data_loss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double* p = probs.data() + r * k;
      const double* x = z.values.data() + r * d;
      data_loss -= std::log(std::max(p[static_cast<std::size_t>(yi[r])], 1e-300));
      for (std::size_t c = 0; c < k; ++c) {
        const double diff = p[c] - (static_cast<int>(c) == yi[r] ? 1.0 : 0.0);
        grad_b[c] += diff;
        double* gw = grad_w.data() + c * d;
        for (std::size_t f = 0; f < d; ++f) gw[f] += diff * x[f];
      }
    }
    double reg = 0.0;
    for (double w : model.weights) reg += w * w;
    const double loss = data_loss / static_cast<double>(n) + 0.5 * cfg.lambda * reg;
    if (loss < best_loss) {
      best_loss = loss;
      best_w = model.weights;
      best_b = model.bias;
    }

    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < k * d; ++i) {
      model.weights[i] -= cfg.learning_rate * (grad_w[i] * inv_n + cfg.lambda * model.weights[i]);
    }
    for (std::size_t c = 0; c < k; ++c) model.bias[c] -= cfg.learning_rate * grad_b[c] * inv_n;
  }

  const double final_loss = softmax_loss(model, z, y, cfg.lambda);
  if (final_loss >= best_loss) {
    model.weights = std::move(best_w);
    model.bias = std::move(best_b);
  }
  return model;
}

double softmax_loss(const TrainedModel& model, const FeatureMatrix& z,
                    std::span<const int> y, double lambda) {
  const std::size_t n = z.rows, k = model.classes.size();
  const auto yi = index_labels(y, model.classes);
  std::vector<double> probs;
  linear_scores(model, z, probs);
  softmax_rows(probs, n, k);
  double loss = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    loss -= std::log(std::max(probs[r * k + static_cast<std::size_t>(yi[r])], 1e-300));
  loss /= static_cast<double>(n);
  double reg = 0.0;
  for (double w : model.weights) reg += w * w;
  return loss + 0.5 * lambda * reg;
}

TrainedModel train_linear_svm(const FeatureMatrix& z, std::span<const int> y,
                              const TrainConfig& cfg) {
  check_shapes(z, y);
  warn_if_unstandardized(z);

  TrainedModel model;
  model.kind = ModelKind::linear_svm;
  model.classes = class_list(y);
  model.feature_names = z.names;
  const auto yi = index_labels(y, model.classes);
  model.class_priors = priors_of(yi, model.classes.size());

  const std::size_t n = z.rows, d = z.cols, k = model.classes.size();
  model.weights.assign(k * d, 0.0);
  model.bias.assign(k, 0.0);

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t i : order) {
      const double* x = z.values.data() + i * d;
      for (std::size_t c = 0; c < k; ++c) {
        const double target = static_cast<int>(c) == yi[i] ? 1.0 : -1.0;
        double* w = model.weights.data() + c * d;
        double margin = model.bias[c];
        for (std::size_t f = 0; f < d; ++f) margin += w[f] * x[f];
        margin *= target;
        if (margin < 1.0) {
          for (std::size_t f = 0; f < d; ++f)
            w[f] -= cfg.learning_rate * (cfg.lambda * w[f] - target * x[f]);
          model.bias[c] += cfg.learning_rate * target;
        } else {
          for (std::size_t f = 0; f < d; ++f)
            w[f] -= cfg.learning_rate * cfg.lambda * w[f];
        }
      }
    }
  }
  return model;
}

double svm_objective(const TrainedModel& model, const FeatureMatrix& z,
                     std::span<const int> y, double lambda) {
  const std::size_t n = z.rows, d = z.cols, k = model.classes.size();
  const auto yi = index_labels(y, model.classes);
  double obj = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const double* w = model.weights.data() + c * d;
    double hinge = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double target = static_cast<int>(c) == yi[i] ? 1.0 : -1.0;
      const double* x = z.values.data() + i * d;
      double margin = model.bias[c];
      for (std::size_t f = 0; f < d; ++f) margin += w[f] * x[f];
      hinge += std::max(0.0, 1.0 - target * margin);
    }
    double reg = 0.0;
    for (std::size_t f = 0; f < d; ++f) reg += w[f] * w[f];
    obj += hinge / static_cast<double>(n) + 0.5 * lambda * reg;
  }
  return obj;
}

TrainedModel train_model(const FeatureMatrix& z, std::span<const int> y,
                         const TrainConfig& cfg) {
  switch (cfg.kind) {
    case ModelKind::softmax:
      return train_softmax_regression(z, y, cfg);
    case ModelKind::random_forest:
      return train_random_forest(z, y, cfg);
    case ModelKind::linear_svm:
      return train_linear_svm(z, y, cfg);
  }
  throw ConfigError("train_model: unknown model kind");
}

Prediction predict(const TrainedModel& model, const FeatureMatrix& z) {
  if (!model.feature_names.empty() && z.cols != model.feature_names.size())
    throw DimensionMismatch("predict: matrix has " + std::to_string(z.cols) +
                            " columns, model expects " +
                            std::to_string(model.feature_names.size()));

  const std::size_t k = model.classes.size();
  Prediction pred;
  pred.rows = z.rows;
  pred.classes = k;

  if (model.kind == ModelKind::random_forest) {
    pred.scores.assign(z.rows * k, 0.0);
    for (std::size_t r = 0; r < z.rows; ++r) {
      const double* x = z.values.data() + r * z.cols;
      double* row = pred.scores.data() + r * k;
      for (const auto& tree : model.forest) {
        const auto& counts = tree[static_cast<std::size_t>(tree_leaf(tree, x))].counts;
        std::size_t best = 0;
        for (std::size_t c = 1; c < k; ++c) {
          if (counts[c] > counts[best]) best = c;
        }
        row[best] += 1.0;
      }
      for (std::size_t c = 0; c < k; ++c) row[c] /= static_cast<double>(model.forest.size());
    }
  } else {
    linear_scores(model, z, pred.scores);
    if (model.kind == ModelKind::softmax) softmax_rows(pred.scores, z.rows, k);
  }

  pred.labels.resize(z.rows);
  for (std::size_t r = 0; r < z.rows; ++r) {
    const double* row = pred.scores.data() + r * k;
    std::size_t best = 0;
    for (std::size_t c = 1; c < k; ++c) {
      if (row[c] > row[best]) {
        best = c;
      } else if (model.kind == ModelKind::random_forest && row[c] == row[best] &&
                 model.class_priors[c] > model.class_priors[best]) {
        best = c;  // vote tie: larger training prior wins
      }
    }
    pred.labels[r] = model.classes[best];
  }
  return pred;
}

std::vector<FeatureImportance> permutation_importance(const TrainedModel& model,
                                                      const FeatureMatrix& z,
                                                      std::span<const int> y, int repeats,
                                                      std::uint64_t seed) {
  if (repeats < 1) throw ConfigError("permutation_importance: repeats must be positive");
  if (y.size() != z.rows) throw LengthMismatch("permutation_importance");

  auto accuracy_of = [&](const FeatureMatrix& m) {
    const auto pred = predict(model, m);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < m.rows; ++i) {
      if (pred.labels[i] == y[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(m.rows);
  };

  const double baseline = accuracy_of(z);
  Rng rng(seed);
  FeatureMatrix work = z;
  std::vector<FeatureImportance> out(z.cols);
  std::vector<double> column(z.rows);
  for (std::size_t c = 0; c < z.cols; ++c) {
    double drop_sum = 0.0;
    for (int rep = 0; rep < repeats; ++rep) {
      for (std::size_t r = 0; r < z.rows; ++r) column[r] = z.at(r, c);
      rng.shuffle(column);
      for (std::size_t r = 0; r < z.rows; ++r) work.at(r, c) = column[r];
      drop_sum += baseline - accuracy_of(work);
    }
    for (std::size_t r = 0; r < z.rows; ++r) work.at(r, c) = z.at(r, c);
    out[c] = {z.names.empty() ? "f" + std::to_string(c) : z.names[c],
              drop_sum / repeats};
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const FeatureImportance& a, const FeatureImportance& b) {
                     return a.importance > b.importance;
                   });
  return out;
}

TransferResult transfer_run(const FeatureMatrix& source_z, std::span<const int> source_y,
                            const FeatureMatrix& target_z, std::span<const int> target_y,
                            const TrainConfig& cfg, TransferMode mode) {
  if (source_z.names != target_z.names || source_z.cols != target_z.cols)
    throw SchemaMismatch("transfer_run: feature schemas differ");
  if (source_y.size() != source_z.rows || target_y.size() != target_z.rows)
    throw LengthMismatch("transfer_run");

  TrainedModel model;
  const FeatureMatrix* eval_z = &target_z;
  std::vector<int> eval_y(target_y.begin(), target_y.end());
  FeatureMatrix heldout;

  if (mode == TransferMode::zero_shot) {
    model = train_model(source_z, source_y, cfg);
  } else {
    const auto split = stratified_split(target_y, 0.3, cfg.seed);
    FeatureMatrix joint = source_z;
    std::vector<int> joint_y(source_y.begin(), source_y.end());
    for (std::size_t r : split.train) {
      const auto row = target_z.row(r);
      joint.values.insert(joint.values.end(), row.begin(), row.end());
      joint_y.push_back(target_y[r]);
      ++joint.rows;
    }
    model = train_model(joint, joint_y, cfg);

    heldout.cols = target_z.cols;
    heldout.names = target_z.names;
    eval_y.clear();
    for (std::size_t r : split.test) {
      const auto row = target_z.row(r);
      heldout.values.insert(heldout.values.end(), row.begin(), row.end());
      eval_y.push_back(target_y[r]);
      ++heldout.rows;
    }
    eval_z = &heldout;
  }

  const auto pred = predict(model, *eval_z);
  int num_classes = 0;
  for (int c : model.classes) num_classes = std::max(num_classes, c + 1);
  for (int c : eval_y) num_classes = std::max(num_classes, c + 1);
  const auto report = classification_report(eval_y, pred.labels, num_classes);

  TransferResult res;
  res.accuracy = report.accuracy;
  res.macro_f1 = report.macro_f1;
  res.weighted_f1 = report.weighted_f1;
  res.precision = report.precision;
  res.recall = report.recall;
  res.f1 = report.f1;
  return res;
}

}  // namespace gfd
