#ifndef GFD_MODEL_HPP
#define GFD_MODEL_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gfd/feature_matrix.hpp"

namespace gfd {

enum class ModelKind { softmax, random_forest, linear_svm };

enum class FeatureSubset { sqrt_count, all, fixed };

struct TrainConfig {
  ModelKind kind = ModelKind::random_forest;
  double lambda = 1e-4;       // L2 strength for the linear models
  int epochs = 500;
  double learning_rate = 0.1;
  int trees = 100;
  int max_depth = 0;          // 0 = unlimited
  int min_leaf = 1;
  FeatureSubset features_per_split = FeatureSubset::sqrt_count;
  int fixed_features = 0;     // used when features_per_split == fixed
  std::uint64_t seed = 0;
};

// Flat decision tree. Leaves have feature == -1 and class counts; internal
// nodes send x[feature] <= threshold left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> counts;
};

struct TrainedModel {
  ModelKind kind = ModelKind::softmax;
  std::vector<int> classes;               // ascending original labels
  std::vector<std::string> feature_names;
  std::vector<double> class_priors;       // training frequency per class
  // linear payload (softmax / svm): K x D weights and K biases
  std::vector<double> weights;
  std::vector<double> bias;
  // forest payload
  std::vector<std::vector<TreeNode>> forest;
};

struct Prediction {
  std::vector<int> labels;    // original label values
  std::vector<double> scores; // rows x classes: probabilities, vote shares, or margins
  std::size_t rows = 0;
  std::size_t classes = 0;
};

// Full-batch gradient descent on mean cross-entropy + lambda/2 * ||W||^2,
// zero-initialized, log-sum-exp stabilized. Keeps the best iterate, so the
// returned parameters never score worse than the start.
TrainedModel train_softmax_regression(const FeatureMatrix& z, std::span<const int> y,
                                      const TrainConfig& cfg);

// CART with Gini impurity, bootstrap resampling, random feature subsets per
// split. Deterministic: tree t uses the t-th seed drawn from cfg.seed.
TrainedModel train_random_forest(const FeatureMatrix& z, std::span<const int> y,
                                 const TrainConfig& cfg);

// One-vs-rest hinge loss + lambda/2 * ||w||^2 by seeded stochastic subgradient
// descent.
TrainedModel train_linear_svm(const FeatureMatrix& z, std::span<const int> y,
                              const TrainConfig& cfg);

TrainedModel train_model(const FeatureMatrix& z, std::span<const int> y,
                         const TrainConfig& cfg);

// labels[i] = argmax of scores row i; score ties pick the lower class id,
// forest vote ties prefer the larger training prior.
Prediction predict(const TrainedModel& model, const FeatureMatrix& z);

// mean cross-entropy + lambda/2 * ||W||^2 of a softmax model on (z, y)
double softmax_loss(const TrainedModel& model, const FeatureMatrix& z,
                    std::span<const int> y, double lambda);

// summed hinge objective of a one-vs-rest svm on (z, y)
double svm_objective(const TrainedModel& model, const FeatureMatrix& z,
                     std::span<const int> y, double lambda);

struct FeatureImportance {
  std::string name;
  double importance = 0.0;  // mean accuracy drop under column permutation
};

// Sorted descending by importance (stable: column order breaks ties).
std::vector<FeatureImportance> permutation_importance(const TrainedModel& model,
                                                      const FeatureMatrix& z,
                                                      std::span<const int> y, int repeats,
                                                      std::uint64_t seed);

enum class TransferMode { zero_shot, augmented_refit };

struct TransferResult {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  std::vector<double> precision, recall, f1;
};

// zero_shot: train on all source rows, score all target rows. augmented_refit:
// retrain on source plus a stratified 70% of the target and score the held-out
// 30%. Feature schemas must match.
TransferResult transfer_run(const FeatureMatrix& source_z, std::span<const int> source_y,
                            const FeatureMatrix& target_z, std::span<const int> target_y,
                            const TrainConfig& cfg, TransferMode mode);

// Versioned JSON round-trip.
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace gfd

#endif
