#ifndef GFD_CLUSTERING_HPP
#define GFD_CLUSTERING_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gfd/feature_matrix.hpp"

namespace gfd {

struct ClusterModel {
  std::vector<double> centroids;  // k x dim, row-major
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<int> assignments;   // nearest centroid per input row
  double inertia = 0.0;           // sum of squared distances at the final centroids
};

// Mini-batch k-means: k-means++ seeding, per-batch streaming centroid updates
// with rate 1/count (batches drawn without replacement inside an iteration),
// full-dataset assignment at the end. Empty clusters are reseeded to the point
// farthest from its centroid. Deterministic for a given seed.
ClusterModel minibatch_kmeans(const FeatureMatrix& standardized, std::size_t k,
                              std::size_t batch_size, std::size_t max_iters,
                              std::uint64_t seed);

// Nearest centroid per row; distance ties pick the lower centroid id.
std::vector<int> assign_clusters(const ClusterModel& model, const FeatureMatrix& m);

// Default cluster count: max(2, ceil(rows / (2 * n_max))).
std::size_t default_cluster_count(std::size_t rows, std::size_t n_max);

}  // namespace gfd

#endif
