#include "gfd/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gfd/errors.hpp"
#include "gfd/rng.hpp"

namespace gfd {

namespace {

double sq_dist(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

int nearest(const std::vector<double>& centroids, std::size_t k, std::size_t dim,
            const double* x, double* best_out = nullptr) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < k; ++j) {
    const double d = sq_dist(x, centroids.data() + j * dim, dim);
    if (d < best_d) {  // strict: ties keep the lower id
      best_d = d;
      best = static_cast<int>(j);
    }
  }
  if (best_out) *best_out = best_d;
  return best;
}

// k-means++: first centroid uniform, then D^2-weighted picks, all without
// replacement so k == n degenerates to one point per cluster.
std::vector<std::size_t> kmeanspp_init(const FeatureMatrix& m, std::size_t k, Rng& rng) {
  const std::size_t n = m.rows;
  std::vector<std::size_t> chosen;
  std::vector<bool> used(n, false);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());

  std::size_t first = static_cast<std::size_t>(rng.below(n));
  chosen.push_back(first);
  used[first] = true;

  while (chosen.size() < k) {
    const double* last = m.values.data() + chosen.back() * m.cols;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) {
        d2[i] = 0.0;
        continue;
      }
      d2[i] = std::min(d2[i], sq_dist(m.values.data() + i * m.cols, last, m.cols));
      total += d2[i];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (used[i]) continue;
        acc += d2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    }
    if (pick == n) {
      // all remaining points coincide with a centroid; take the lowest unused
      for (std::size_t i = 0; i < n; ++i) {
        if (!used[i]) {
          pick = i;
          break;
        }
      }
    }
    chosen.push_back(pick);
    used[pick] = true;
  }
  return chosen;
}

}  // namespace

std::size_t default_cluster_count(std::size_t rows, std::size_t n_max) {
  const std::size_t k = (rows + 2 * n_max - 1) / (2 * n_max);
  return std::max<std::size_t>(2, k);
}

ClusterModel minibatch_kmeans(const FeatureMatrix& m, std::size_t k,
                              std::size_t batch_size, std::size_t max_iters,
                              std::uint64_t seed) {
  const std::size_t n = m.rows;
  const std::size_t dim = m.cols;
  if (k == 0) throw TooManyClusters("minibatch_kmeans: k must be positive");
  if (k > n)
    throw TooManyClusters("minibatch_kmeans: k=" + std::to_string(k) + " > rows=" +
                          std::to_string(n));
  if (batch_size == 0) batch_size = 1;

  Rng rng(seed);
  ClusterModel model;
  model.k = k;
  model.dim = dim;
  model.centroids.resize(k * dim);
  const auto init = kmeanspp_init(m, k, rng);
  for (std::size_t j = 0; j < k; ++j) {
    const double* src = m.values.data() + init[j] * dim;
    std::copy(src, src + dim, model.centroids.begin() + static_cast<std::ptrdiff_t>(j * dim));
  }

  std::vector<double> counts(k, 0.0);
  std::vector<double> prev(model.centroids.size());
  const std::size_t bsz = std::min(batch_size, n);
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    prev = model.centroids;
    const auto batch = rng.sample_without_replacement(n, bsz);
    for (std::size_t idx : batch) {
      const double* x = m.values.data() + idx * dim;
      const int c = nearest(model.centroids, k, dim, x);
      counts[c] += 1.0;
      const double eta = 1.0 / counts[c];
      double* mu = model.centroids.data() + static_cast<std::size_t>(c) * dim;
      for (std::size_t f = 0; f < dim; ++f) mu[f] += eta * (x[f] - mu[f]);
    }
    double movement = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      movement = std::max(movement, std::sqrt(sq_dist(model.centroids.data() + j * dim,
                                                      prev.data() + j * dim, dim)));
    }
    if (movement < 1e-6) break;
  }

  // final full pass; reseed empty clusters to the worst-fit point
  for (std::size_t repair = 0;; ++repair) {
    model.assignments.assign(n, 0);
    std::vector<std::size_t> sizes(k, 0);
    std::vector<double> dist(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      model.assignments[i] = nearest(model.centroids, k, dim,
                                     m.values.data() + i * dim, &dist[i]);
      ++sizes[static_cast<std::size_t>(model.assignments[i])];
    }
    std::size_t empty = k;
    for (std::size_t j = 0; j < k; ++j) {
      if (sizes[j] == 0) {
        empty = j;
        break;
      }
    }
    std::size_t far = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (dist[i] > dist[far]) far = i;
    }
    // no empty cluster, or none fixable (duplicate points), or repair budget spent
    if (empty == k || dist[far] == 0.0 || repair >= k) {
      model.inertia = 0.0;
      for (double d : dist) model.inertia += d;
      return model;
    }
    const double* src = m.values.data() + far * dim;
    std::copy(src, src + dim,
              model.centroids.begin() + static_cast<std::ptrdiff_t>(empty * dim));
  }
}

std::vector<int> assign_clusters(const ClusterModel& model, const FeatureMatrix& m) {
  if (m.cols != model.dim)
    throw DimensionMismatch("assign_clusters: matrix has " + std::to_string(m.cols) +
                            " columns, model expects " + std::to_string(model.dim));
  std::vector<int> out(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    out[i] = nearest(model.centroids, model.k, model.dim, m.values.data() + i * model.dim);
  }
  return out;
}

}  // namespace gfd
