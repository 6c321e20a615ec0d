#include "gfd/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

#include "gfd/errors.hpp"

namespace gfd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double rank = (p / 100.0) * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(rank);
  if (lo + 1 >= v.size()) return v.back();
  const double frac = rank - static_cast<double>(lo);
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

std::vector<std::vector<std::pair<int, double>>> adjacency(const WeightedGraph& g) {
  std::vector<std::vector<std::pair<int, double>>> adj(g.node_ids.size());
  for (const auto& e : g.edges) {
    adj[static_cast<std::size_t>(e.u)].emplace_back(e.v, e.w);
    adj[static_cast<std::size_t>(e.v)].emplace_back(e.u, e.w);
  }
  return adj;
}

double edge_cost(double w, PathCost cost) {
  return cost == PathCost::similarity ? w : 1.0 / w - 1.0;
}

}  // namespace

WeightedGraph build_knn_graph(const FeatureMatrix& m, std::span<const int> row_ids,
                              int k_max, double tau_percentile) {
  const std::size_t n = row_ids.size();
  if (n < 2) throw ClusterTooSmall("build_knn_graph: need at least 2 rows");
  if (k_max < 1) throw Error("build_knn_graph: k_max must be positive");

  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_max), n - 1);

  // pairwise distances inside the cluster
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* a = m.values.data() + static_cast<std::size_t>(row_ids[i]) * m.cols;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double* b = m.values.data() + static_cast<std::size_t>(row_ids[j]) * m.cols;
      double s = 0.0;
      for (std::size_t f = 0; f < m.cols; ++f) {
        const double d = a[f] - b[f];
        s += d * d;
      }
      const double d = std::sqrt(s);
      dist[i * n + j] = d;
      dist[j * n + i] = d;
    }
  }

  // k nearest per node, ties broken by the lower neighbour index
  std::vector<std::vector<std::size_t>> nearest(n);
  std::vector<double> candidate_dists;
  candidate_dists.reserve(n * k);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    order.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) order.push_back(j);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double da = dist[i * n + a], db = dist[i * n + b];
      return da < db || (da == db && a < b);
    });
    order.resize(k);
    nearest[i] = order;
    for (std::size_t j : order) candidate_dists.push_back(dist[i * n + j]);
  }

  const double tau = percentile(candidate_dists, tau_percentile);

  WeightedGraph g;
  g.node_ids.assign(row_ids.begin(), row_ids.end());
  std::vector<bool> present(n * n, false);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : nearest[i]) {
      const double d = dist[i * n + j];
      if (d > tau) continue;
      const std::size_t u = std::min(i, j), v = std::max(i, j);
      if (present[u * n + v]) continue;
      present[u * n + v] = true;
      g.edges.push_back({static_cast<int>(u), static_cast<int>(v), 1.0 / (1.0 + d)});
    }
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
    return a.u < b.u || (a.u == b.u && a.v < b.v);
  });
  return g;
}

std::vector<Subgraph> split_subgraphs(const WeightedGraph& graph, std::size_t n_max,
                                      int parent_cluster) {
  if (n_max == 0) throw Error("split_subgraphs: n_max must be positive");
  const std::size_t n = graph.node_ids.size();
  const std::size_t blocks = n <= n_max ? 1 : (n + n_max - 1) / n_max;

  std::vector<Subgraph> out(blocks);
  std::vector<std::size_t> block_of(n);
  std::vector<int> local(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = std::min(i / n_max, blocks - 1);
    block_of[i] = b;
    local[i] = static_cast<int>(out[b].node_ids.size());
    out[b].node_ids.push_back(graph.node_ids[i]);
    out[b].parent_cluster = parent_cluster;
  }
  for (const auto& e : graph.edges) {
    const auto bu = block_of[static_cast<std::size_t>(e.u)];
    if (bu != block_of[static_cast<std::size_t>(e.v)]) continue;  // cross-block edges drop
    out[bu].edges.push_back({local[static_cast<std::size_t>(e.u)],
                             local[static_cast<std::size_t>(e.v)], e.w});
  }
  return out;
}

bool is_connected(const WeightedGraph& g) {
  const std::size_t n = g.node_ids.size();
  if (n == 0) return false;
  const auto adj = adjacency(g);
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (const auto& [v, w] : adj[u]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = true;
        ++reached;
        stack.push_back(static_cast<std::size_t>(v));
      }
    }
  }
  return reached == n;
}

double avg_shortest_path_length(const WeightedGraph& g, PathCost cost) {
  const std::size_t n = g.node_ids.size();
  if (n < 2) throw SingletonGraph("avg_shortest_path_length");
  if (!is_connected(g)) throw Disconnected("avg_shortest_path_length");

  const auto adj = adjacency(g);
  double total = 0.0;
  std::vector<double> d(n);
  using Item = std::pair<double, std::size_t>;
  for (std::size_t src = 0; src < n; ++src) {
    std::fill(d.begin(), d.end(), std::numeric_limits<double>::infinity());
    d[src] = 0.0;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.push({0.0, src});
    while (!pq.empty()) {
      const auto [du, u] = pq.top();
      pq.pop();
      if (du > d[u]) continue;
      for (const auto& [v, w] : adj[u]) {
        const double nd = du + edge_cost(w, cost);
        if (nd < d[static_cast<std::size_t>(v)]) {
          d[static_cast<std::size_t>(v)] = nd;
          pq.push({nd, static_cast<std::size_t>(v)});
        }
      }
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (v != src) total += d[v];
    }
  }
  return total / (static_cast<double>(n) * static_cast<double>(n - 1));
}

double modularity(const WeightedGraph& g, std::span<const int> labels_by_row) {
  if (g.edges.empty()) throw NoEdges("modularity");
  const std::size_t n = g.node_ids.size();

  std::vector<double> degree(n, 0.0);
  double two_m = 0.0;
  for (const auto& e : g.edges) {
    degree[static_cast<std::size_t>(e.u)] += e.w;
    degree[static_cast<std::size_t>(e.v)] += e.w;
    two_m += 2.0 * e.w;
  }

  // group accumulators: internal adjacency mass and total degree per label
  // (ordered map so the summation order is reproducible)
  std::map<int, double> group_degree;
  std::map<int, double> group_internal;
  for (std::size_t i = 0; i < n; ++i) {
    group_degree[labels_by_row[static_cast<std::size_t>(g.node_ids[i])]] += degree[i];
  }
  for (const auto& e : g.edges) {
    const int lu = labels_by_row[static_cast<std::size_t>(g.node_ids[static_cast<std::size_t>(e.u)])];
    const int lv = labels_by_row[static_cast<std::size_t>(g.node_ids[static_cast<std::size_t>(e.v)])];
    if (lu == lv) group_internal[lu] += 2.0 * e.w;  // ordered pairs (u,v) and (v,u)
  }

  double q = 0.0;
  for (const auto& [label, deg] : group_degree) {
    const auto it = group_internal.find(label);
    const double internal = it == group_internal.end() ? 0.0 : it->second;
    q += internal / two_m - (deg / two_m) * (deg / two_m);
  }
  return q;
}

std::vector<double> graph_laplacian(const WeightedGraph& g) {
  const std::size_t n = g.node_ids.size();
  std::vector<double> lap(n * n, 0.0);
  for (const auto& e : g.edges) {
    const auto u = static_cast<std::size_t>(e.u), v = static_cast<std::size_t>(e.v);
    lap[u * n + v] -= e.w;
    lap[v * n + u] -= e.w;
    lap[u * n + u] += e.w;
    lap[v * n + v] += e.w;
  }
  return lap;
}

std::vector<double> symmetric_eigenvalues(std::vector<double> a, std::size_t n) {
  if (n == 0) return {};
  std::vector<double> d(n, 0.0), e(n, 0.0);

  // Householder reduction to tridiagonal form (EISPACK tred1 layout)
  for (std::size_t i = n; i-- > 1;) {
    const std::size_t l = i - 1;
    double h = 0.0, scale = 0.0;
    if (l > 0) {
      for (std::size_t k = 0; k <= l; ++k) scale += std::fabs(a[i * n + k]);
      if (scale == 0.0) {
        e[i] = a[i * n + l];
      } else {
        for (std::size_t k = 0; k <= l; ++k) {
          a[i * n + k] /= scale;
          h += a[i * n + k] * a[i * n + k];
        }
        double f = a[i * n + l];
        double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        a[i * n + l] = f - g;
        f = 0.0;
        for (std::size_t j = 0; j <= l; ++j) {
          g = 0.0;
          for (std::size_t k = 0; k <= j; ++k) g += a[j * n + k] * a[i * n + k];
          for (std::size_t k = j + 1; k <= l; ++k) g += a[k * n + j] * a[i * n + k];
          e[j] = g / h;
          f += e[j] * a[i * n + j];
        }
        const double hh = f / (h + h);
        for (std::size_t j = 0; j <= l; ++j) {
          f = a[i * n + j];
          e[j] = g = e[j] - hh * f;
          for (std::size_t k = 0; k <= j; ++k)
            a[j * n + k] -= f * e[k] + g * a[i * n + k];
        }
      }
    } else {
      e[i] = a[i * n + l];
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i * n + i];

  // QL with implicit shifts on the tridiagonal (d, e)
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= 1e-300 + 2.3e-16 * dd) break;
      }
      if (m != l) {
        if (++iter == 50) throw NumericError("symmetric_eigenvalues: QL did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::fabs(r) : -std::fabs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (std::size_t i = m; i-- > l;) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }

  std::sort(d.begin(), d.end());
  return d;
}

double spectral_gap(const WeightedGraph& g) {
  const std::size_t n = g.node_ids.size();
  if (n < 2) throw SingletonGraph("spectral_gap");
  auto eig = symmetric_eigenvalues(graph_laplacian(g), n);
  return eig[1];
}

GraphMetrics aggregate_system_metrics(std::span<const Subgraph> subgraphs,
                                      std::span<const int> labels_by_row, PathCost cost) {
  if (subgraphs.empty()) throw NoEligibleSubgraphs("aggregate_system_metrics: no subgraphs");

  GraphMetrics out;
  double l_sum = 0.0, q_sum = 0.0, gap_sum = 0.0, deg_sum = 0.0;
  std::size_t l_count = 0, q_count = 0, gap_count = 0, n_total = 0;

  for (const auto& sg : subgraphs) {
    SubgraphMetrics sm;
    sm.nodes = sg.node_ids.size();
    sm.edges = sg.edges.size();
    n_total += sm.nodes;
    deg_sum += sm.nodes == 0 ? 0.0
                             : 2.0 * static_cast<double>(sm.edges) / static_cast<double>(sm.nodes);

    const bool multi = sm.nodes > 1;
    const bool connected = multi && is_connected(sg);
    if (connected) {
      sm.path_length = avg_shortest_path_length(sg, cost);
      l_sum += sm.path_length;
      ++l_count;
      sm.spectral_gap = spectral_gap(sg);
      gap_sum += sm.spectral_gap;
      ++gap_count;
    } else {
      sm.path_length = kNaN;
      sm.spectral_gap = multi ? spectral_gap(sg) : kNaN;  // reported, excluded from the mean
    }
    if (sm.edges > 0) {
      sm.modularity = modularity(sg, labels_by_row);
      q_sum += sm.modularity;
      ++q_count;
    } else {
      sm.modularity = kNaN;
    }
    out.per_subgraph.push_back(sm);
  }

  out.l_avg = l_count ? l_sum / static_cast<double>(l_count) : kNaN;
  out.q_mod = q_count ? q_sum / static_cast<double>(q_count) : kNaN;
  out.delta_spec = gap_count ? gap_sum / static_cast<double>(gap_count) : kNaN;
  out.d_avg = deg_sum / static_cast<double>(subgraphs.size());
  out.l_exp_sw = out.d_avg > 1.0
                     ? std::log(static_cast<double>(n_total)) / std::log(out.d_avg)
                     : kNaN;
  return out;
}

FeatureMatrix augment_feature_matrix(const FeatureMatrix& m, const GraphMetrics& metrics,
                                     const std::unordered_map<int, int>& node_to_subgraph,
                                     AugmentScope scope) {
  const double sys[3] = {metrics.l_avg, metrics.q_mod, metrics.delta_spec};
  auto fallback = [&](double v, double system) {
    if (!std::isnan(v)) return v;
    return std::isnan(system) ? 0.0 : system;
  };

  FeatureMatrix out;
  out.rows = m.rows;
  out.cols = m.cols + 3;
  out.names = m.names;
  out.names.insert(out.names.end(), {"graph_L", "graph_Q", "graph_gap"});
  out.labels = m.labels;
  out.segment_meta = m.segment_meta;
  out.values.resize(out.rows * out.cols);

  for (std::size_t r = 0; r < m.rows; ++r) {
    double triple[3];
    if (scope == AugmentScope::global) {
      for (int i = 0; i < 3; ++i) triple[i] = fallback(sys[i], sys[i]);
    } else {
      const auto it = node_to_subgraph.find(static_cast<int>(r));
      if (it == node_to_subgraph.end())
        throw UnmappedRow("augment_feature_matrix: row " + std::to_string(r));
      if (it->second < 0) {
        for (int i = 0; i < 3; ++i) triple[i] = fallback(kNaN, sys[i]);
      } else {
        const auto& sm = metrics.per_subgraph.at(static_cast<std::size_t>(it->second));
        triple[0] = fallback(sm.path_length, sys[0]);
        triple[1] = fallback(sm.modularity, sys[1]);
        triple[2] = fallback(sm.spectral_gap, sys[2]);
      }
    }
    const double* src = m.values.data() + r * m.cols;
    double* dst = out.values.data() + r * out.cols;
    std::copy(src, src + m.cols, dst);
    dst[m.cols] = triple[0];
    dst[m.cols + 1] = triple[1];
    dst[m.cols + 2] = triple[2];
  }
  return out;
}

}  // namespace gfd
