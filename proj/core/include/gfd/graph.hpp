#ifndef GFD_GRAPH_HPP
#define GFD_GRAPH_HPP

#include <cstddef>
#include <span>
#include <unordered_map>
#include <vector>

#include "gfd/feature_matrix.hpp"

namespace gfd {

struct WeightedEdge {
  int u = 0;  // indexes into node_ids, u < v
  int v = 0;
  double w = 0.0;  // similarity 1/(1+dist), in (0, 1]
};

struct WeightedGraph {
  std::vector<int> node_ids;  // global feature-matrix row per node
  std::vector<WeightedEdge> edges;
};

struct Subgraph : WeightedGraph {
  int parent_cluster = -1;
};

// Mutual candidate kNN: each node proposes its k = min(k_max, n-1) nearest
// neighbours by Euclidean distance; candidates farther than the
// tau_percentile-th percentile of all candidate distances are dropped; the
// surviving directed pairs are merged into undirected edges weighted
// 1/(1+dist). row_ids selects the rows (one cluster) and becomes node_ids.
WeightedGraph build_knn_graph(const FeatureMatrix& standardized,
                              std::span<const int> row_ids, int k_max,
                              double tau_percentile);

// Contiguous blocks of ceil(n / n_max) nodes in node-id order; edges are
// induced. A graph that already fits returns a single subgraph.
std::vector<Subgraph> split_subgraphs(const WeightedGraph& graph, std::size_t n_max,
                                      int parent_cluster = -1);

enum class PathCost {
  similarity,          // edge weight used directly as the path cost
  inverse_similarity,  // cost 1/w - 1 (recovers the underlying distance)
};

// Mean shortest-path cost over ordered node pairs (Dijkstra per source).
// Requires a connected graph with more than one node.
double avg_shortest_path_length(const WeightedGraph& g,
                                PathCost cost = PathCost::similarity);

// Newman modularity of the label partition on the weighted adjacency;
// labels_by_row is indexed by global row id. Requires at least one edge.
double modularity(const WeightedGraph& g, std::span<const int> labels_by_row);

// Second-smallest eigenvalue of the weighted Laplacian L = D - A. Requires
// more than one node.
double spectral_gap(const WeightedGraph& g);

// Dense row-major Laplacian, n x n.
std::vector<double> graph_laplacian(const WeightedGraph& g);

bool is_connected(const WeightedGraph& g);

// All eigenvalues of a dense symmetric matrix, ascending (Householder
// tridiagonalization + QL with implicit shifts).
std::vector<double> symmetric_eigenvalues(std::vector<double> a, std::size_t n);

struct SubgraphMetrics {
  double path_length = 0.0;   // NaN when disconnected or singleton
  double modularity = 0.0;    // NaN when edgeless
  double spectral_gap = 0.0;  // NaN when singleton
  std::size_t nodes = 0;
  std::size_t edges = 0;
};

struct GraphMetrics {
  std::vector<SubgraphMetrics> per_subgraph;
  double l_avg = 0.0;       // mean path length over connected subgraphs with > 1 node
  double q_mod = 0.0;       // mean modularity over subgraphs with edges
  double delta_spec = 0.0;  // mean spectral gap over connected subgraphs with > 1 node
  double d_avg = 0.0;       // mean of 2|E|/|V| across subgraphs
  double l_exp_sw = 0.0;    // ln(N) / ln(d_avg); NaN when d_avg <= 1
};

// Means skip subgraphs where a quantity is undefined; a mean with no eligible
// subgraph is NaN. Throws only when subgraphs is empty.
GraphMetrics aggregate_system_metrics(std::span<const Subgraph> subgraphs,
                                      std::span<const int> labels_by_row,
                                      PathCost cost = PathCost::similarity);

enum class AugmentScope { subgraph, global };

// Appends graph_L, graph_Q, graph_gap. subgraph scope: each row gets its own
// subgraph's metrics, with undefined values replaced by the system means
// (subgraph id -1 means "no subgraph": all three fall back). global scope:
// every row gets the system triple. Undefined fallbacks become 0.
FeatureMatrix augment_feature_matrix(const FeatureMatrix& m, const GraphMetrics& metrics,
                                     const std::unordered_map<int, int>& node_to_subgraph,
                                     AugmentScope scope);

}  // namespace gfd

#endif
