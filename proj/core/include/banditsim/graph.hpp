#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "banditsim/model.hpp"

namespace banditsim {

/// Named 0/1 columns of equal length (one entry per patient).
class BinaryMatrix {
 public:
  BinaryMatrix(std::vector<std::string> names, std::vector<std::vector<std::uint8_t>> columns);

  /// Binary feature columns of a dataset (numeric columns are skipped).
  static BinaryMatrix from_dataset(const Dataset& data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return columns_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<std::uint8_t>& column(std::size_t j) const { return columns_.at(j); }

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<std::uint8_t>> columns_;
  std::size_t rows_ = 0;
};

struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  double weight = 1.0;
};

/// Undirected simple graph over named nodes. No self-loops, no duplicate edges.
class SimilarityGraph {
 public:
  explicit SimilarityGraph(std::vector<std::string> nodes);

  void add_edge(std::size_t u, std::size_t v, double weight = 1.0);

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<std::string>& nodes() const noexcept { return nodes_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<std::size_t>& neighbors(std::size_t u) const { return adjacency_.at(u); }
  std::size_t degree(std::size_t u) const { return adjacency_.at(u).size(); }
  bool has_edge(std::size_t u, std::size_t v) const;

 private:
  std::vector<std::string> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

/// Group id per node, ids contiguous from 0 in order of first appearance.
struct Partition {
  std::vector<int> group;
  int group_count = 0;

  std::vector<std::vector<std::size_t>> members() const;
};

/// Relabels arbitrary group labels into the canonical contiguous form.
Partition canonical_partition(const std::vector<int>& labels);

struct CommunityResult {
  Partition partition;
  double modularity = 0.0;
};

/// Cosine of the angle between two 0/1 vectors; 0 when either is all zero.
double binary_cosine(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b);

/// Edge between two columns iff their cosine is >= threshold. All-zero columns stay isolated.
SimilarityGraph cosine_graph(const BinaryMatrix& matrix, double threshold);

Partition connected_components(const SimilarityGraph& graph);

/// Newman modularity of a partition on the unweighted adjacency; 0 for an edgeless graph.
double modularity(const SimilarityGraph& graph, const Partition& partition);

struct SpectralOptions {
  double min_gain = 1e-10;
  int max_iterations = 10000;
  double tolerance = 1e-9;
};

/// Leading-eigenvector community detection: each connected component is bisected
/// recursively by the sign of the leading eigenvector of its generalized modularity
/// matrix while the split raises modularity by more than options.min_gain.
CommunityResult spectral_communities(const SimilarityGraph& graph, const SpectralOptions& options = {});

/// Render-only filter: the subgraph induced by nodes of degree >= min_degree.
SimilarityGraph filter_min_degree(const SimilarityGraph& graph, std::size_t min_degree);

/// OR-pools member columns into one column per group, named "group_<id>".
BinaryMatrix pool_groups(const BinaryMatrix& matrix, const Partition& partition);

}  // namespace banditsim
