#include "banditsim/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <set>

#include "banditsim/errors.hpp"

namespace banditsim {

BinaryMatrix::BinaryMatrix(std::vector<std::string> names, std::vector<std::vector<std::uint8_t>> columns)
    : names_(std::move(names)), columns_(std::move(columns)) {
  if (names_.size() != columns_.size()) throw SchemaError("BinaryMatrix: names/columns size mismatch");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (!seen.insert(n).second) throw SchemaError("BinaryMatrix: duplicate column '" + n + "'");
  }
  rows_ = columns_.empty() ? 0 : columns_.front().size();
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].size() != rows_) throw SchemaError("BinaryMatrix: ragged column '" + names_[j] + "'");
    for (auto v : columns_[j]) {
      if (v > 1) throw SchemaError("BinaryMatrix: non-binary entry in column '" + names_[j] + "'");
    }
  }
}

BinaryMatrix BinaryMatrix::from_dataset(const Dataset& data) {
  std::vector<std::string> names;
  std::vector<std::vector<std::uint8_t>> cols;
  const auto& columns = data.schema.columns();
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].kind != ColumnKind::kBinary) continue;
    names.push_back(columns[j].name);
    std::vector<std::uint8_t> col(data.rows.size());
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
      col[i] = data.rows[i].context.features[j] != 0.0 ? 1 : 0;
    }
    cols.push_back(std::move(col));
  }
  return BinaryMatrix(std::move(names), std::move(cols));
}

SimilarityGraph::SimilarityGraph(std::vector<std::string> nodes)
    : nodes_(std::move(nodes)), adjacency_(nodes_.size()) {}

void SimilarityGraph::add_edge(std::size_t u, std::size_t v, double weight) {
  if (u >= nodes_.size() || v >= nodes_.size()) throw DomainError("add_edge: node index out of range");
  if (u == v) throw DomainError("add_edge: self-loops are not allowed");
  if (has_edge(u, v)) return;
  edges_.push_back({std::min(u, v), std::max(u, v), weight});
  adjacency_[u].push_back(v);
  adjacency_[v].push_back(u);
}

bool SimilarityGraph::has_edge(std::size_t u, std::size_t v) const {
  const auto& a = adjacency_.at(u);
  return std::find(a.begin(), a.end(), v) != a.end();
}

std::vector<std::vector<std::size_t>> Partition::members() const {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(group_count));
  for (std::size_t i = 0; i < group.size(); ++i) out[static_cast<std::size_t>(group[i])].push_back(i);
  return out;
}

Partition canonical_partition(const std::vector<int>& labels) {
  Partition p;
  p.group.resize(labels.size());
  std::map<int, int> remap;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = remap.emplace(labels[i], p.group_count);
    if (inserted) ++p.group_count;
    p.group[i] = it->second;
  }
  return p;
}

double binary_cosine(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  if (a.size() != b.size()) throw DomainError("binary_cosine: length mismatch");
  std::size_t na = 0, nb = 0, both = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += a[i];
    nb += b[i];
    both += a[i] & b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return static_cast<double>(both) / std::sqrt(static_cast<double>(na) * static_cast<double>(nb));
}

SimilarityGraph cosine_graph(const BinaryMatrix& matrix, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw DomainError("cosine_graph: threshold must lie in [0,1]");
  if (matrix.rows() < 1) throw DomainError("cosine_graph: matrix has no rows");

  const std::size_t n_cols = matrix.cols();
  std::vector<std::vector<std::size_t>> support(n_cols);
  for (std::size_t j = 0; j < n_cols; ++j) {
    const auto& col = matrix.column(j);
    for (std::size_t i = 0; i < col.size(); ++i) {
      if (col[i]) support[j].push_back(i);
    }
  }

  SimilarityGraph graph(matrix.names());
  const double t2 = threshold * threshold;
  for (std::size_t a = 0; a < n_cols; ++a) {
    if (support[a].empty()) continue;
    const auto& col_a = matrix.column(a);
    for (std::size_t b = a + 1; b < n_cols; ++b) {
      if (support[b].empty()) continue;
      std::size_t both = 0;
      for (std::size_t i : support[b]) both += col_a[i];
      const double na = static_cast<double>(support[a].size());
      const double nb = static_cast<double>(support[b].size());
      const double dot = static_cast<double>(both);
      // cos >= t  <=>  dot^2 >= t^2 * na * nb, exact for t = 1 on integer counts.
      if (dot * dot >= t2 * na * nb) graph.add_edge(a, b, dot / std::sqrt(na * nb));
    }
  }
  return graph;
}

Partition connected_components(const SimilarityGraph& graph) {
  const std::size_t n = graph.node_count();
  std::vector<int> label(n, -1);
  int next = 0;
  for (std::size_t start = 0; start < n; ++start) {
    if (label[start] >= 0) continue;
    std::queue<std::size_t> frontier;
    frontier.push(start);
    label[start] = next;
    while (!frontier.empty()) {
      const auto u = frontier.front();
      frontier.pop();
      for (auto v : graph.neighbors(u)) {
        if (label[v] < 0) {
          label[v] = next;
          frontier.push(v);
        }
      }
    }
    ++next;
  }
  return canonical_partition(label);
}

double modularity(const SimilarityGraph& graph, const Partition& partition) {
  if (partition.group.size() != graph.node_count()) throw DomainError("modularity: partition size mismatch");
  const double m = static_cast<double>(graph.edge_count());
  if (m == 0.0) return 0.0;
  std::vector<double> internal(static_cast<std::size_t>(partition.group_count), 0.0);
  std::vector<double> degree_sum(static_cast<std::size_t>(partition.group_count), 0.0);
  for (const auto& e : graph.edges()) {
    if (partition.group[e.u] == partition.group[e.v]) internal[static_cast<std::size_t>(partition.group[e.u])] += 1.0;
  }
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    degree_sum[static_cast<std::size_t>(partition.group[i])] += static_cast<double>(graph.degree(i));
  }
  double q = 0.0;
  for (std::size_t c = 0; c < internal.size(); ++c) {
    const double share = degree_sum[c] / (2.0 * m);
    q += internal[c] / m - share * share;
  }
  return q;
}

namespace {

/// Generalized modularity matrix B^(g) restricted to one group, applied implicitly.
class GroupModularity {
 public:
  GroupModularity(const SimilarityGraph& graph, const std::vector<std::size_t>& members)
      : graph_(graph), members_(members), local_(graph.node_count(), -1), k_(members.size()),
        row_sum_(members.size()) {
    two_m_ = 2.0 * static_cast<double>(graph.edge_count());
    for (std::size_t i = 0; i < members_.size(); ++i) local_[members_[i]] = static_cast<long>(i);
    double k_group = 0.0;
    for (std::size_t i = 0; i < members_.size(); ++i) {
      k_[i] = static_cast<double>(graph.degree(members_[i]));
      k_group += k_[i];
    }
    shift_ = 0.0;
    for (std::size_t i = 0; i < members_.size(); ++i) {
      double inside = 0.0;
      for (auto v : graph_.neighbors(members_[i])) {
        if (local_[v] >= 0) inside += 1.0;
      }
      row_sum_[i] = inside - k_[i] * k_group / two_m_;
      // Row-sum bound on |B^(g)|: adjacency + null-model + diagonal correction.
      shift_ = std::max(shift_, inside + k_[i] * k_group / two_m_ + std::abs(row_sum_[i]));
    }
  }

  std::size_t size() const noexcept { return members_.size(); }
  double shift() const noexcept { return shift_; }

  void apply(const std::vector<double>& x, std::vector<double>& out) const {
    double kx = 0.0;
    for (std::size_t i = 0; i < members_.size(); ++i) kx += k_[i] * x[i];
    for (std::size_t i = 0; i < members_.size(); ++i) {
      double ax = 0.0;
      for (auto v : graph_.neighbors(members_[i])) {
        const long j = local_[v];
        if (j >= 0) ax += x[static_cast<std::size_t>(j)];
      }
      out[i] = ax - k_[i] * kx / two_m_ - row_sum_[i] * x[i];
    }
  }

  double quadratic(const std::vector<double>& x) const {
    std::vector<double> bx(x.size());
    apply(x, bx);
    return std::inner_product(x.begin(), x.end(), bx.begin(), 0.0);
  }

  double two_m() const noexcept { return two_m_; }

 private:
  const SimilarityGraph& graph_;
  const std::vector<std::size_t>& members_;
  std::vector<long> local_;
  std::vector<double> k_;
  std::vector<double> row_sum_;
  double two_m_ = 0.0;
  double shift_ = 0.0;
};

void normalize(std::vector<double>& x) {
  double norm = 0.0;
  for (double v : x) norm += v * v;
  norm = std::sqrt(norm);
  if (norm > 0.0) {
    for (double& v : x) v /= norm;
  }
}

/// Sign vector of the leading eigenvector, or empty if no positive eigenvalue exists.
std::vector<double> leading_split(const GroupModularity& b, const SpectralOptions& options) {
  const std::size_t n = b.size();
  std::vector<double> x(n), next(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.5 * std::sin(1.0 + 2.0 * static_cast<double>(i));
  normalize(x);
  const double shift = b.shift();
  for (int it = 0; it < options.max_iterations; ++it) {
    b.apply(x, next);
    for (std::size_t i = 0; i < n; ++i) next[i] += shift * x[i];
    normalize(next);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(next[i] - x[i]));
    x.swap(next);
    if (change < options.tolerance) break;
  }
  if (b.quadratic(x) <= 0.0) return {};
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = x[i] >= 0.0 ? 1.0 : -1.0;
  return s;
}

}  // namespace

CommunityResult spectral_communities(const SimilarityGraph& graph, const SpectralOptions& options) {
  const std::size_t n = graph.node_count();
  if (n == 0) throw DomainError("spectral_communities: empty graph");

  std::vector<int> label(n, 0);
  if (graph.edge_count() == 0) {
    std::iota(label.begin(), label.end(), 0);
    return {canonical_partition(label), 0.0};
  }

  const Partition components = connected_components(graph);
  std::vector<std::vector<std::size_t>> pending = components.members();
  std::vector<std::vector<std::size_t>> done;
  while (!pending.empty()) {
    auto group = std::move(pending.back());
    pending.pop_back();
    if (group.size() < 2) {
      done.push_back(std::move(group));
      continue;
    }
    const GroupModularity b(graph, group);
    const auto s = leading_split(b, options);
    bool split = false;
    if (!s.empty()) {
      const double gain = b.quadratic(s) / (2.0 * b.two_m());
      std::vector<std::size_t> left, right;
      for (std::size_t i = 0; i < group.size(); ++i) (s[i] > 0 ? left : right).push_back(group[i]);
      if (gain > options.min_gain && !left.empty() && !right.empty()) {
        pending.push_back(std::move(right));
        pending.push_back(std::move(left));
        split = true;
      }
    }
    if (!split) done.push_back(std::move(group));
  }

  // Label groups by their smallest member so ids follow node order.
  std::sort(done.begin(), done.end(), [](const auto& a, const auto& b) {
    return *std::min_element(a.begin(), a.end()) < *std::min_element(b.begin(), b.end());
  });
  for (std::size_t g = 0; g < done.size(); ++g) {
    for (auto v : done[g]) label[v] = static_cast<int>(g);
  }
  CommunityResult result{canonical_partition(label), 0.0};
  result.modularity = modularity(graph, result.partition);
  return result;
}

SimilarityGraph filter_min_degree(const SimilarityGraph& graph, std::size_t min_degree) {
  std::vector<long> keep(graph.node_count(), -1);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    if (graph.degree(i) >= min_degree) {
      keep[i] = static_cast<long>(names.size());
      names.push_back(graph.nodes()[i]);
    }
  }
  SimilarityGraph out(std::move(names));
  for (const auto& e : graph.edges()) {
    if (keep[e.u] >= 0 && keep[e.v] >= 0) {
      out.add_edge(static_cast<std::size_t>(keep[e.u]), static_cast<std::size_t>(keep[e.v]), e.weight);
    }
  }
  return out;
}

BinaryMatrix pool_groups(const BinaryMatrix& matrix, const Partition& partition) {
  if (partition.group.size() != matrix.cols()) throw DomainError("pool_groups: partition size mismatch");
  std::vector<std::string> names;
  std::vector<std::vector<std::uint8_t>> cols(static_cast<std::size_t>(partition.group_count),
                                              std::vector<std::uint8_t>(matrix.rows(), 0));
  for (int g = 0; g < partition.group_count; ++g) names.push_back("group_" + std::to_string(g));
  for (std::size_t j = 0; j < matrix.cols(); ++j) {
    auto& dst = cols[static_cast<std::size_t>(partition.group[j])];
    const auto& src = matrix.column(j);
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] |= src[i];
  }
  return BinaryMatrix(std::move(names), std::move(cols));
}

}  // namespace banditsim
