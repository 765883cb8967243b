#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wasser_dual/dense_matrix.hpp"

namespace wd {

struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  double weight = 0.0;
};

/// Undirected graph with positive edge weights. Neighbor lists are kept
/// sorted by vertex index so that traversals are deterministic.
class WeightedGraph {
 public:
  struct Neighbor {
    std::size_t vertex;
    double weight;
  };

  explicit WeightedGraph(std::size_t vertex_count = 0);
  WeightedGraph(std::size_t vertex_count, std::vector<Edge> edges);

  void add_edge(std::size_t u, std::size_t v, double weight);

  std::size_t vertex_count() const noexcept { return adjacency_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::span<const Neighbor> neighbors(std::size_t v) const { return adjacency_[v]; }
  std::size_t degree(std::size_t v) const { return adjacency_[v].size(); }
  bool connected() const;

  WeightedGraph scaled(double factor) const;

 private:
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

/// Finite metric space: dense distance matrix plus optional generating graph.
///
/// Immutable after construction; share through std::shared_ptr<const ...>.
class FiniteMetricSpace {
 public:
  /// Validates `dist` (square, finite, metric axioms within 1e-12) and throws
  /// MalformedInput / PreconditionError otherwise.
  static FiniteMetricSpace from_matrix(DenseMatrix dist, std::vector<std::string> ids = {});

  /// Builds without checking the triangle inequality. Used by constructions
  /// that are metric by design (shortest paths, closed-form distances).
  static FiniteMetricSpace trusted(DenseMatrix dist, std::vector<std::string> ids,
                                   std::optional<WeightedGraph> graph);

  std::size_t size() const noexcept { return dist_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return dist_(i, j); }
  std::span<const double> row(std::size_t i) const { return dist_.row(i); }
  const DenseMatrix& matrix() const noexcept { return dist_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::optional<WeightedGraph>& graph() const noexcept { return graph_; }

  double diameter() const noexcept { return diameter_; }
  /// Smallest strictly positive distance; 0 for a single point.
  double min_positive_distance() const noexcept { return min_positive_; }
  /// Distance from x to its nearest distinct point (0 if none).
  double nearest_distance(std::size_t x) const;

  /// Same points, every distance multiplied by c > 0.
  FiniteMetricSpace scaled(double c) const;

  bool same_geometry(const FiniteMetricSpace& other) const;

 private:
  FiniteMetricSpace(DenseMatrix dist, std::vector<std::string> ids,
                    std::optional<WeightedGraph> graph);

  DenseMatrix dist_;
  std::vector<std::string> ids_;
  std::optional<WeightedGraph> graph_;
  double diameter_ = 0.0;
  double min_positive_ = 0.0;
};

using SpacePtr = std::shared_ptr<const FiniteMetricSpace>;

enum class MetricViolation { negative, nonzero_diagonal, asymmetric, triangle };

struct Violation {
  MetricViolation kind;
  /// For `triangle`, (i, j, k) with d[i][k] > d[i][j] + d[j][k].
  /// Other kinds use (i, j, j).
  std::array<std::size_t, 3> index;
};

struct ValidationReport {
  bool ok = true;
  std::vector<Violation> violations;
  /// Number of violations found; the stored list is capped.
  std::size_t violation_count = 0;
};

/// Checks symmetry, zero diagonal, nonnegativity and the triangle inequality
/// within `tolerance`. Throws MalformedInput if `dist` is not square or has
/// non-finite entries.
ValidationReport validate_metric(const DenseMatrix& dist, double tolerance = 1e-12,
                                 std::size_t max_reported = 1000);

/// All-pairs shortest paths (Dijkstra per source, parallel over sources).
/// Throws PreconditionError for disconnected graphs or nonpositive weights.
FiniteMetricSpace shortest_path_space(const WeightedGraph& graph);

/// Ordered vertex sequence with running arc length.
struct DiscretePath {
  std::vector<std::size_t> vertices;
  std::vector<double> cumulative_length;

  double length() const { return cumulative_length.empty() ? 0.0 : cumulative_length.back(); }
  /// Constant-speed parameters s_k = cumulative_length[k] / length (all 0
  /// for a single-vertex path).
  std::vector<double> speed_parameters() const;
  /// Maximum single-edge length.
  double max_step() const;
};

/// Shortest path from x to y in the space's generating graph; among equal
/// length paths the lexicographically smallest vertex sequence.
DiscretePath minimal_geodesic(const FiniteMetricSpace& space, std::size_t x, std::size_t y);

// Builders for the spaces used in tests and experiments.

/// Path graph 0-1-...-(n-1) with the given edge length.
WeightedGraph path_graph(std::size_t n, double edge_length = 1.0);
/// Cycle graph on n vertices with the given edge length.
WeightedGraph cycle_graph(std::size_t n, double edge_length = 1.0);
/// Path-graph discretization of [0, 1] with n >= 2 points (mesh 1/(n-1)).
SpacePtr unit_interval_space(std::size_t n);
/// Unit-circumference discrete torus with n points (mesh 1/n).
SpacePtr torus_space(std::size_t n);

/// Parses `u v w` lines (0-based indices, decimal weights; '#' comments and
/// blank lines ignored).
WeightedGraph read_edge_list(std::istream& in);
WeightedGraph read_edge_list_file(const std::string& path);

/// CSV matrix with a header row of point identifiers.
void write_metric_csv(std::ostream& out, const FiniteMetricSpace& space);

namespace serial {
/// Floyd-Warshall reference for shortest_path_space.
DenseMatrix floyd_warshall(const WeightedGraph& graph);
}  // namespace serial

}  // namespace wd
