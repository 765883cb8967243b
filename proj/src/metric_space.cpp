#include "wasser_dual/metric_space.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>

#include "wasser_dual/csv_io.hpp"
#include "wasser_dual/error.hpp"
#include "wasser_dual/parallel.hpp"

namespace wd {
namespace {

constexpr double kInfDistance = std::numeric_limits<double>::infinity();

void check_square_finite(const DenseMatrix& dist) {
  if (dist.rows() != dist.cols()) {
    throw MalformedInput("distance matrix must be square, got " + std::to_string(dist.rows()) +
                         "x" + std::to_string(dist.cols()));
  }
  for (double v : dist.values()) {
    if (!std::isfinite(v)) throw MalformedInput("distance matrix has a non-finite entry");
  }
}

std::vector<std::string> default_ids(std::size_t n) {
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i);
  return ids;
}

}  // namespace

// ---------------------------------------------------------------------------
// WeightedGraph

WeightedGraph::WeightedGraph(std::size_t vertex_count) : adjacency_(vertex_count) {}

WeightedGraph::WeightedGraph(std::size_t vertex_count, std::vector<Edge> edges)
    : adjacency_(vertex_count) {
  for (const auto& e : edges) add_edge(e.u, e.v, e.weight);
}

void WeightedGraph::add_edge(std::size_t u, std::size_t v, double weight) {
  if (u >= vertex_count() || v >= vertex_count()) {
    throw MalformedInput("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                         ") references a vertex outside 0.." + std::to_string(vertex_count()));
  }
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw PreconditionError("edge weights must be positive and finite");
  }
  if (u == v) return;  // loops never shorten a path
  edges_.push_back({u, v, weight});
  auto insert = [](std::vector<Neighbor>& list, std::size_t vertex, double w) {
    auto it = std::lower_bound(list.begin(), list.end(), vertex,
                               [](const Neighbor& n, std::size_t x) { return n.vertex < x; });
    if (it != list.end() && it->vertex == vertex) {
      it->weight = std::min(it->weight, w);  // parallel edges: keep the shortest
    } else {
      list.insert(it, Neighbor{vertex, w});
    }
  };
  insert(adjacency_[u], v, weight);
  insert(adjacency_[v], u, weight);
}

bool WeightedGraph::connected() const {
  if (vertex_count() == 0) return true;
  std::vector<char> seen(vertex_count(), 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    auto v = stack.back();
    stack.pop_back();
    for (const auto& n : adjacency_[v]) {
      if (!seen[n.vertex]) {
        seen[n.vertex] = 1;
        ++count;
        stack.push_back(n.vertex);
      }
    }
  }
  return count == vertex_count();
}

WeightedGraph WeightedGraph::scaled(double factor) const {
  WeightedGraph g(vertex_count());
  for (const auto& e : edges_) g.add_edge(e.u, e.v, e.weight * factor);
  return g;
}

// ---------------------------------------------------------------------------
// FiniteMetricSpace

FiniteMetricSpace::FiniteMetricSpace(DenseMatrix dist, std::vector<std::string> ids,
                                     std::optional<WeightedGraph> graph)
    : dist_(std::move(dist)), ids_(std::move(ids)), graph_(std::move(graph)) {
  if (ids_.empty()) ids_ = default_ids(dist_.rows());
  if (ids_.size() != dist_.rows()) {
    throw MalformedInput("point identifier count does not match the distance matrix");
  }
  min_positive_ = kInfDistance;
  for (double v : dist_.values()) {
    diameter_ = std::max(diameter_, v);
    if (v > 0.0) min_positive_ = std::min(min_positive_, v);
  }
  if (min_positive_ == kInfDistance) min_positive_ = 0.0;
}

FiniteMetricSpace FiniteMetricSpace::from_matrix(DenseMatrix dist, std::vector<std::string> ids) {
  auto report = validate_metric(dist);
  if (!report.ok) {
    const auto& v = report.violations.front();
    throw PreconditionError("matrix is not a metric: " + std::to_string(report.violation_count) +
                            " violation(s), first at (" + std::to_string(v.index[0]) + ", " +
                            std::to_string(v.index[1]) + ", " + std::to_string(v.index[2]) + ")");
  }
  return FiniteMetricSpace(std::move(dist), std::move(ids), std::nullopt);
}

FiniteMetricSpace FiniteMetricSpace::trusted(DenseMatrix dist, std::vector<std::string> ids,
                                             std::optional<WeightedGraph> graph) {
  check_square_finite(dist);
  return FiniteMetricSpace(std::move(dist), std::move(ids), std::move(graph));
}

double FiniteMetricSpace::nearest_distance(std::size_t x) const {
  double best = kInfDistance;
  for (double v : dist_.row(x)) {
    if (v > 0.0) best = std::min(best, v);
  }
  return best == kInfDistance ? 0.0 : best;
}

FiniteMetricSpace FiniteMetricSpace::scaled(double c) const {
  if (!(c > 0.0)) throw PreconditionError("scale factor must be positive");
  DenseMatrix scaled = dist_;
  for (double& v : scaled.storage()) v *= c;
  std::optional<WeightedGraph> graph;
  if (graph_) graph = graph_->scaled(c);
  return FiniteMetricSpace(std::move(scaled), ids_, std::move(graph));
}

bool FiniteMetricSpace::same_geometry(const FiniteMetricSpace& other) const {
  return this == &other || dist_ == other.dist_;
}

// ---------------------------------------------------------------------------
// Validation

ValidationReport validate_metric(const DenseMatrix& dist, double tolerance,
                                 std::size_t max_reported) {
  check_square_finite(dist);
  const std::size_t n = dist.rows();
  ValidationReport report;
  auto record = [&](MetricViolation kind, std::size_t i, std::size_t j, std::size_t k) {
    report.ok = false;
    ++report.violation_count;
    if (report.violations.size() < max_reported) report.violations.push_back({kind, {i, j, k}});
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(dist(i, i)) > tolerance) record(MetricViolation::nonzero_diagonal, i, i, i);
    for (std::size_t j = 0; j < n; ++j) {
      if (dist(i, j) < -tolerance) record(MetricViolation::negative, i, j, j);
      if (j > i && std::abs(dist(i, j) - dist(j, i)) > tolerance) {
        record(MetricViolation::asymmetric, i, j, j);
      }
    }
  }
  // Triangle inequality: rows i are independent, merged in order afterwards.
  std::vector<std::vector<std::array<std::size_t, 3>>> per_row(n);
  std::vector<std::size_t> per_row_count(n, 0);
  const auto rows = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 8) num_threads(thread_count())
  for (long si = 0; si < rows; ++si) {
    const auto i = static_cast<std::size_t>(si);
    for (std::size_t j = 0; j < n; ++j) {
      const double dij = dist(i, j);
      for (std::size_t k = 0; k < n; ++k) {
        if (dist(i, k) > dij + dist(j, k) + tolerance) {
          ++per_row_count[i];
          if (per_row[i].size() < max_reported) per_row[i].push_back({i, j, k});
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& t : per_row[i]) {
      if (report.violations.size() < max_reported) {
        report.violations.push_back({MetricViolation::triangle, t});
      }
    }
    if (per_row_count[i] > 0) {
      report.ok = false;
      report.violation_count += per_row_count[i];
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Shortest paths

namespace {

std::vector<double> dijkstra(const WeightedGraph& graph, std::size_t source) {
  std::vector<double> dist(graph.vertex_count(), kInfDistance);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    auto [d, v] = queue.top();
    queue.pop();
    if (d > dist[v]) continue;
    for (const auto& n : graph.neighbors(v)) {
      const double candidate = d + n.weight;
      if (candidate < dist[n.vertex]) {
        dist[n.vertex] = candidate;
        queue.emplace(candidate, n.vertex);
      }
    }
  }
  return dist;
}

void check_graph(const WeightedGraph& graph) {
  if (graph.vertex_count() == 0) throw PreconditionError("graph has no vertices");
  if (!graph.connected()) {
    throw PreconditionError("graph is disconnected; distances would be infinite");
  }
}

}  // namespace

FiniteMetricSpace shortest_path_space(const WeightedGraph& graph) {
  check_graph(graph);
  const std::size_t n = graph.vertex_count();
  DenseMatrix dist(n, n);
  const auto sources = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 4) num_threads(thread_count())
  for (long s = 0; s < sources; ++s) {
    auto row = dijkstra(graph, static_cast<std::size_t>(s));
    std::copy(row.begin(), row.end(), dist.row(static_cast<std::size_t>(s)).begin());
  }
  // Summation order can differ between the two directions.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double m = std::min(dist(i, j), dist(j, i));
      dist(i, j) = m;
      dist(j, i) = m;
    }
  }
  return FiniteMetricSpace::trusted(std::move(dist), {}, graph);
}

namespace serial {

DenseMatrix floyd_warshall(const WeightedGraph& graph) {
  check_graph(graph);
  const std::size_t n = graph.vertex_count();
  DenseMatrix dist(n, n, kInfDistance);
  for (std::size_t i = 0; i < n; ++i) {
    dist(i, i) = 0.0;
    for (const auto& nb : graph.neighbors(i)) dist(i, nb.vertex) = nb.weight;
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double dik = dist(i, k);
      if (dik == kInfDistance) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const double candidate = dik + dist(k, j);
        if (candidate < dist(i, j)) dist(i, j) = candidate;
      }
    }
  }
  return dist;
}

}  // namespace serial

// ---------------------------------------------------------------------------
// Geodesics

std::vector<double> DiscretePath::speed_parameters() const {
  std::vector<double> s(cumulative_length.size(), 0.0);
  const double total = length();
  if (total <= 0.0) return s;
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = cumulative_length[k] / total;
  s.back() = 1.0;
  return s;
}

double DiscretePath::max_step() const {
  double best = 0.0;
  for (std::size_t k = 1; k < cumulative_length.size(); ++k) {
    best = std::max(best, cumulative_length[k] - cumulative_length[k - 1]);
  }
  return best;
}

DiscretePath minimal_geodesic(const FiniteMetricSpace& space, std::size_t x, std::size_t y) {
  if (x >= space.size() || y >= space.size()) throw MalformedInput("geodesic endpoint out of range");
  if (!space.graph()) {
    throw PreconditionError("minimal_geodesic needs the generating graph of the space");
  }
  const auto& graph = *space.graph();
  DiscretePath path;
  path.vertices.push_back(x);
  path.cumulative_length.push_back(0.0);
  std::size_t current = x;
  while (current != y) {
    const double remaining = space(current, y);
    const double slack = 1e-12 * std::max(1.0, remaining);
    std::size_t next = current;
    double step = 0.0;
    // Neighbor lists are sorted, so the first admissible neighbor gives the
    // lexicographically smallest continuation.
    for (const auto& nb : graph.neighbors(current)) {
      if (std::abs(nb.weight + space(nb.vertex, y) - remaining) <= slack &&
          space(nb.vertex, y) < remaining) {
        next = nb.vertex;
        step = nb.weight;
        break;
      }
    }
    if (next == current) throw SolverError("no shortest-path continuation found");
    path.vertices.push_back(next);
    path.cumulative_length.push_back(path.cumulative_length.back() + step);
    current = next;
  }
  return path;
}

// ---------------------------------------------------------------------------
// Builders

WeightedGraph path_graph(std::size_t n, double edge_length) {
  WeightedGraph g(n);
  for (std::size_t i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1, edge_length);
  return g;
}

WeightedGraph cycle_graph(std::size_t n, double edge_length) {
  WeightedGraph g = path_graph(n, edge_length);
  if (n > 2) g.add_edge(n - 1, 0, edge_length);
  if (n == 2) g.add_edge(1, 0, edge_length);
  return g;
}

SpacePtr unit_interval_space(std::size_t n) {
  if (n < 2) throw PreconditionError("interval discretization needs at least 2 points");
  const double h = 1.0 / static_cast<double>(n - 1);
  DenseMatrix dist(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      dist(i, j) = std::abs(static_cast<double>(i) - static_cast<double>(j)) * h;
    }
  }
  return std::make_shared<const FiniteMetricSpace>(
      FiniteMetricSpace::trusted(std::move(dist), {}, path_graph(n, h)));
}

SpacePtr torus_space(std::size_t n) {
  if (n < 3) throw PreconditionError("discrete torus needs at least 3 points");
  const double h = 1.0 / static_cast<double>(n);
  DenseMatrix dist(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = i > j ? i - j : j - i;
      dist(i, j) = static_cast<double>(std::min(k, n - k)) * h;
    }
  }
  return std::make_shared<const FiniteMetricSpace>(
      FiniteMetricSpace::trusted(std::move(dist), {}, cycle_graph(n, h)));
}

// ---------------------------------------------------------------------------
// I/O

WeightedGraph read_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  std::size_t max_vertex = 0;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string u_text, v_text, w_text, extra;
    if (!(fields >> u_text)) continue;
    if (!(fields >> v_text >> w_text) || (fields >> extra)) {
      throw MalformedInput("edge list line " + std::to_string(line_number) +
                           ": expected 'u v w'");
    }
    const std::string where = "edge list line " + std::to_string(line_number);
    Edge e;
    e.u = static_cast<std::size_t>(parse_u64(u_text, where + " (u)"));
    e.v = static_cast<std::size_t>(parse_u64(v_text, where + " (v)"));
    e.weight = parse_double(w_text, where + " (w)");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw MalformedInput(where + ": weight must be positive and finite");
    }
    max_vertex = std::max({max_vertex, e.u, e.v});
    edges.push_back(e);
  }
  if (edges.empty()) throw MalformedInput("edge list is empty");
  return WeightedGraph(max_vertex + 1, std::move(edges));
}

WeightedGraph read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedInput("cannot open edge list '" + path + "'");
  return read_edge_list(in);
}

void write_metric_csv(std::ostream& out, const FiniteMetricSpace& space) {
  const auto& ids = space.ids();
  for (std::size_t j = 0; j < ids.size(); ++j) out << (j ? "," : "") << ids[j];
  out << '\n';
  write_dense_csv(out, space.matrix());
}

}  // namespace wd
