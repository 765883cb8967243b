#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "wasser_dual/error.hpp"
#include "wasser_dual/metric_space.hpp"

using namespace wd;

namespace {

DenseMatrix matrix(std::initializer_list<std::initializer_list<double>> rows) {
  DenseMatrix m(rows.size(), rows.begin()->size());
  std::size_t i = 0;
  for (const auto& r : rows) {
    std::size_t j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

std::vector<std::tuple<std::size_t, std::size_t, double>> random_connected_edges(
    std::mt19937_64& rng, std::size_t n, std::size_t extra) {
  std::uniform_int_distribution<int> weight(1, 16);
  std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
  for (std::size_t v = 1; v < n; ++v) {
    std::uniform_int_distribution<std::size_t> parent(0, v - 1);
    edges.emplace_back(parent(rng), v, weight(rng) / 4.0);
  }
  std::uniform_int_distribution<std::size_t> any(0, n - 1);
  for (std::size_t k = 0; k < extra; ++k) {
    const auto u = any(rng), v = any(rng);
    if (u != v) edges.emplace_back(u, v, weight(rng) / 4.0);
  }
  return edges;
}

WeightedGraph to_graph(std::size_t n, const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges) {
  WeightedGraph g(n);
  for (const auto& [u, v, w] : edges) g.add_edge(u, v, w);
  return g;
}

}  // namespace

TEST(ValidateMetric, TwoPointMetricIsValid) {
  EXPECT_TRUE(validate_metric(matrix({{0, 1}, {1, 0}})).ok);
}

TEST(ValidateMetric, ReportsTriangleViolation) {
  const auto report = validate_metric(matrix({{0, 1, 3}, {1, 0, 1}, {3, 1, 0}}));
  ASSERT_FALSE(report.ok);
  bool found = false;
  for (const auto& v : report.violations) {
    if (v.kind == MetricViolation::triangle && v.index == std::array<std::size_t, 3>{0, 1, 2}) found = true;
  }
  EXPECT_TRUE(found);
}

TEST(ValidateMetric, TriangleViolationsMatchBruteForce) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.5, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5;
    DenseMatrix d(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) d(i, j) = d(j, i) = unit(rng);
    std::size_t expected = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          if (d(i, k) > d(i, j) + d(j, k) + 1e-12) ++expected;
    EXPECT_EQ(validate_metric(d).violation_count, expected);
  }
}

TEST(ValidateMetric, SingletonIsValid) { EXPECT_TRUE(validate_metric(DenseMatrix(1, 1)).ok); }

TEST(ValidateMetric, FlagsOtherAxioms) {
  auto r = validate_metric(matrix({{0, 1}, {2, 0}}));
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.violations.front().kind, MetricViolation::asymmetric);
  r = validate_metric(matrix({{1, 1}, {1, 0}}));
  EXPECT_EQ(r.violations.front().kind, MetricViolation::nonzero_diagonal);
  r = validate_metric(matrix({{0, -1}, {-1, 0}}));
  EXPECT_EQ(r.violations.front().kind, MetricViolation::negative);
}

TEST(ValidateMetric, RejectsNonSquareAndNan) {
  EXPECT_THROW(validate_metric(DenseMatrix(2, 3)), MalformedInput);
  auto d = matrix({{0, 1}, {1, 0}});
  d(0, 1) = std::nan("");
  EXPECT_THROW(validate_metric(d), MalformedInput);
}

TEST(FiniteMetricSpace, FromMatrixRejectsNonMetric) {
  EXPECT_THROW(FiniteMetricSpace::from_matrix(matrix({{0, 1, 3}, {1, 0, 1}, {3, 1, 0}})),
               PreconditionError);
  const auto s = FiniteMetricSpace::from_matrix(matrix({{0, 2}, {2, 0}}));
  EXPECT_EQ(s.diameter(), 2.0);
  EXPECT_EQ(s.min_positive_distance(), 2.0);
}

TEST(ShortestPaths, PathGraph) {
  const auto s = shortest_path_space(path_graph(3));
  EXPECT_EQ(s(0, 2), 2.0);
}

TEST(ShortestPaths, FourCycleOppositeCorners) {
  const auto s = shortest_path_space(cycle_graph(4));
  EXPECT_EQ(s(0, 2), 2.0);
  EXPECT_EQ(s(1, 3), 2.0);
}

TEST(ShortestPaths, SingleVertex) {
  const auto s = shortest_path_space(WeightedGraph(1));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s(0, 0), 0.0);
}

TEST(ShortestPaths, DisconnectedGraphThrows) {
  WeightedGraph g(3);
  g.add_edge(0, 1, 1.0);
  EXPECT_THROW(shortest_path_space(g), PreconditionError);
}

TEST(ShortestPaths, NonPositiveWeightThrows) {
  WeightedGraph g(2);
  EXPECT_THROW(g.add_edge(0, 1, 0.0), PreconditionError);
  EXPECT_THROW(g.add_edge(0, 1, -1.0), PreconditionError);
}

TEST(ShortestPaths, MatchesBellmanFordAndValidatesExactly) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 3 + trial % 20;
    const auto edges = random_connected_edges(rng, n, n);
    const auto s = shortest_path_space(to_graph(n, edges));
    const auto ref = oracle::bellman_ford(n, edges);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(s(i, j), ref(i, j));
    EXPECT_TRUE(validate_metric(s.matrix(), 0.0).ok);
  }
}

TEST(ShortestPaths, ScalingIsLinear) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 8 + trial;
    const auto g = to_graph(n, random_connected_edges(rng, n, 2 * n));
    const auto base = shortest_path_space(g);
    for (double c : {0.5, 2.0, 4.0}) {
      const auto scaled = shortest_path_space(g.scaled(c));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(scaled(i, j), c * base(i, j));
    }
  }
}

TEST(Geodesic, PathGraph) {
  const auto s = shortest_path_space(path_graph(3));
  const auto g = minimal_geodesic(s, 0, 2);
  EXPECT_EQ(g.vertices, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(g.speed_parameters(), (std::vector<double>{0.0, 0.5, 1.0}));
}

TEST(Geodesic, TrivialPath) {
  const auto s = shortest_path_space(path_graph(3));
  const auto g = minimal_geodesic(s, 1, 1);
  EXPECT_EQ(g.vertices, (std::vector<std::size_t>{1}));
  EXPECT_EQ(g.length(), 0.0);
}

TEST(Geodesic, FourCycleTieRule) {
  const auto s = shortest_path_space(cycle_graph(4));
  EXPECT_EQ(minimal_geodesic(s, 0, 2).vertices, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(minimal_geodesic(s, 1, 3).vertices, (std::vector<std::size_t>{1, 0, 3}));
}

TEST(Geodesic, LengthMatchesDistance) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 10 + trial;
    const auto s = shortest_path_space(to_graph(n, random_connected_edges(rng, n, n)));
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) {
        const auto g = minimal_geodesic(s, x, y);
        EXPECT_NEAR(g.length(), s(x, y), 1e-12);
        EXPECT_EQ(g.vertices.front(), x);
        EXPECT_EQ(g.vertices.back(), y);
      }
  }
}

TEST(Builders, TorusAndInterval) {
  const auto t = torus_space(8);
  EXPECT_DOUBLE_EQ((*t)(0, 4), 0.5);
  EXPECT_DOUBLE_EQ((*t)(1, 7), 0.25);
  EXPECT_DOUBLE_EQ(t->nearest_distance(3), 0.125);
  const auto i = unit_interval_space(5);
  EXPECT_DOUBLE_EQ((*i)(0, 4), 1.0);
  EXPECT_TRUE(i->graph().has_value());
}

TEST(EdgeList, ParsesCommentsAndReportsBadLines) {
  std::istringstream ok("# header\n0 1 1.5\n\n1 2 2\n");
  const auto g = read_edge_list(ok);
  EXPECT_EQ(g.vertex_count(), 3u);
  EXPECT_EQ(shortest_path_space(g)(0, 2), 3.5);
  std::istringstream bad("0 1 x\n");
  EXPECT_THROW(read_edge_list(bad), MalformedInput);
}

TEST(EdgeList, WritesMetricCsv) {
  std::ostringstream out;
  write_metric_csv(out, shortest_path_space(path_graph(2)));
  EXPECT_NE(out.str().find('\n'), std::string::npos);
}
