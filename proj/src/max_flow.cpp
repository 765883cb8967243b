#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "wasser_dual/error.hpp"
#include "wasser_dual/transport.hpp"

namespace wd {
namespace {

class Dinic {
 public:
  explicit Dinic(std::size_t nodes, double epsilon)
      : graph_(nodes), level_(nodes), cursor_(nodes), epsilon_(epsilon) {}

  std::size_t add_edge(std::size_t from, std::size_t to, double capacity) {
    graph_[from].push_back({to, graph_[to].size(), capacity});
    graph_[to].push_back({from, graph_[from].size() - 1, 0.0});
    return graph_[from].size() - 1;
  }

  double run(std::size_t source, std::size_t sink) {
    double total = 0.0;
    while (levels(source, sink)) {
      std::fill(cursor_.begin(), cursor_.end(), 0);
      while (true) {
        const double pushed = push(source, sink, std::numeric_limits<double>::infinity());
        if (pushed <= epsilon_) break;
        total += pushed;
      }
    }
    return total;
  }

  double residual(std::size_t node, std::size_t edge) const { return graph_[node][edge].capacity; }

 private:
  struct Arc {
    std::size_t to;
    std::size_t reverse;
    double capacity;
  };

  bool levels(std::size_t source, std::size_t sink) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<std::size_t> queue;
    level_[source] = 0;
    queue.push(source);
    while (!queue.empty()) {
      const auto node = queue.front();
      queue.pop();
      for (const auto& arc : graph_[node]) {
        if (arc.capacity > epsilon_ && level_[arc.to] < 0) {
          level_[arc.to] = level_[node] + 1;
          queue.push(arc.to);
        }
      }
    }
    return level_[sink] >= 0;
  }

  double push(std::size_t node, std::size_t sink, double limit) {
    if (node == sink) return limit;
    for (auto& k = cursor_[node]; k < graph_[node].size(); ++k) {
      auto& arc = graph_[node][k];
      if (arc.capacity <= epsilon_ || level_[arc.to] != level_[node] + 1) continue;
      const double pushed = push(arc.to, sink, std::min(limit, arc.capacity));
      if (pushed > epsilon_) {
        arc.capacity -= pushed;
        graph_[arc.to][arc.reverse].capacity += pushed;
        return pushed;
      }
    }
    return 0.0;
  }

  std::vector<std::vector<Arc>> graph_;
  std::vector<int> level_;
  std::vector<std::size_t> cursor_;
  double epsilon_;
};

}  // namespace

double bipartite_max_flow(std::span<const double> supply, std::span<const double> demand,
                          const std::vector<std::vector<std::size_t>>& allowed, DenseMatrix& flow,
                          double epsilon) {
  const std::size_t m = supply.size();
  const std::size_t n = demand.size();
  if (allowed.size() != m) throw PreconditionError("allowed-cell list has the wrong row count");
  const std::size_t source = m + n;
  const std::size_t sink = m + n + 1;
  Dinic network(m + n + 2, epsilon);
  for (std::size_t i = 0; i < m; ++i) network.add_edge(source, i, supply[i]);
  for (std::size_t j = 0; j < n; ++j) network.add_edge(m + j, sink, demand[j]);
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> cell_arcs(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (auto j : allowed[i]) {
      if (j >= n) throw PreconditionError("allowed cell column out of range");
      cell_arcs[i].emplace_back(j, network.add_edge(i, m + j, std::min(supply[i], demand[j])));
    }
  }
  const double value = network.run(source, sink);
  flow = DenseMatrix(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (auto [j, arc] : cell_arcs[i]) {
      flow(i, j) = std::max(0.0, std::min(supply[i], demand[j]) - network.residual(i, arc));
    }
  }
  return value;
}

}  // namespace wd
