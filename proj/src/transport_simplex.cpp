#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "wasser_dual/error.hpp"
#include "wasser_dual/transport.hpp"

namespace wd {
namespace {

// Nodes of the basis tree: rows are 0..m-1, columns m..m+n-1.
class BasisTree {
 public:
  BasisTree(std::size_t m, std::size_t n) : m_(m), n_(n), adjacency_(m + n) {}

  void add(std::size_t i, std::size_t j) {
    adjacency_[i].push_back(m_ + j);
    adjacency_[m_ + j].push_back(i);
  }

  void remove(std::size_t i, std::size_t j) {
    erase(adjacency_[i], m_ + j);
    erase(adjacency_[m_ + j], i);
  }

  // u_0 = 0, u_i + v_j = c_ij on every basic cell.
  void potentials(const DenseMatrix& cost, std::vector<double>& u, std::vector<double>& v) {
    u.assign(m_, 0.0);
    v.assign(n_, 0.0);
    seen_.assign(m_ + n_, 0);
    stack_.clear();
    stack_.push_back(0);
    seen_[0] = 1;
    while (!stack_.empty()) {
      const auto node = stack_.back();
      stack_.pop_back();
      for (auto next : adjacency_[node]) {
        if (seen_[next]) continue;
        seen_[next] = 1;
        if (node < m_) {
          v[next - m_] = cost(node, next - m_) - u[node];
        } else {
          u[next] = cost(next, node - m_) - v[node - m_];
        }
        stack_.push_back(next);
      }
    }
  }

  // Node sequence of the tree path from row i to column j.
  const std::vector<std::size_t>& path(std::size_t i, std::size_t j) {
    parent_.assign(m_ + n_, kNone);
    stack_.clear();
    stack_.push_back(i);
    parent_[i] = i;
    const auto target = m_ + j;
    while (!stack_.empty() && parent_[target] == kNone) {
      const auto node = stack_.back();
      stack_.pop_back();
      for (auto next : adjacency_[node]) {
        if (parent_[next] != kNone) continue;
        parent_[next] = node;
        stack_.push_back(next);
      }
    }
    if (parent_[target] == kNone) throw SolverError("transport basis is not a spanning tree");
    path_.clear();
    for (auto node = target; node != i; node = parent_[node]) path_.push_back(node);
    path_.push_back(i);
    std::reverse(path_.begin(), path_.end());
    return path_;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  static void erase(std::vector<std::size_t>& list, std::size_t value) {
    auto it = std::find(list.begin(), list.end(), value);
    if (it != list.end()) {
      *it = list.back();
      list.pop_back();
    }
  }

  std::size_t m_;
  std::size_t n_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<char> seen_;
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> stack_;
  std::vector<std::size_t> path_;
};

void check_problem(std::span<const double> supply, std::span<const double> demand,
                   const DenseMatrix& cost) {
  if (supply.empty() || demand.empty()) throw PreconditionError("transport problem is empty");
  if (cost.rows() != supply.size() || cost.cols() != demand.size()) {
    throw PreconditionError("cost matrix shape does not match the marginals");
  }
  double total_supply = 0.0;
  double total_demand = 0.0;
  for (double s : supply) {
    if (!(s > 0.0) || !std::isfinite(s)) throw PreconditionError("supply must be positive");
    total_supply += s;
  }
  for (double d : demand) {
    if (!(d > 0.0) || !std::isfinite(d)) throw PreconditionError("demand must be positive");
    total_demand += d;
  }
  if (std::abs(total_supply - total_demand) > 1e-9 * std::max(total_supply, total_demand)) {
    throw PreconditionError("unbalanced transport problem: supply " + std::to_string(total_supply) +
                            " vs demand " + std::to_string(total_demand));
  }
  for (double c : cost.values()) {
    if (!std::isfinite(c)) throw PreconditionError("cost matrix has a non-finite entry");
  }
}

}  // namespace

TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  const DenseMatrix& cost) {
  check_problem(supply, demand, cost);
  const std::size_t m = supply.size();
  const std::size_t n = demand.size();

  TransportSolution solution;
  solution.plan = DenseMatrix(m, n);
  auto& flow = solution.plan;
  std::vector<char> basic(m * n, 0);
  BasisTree tree(m, n);

  // Northwest corner. When a row and a column run out together the row
  // advances, leaving a zero-mass basic cell in the next row.
  {
    std::vector<double> s(supply.begin(), supply.end());
    std::vector<double> d(demand.begin(), demand.end());
    std::size_t i = 0;
    std::size_t j = 0;
    while (true) {
      const bool last = i == m - 1 && j == n - 1;
      const double x = last ? std::max(0.0, std::max(s[i], d[j])) : std::min(s[i], d[j]);
      flow(i, j) = x;
      basic[i * n + j] = 1;
      tree.add(i, j);
      if (last) break;
      if ((s[i] <= d[j] && i + 1 < m) || j + 1 == n) {
        d[j] -= s[i];
        s[i] = 0.0;
        ++i;
      } else {
        s[i] -= d[j];
        d[j] = 0.0;
        ++j;
      }
    }
  }

  double total = 0.0;
  for (double s : supply) total += s;
  const double degenerate_mass = 1e-15 * total;
  const std::size_t max_pivots = 50 * (m + n) * (m + n) + 1000;

  bool bland = false;
  auto& u = solution.u;
  auto& v = solution.v;
  while (true) {
    tree.potentials(cost, u, v);

    double basis_scale = 1.0;
    for (std::size_t k = 0; k < m * n; ++k) {
      if (basic[k]) basis_scale = std::max(basis_scale, std::abs(cost.values()[k]));
    }
    const double tolerance = 1e-12 * basis_scale;

    std::size_t enter_i = m;
    std::size_t enter_j = n;
    double best = -tolerance;
    for (std::size_t i = 0; i < m && !(bland && enter_i < m); ++i) {
      const auto c_row = cost.row(i);
      for (std::size_t j = 0; j < n; ++j) {
        if (basic[i * n + j]) continue;
        const double reduced = c_row[j] - u[i] - v[j];
        if (reduced < best) {
          enter_i = i;
          enter_j = j;
          if (bland) break;
          best = reduced;
        }
      }
    }
    if (enter_i == m) break;

    if (solution.pivots >= max_pivots) {
      throw SolverError("transport simplex exceeded " + std::to_string(max_pivots) + " pivots");
    }

    const auto& nodes = tree.path(enter_i, enter_j);
    // Edge k of the path joins nodes[k] and nodes[k+1]; even edges lose mass.
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave = m * n;
    for (std::size_t k = 0; k + 1 < nodes.size(); k += 2) {
      const std::size_t i = nodes[k];
      const std::size_t j = nodes[k + 1] - m;
      const std::size_t index = i * n + j;
      const double x = flow(i, j);
      if (x < theta || (x == theta && index < leave)) {
        theta = x;
        leave = index;
      }
    }
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
      const bool minus = k % 2 == 0;
      const std::size_t i = minus ? nodes[k] : nodes[k + 1];
      const std::size_t j = (minus ? nodes[k + 1] : nodes[k]) - m;
      flow(i, j) += minus ? -theta : theta;
    }
    flow(enter_i, enter_j) = theta;
    const std::size_t leave_i = leave / n;
    const std::size_t leave_j = leave % n;
    flow(leave_i, leave_j) = 0.0;
    basic[leave] = 0;
    tree.remove(leave_i, leave_j);
    basic[enter_i * n + enter_j] = 1;
    tree.add(enter_i, enter_j);

    ++solution.pivots;
    if (theta <= degenerate_mass) {
      ++solution.degenerate_pivots;
      bland = true;
    } else {
      bland = false;
    }
  }

  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) solution.cost += flow(i, j) * cost(i, j);
  }
  return solution;
}

}  // namespace wd
