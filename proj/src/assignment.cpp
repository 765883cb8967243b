#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "wasser_dual/error.hpp"
#include "wasser_dual/transport.hpp"

namespace wd {

// Shortest augmenting paths with row/column potentials (Hungarian method),
// O(n^3). Index 0 is a sentinel column.
std::vector<std::size_t> solve_assignment(const DenseMatrix& cost, double* total) {
  const std::size_t n = cost.rows();
  if (n == 0 || cost.cols() != n) throw PreconditionError("assignment needs a square cost matrix");
  for (double c : cost.values()) {
    if (!std::isfinite(c)) throw PreconditionError("assignment cost has a non-finite entry");
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), min_slack(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);

  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[col0] = 1;
      const std::size_t i0 = match[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double slack = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (slack < min_slack[j]) {
          min_slack[j] = slack;
          way[j] = col0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          col1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
  if (total) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += cost(i, assignment[i]);
    *total = sum;
  }
  return assignment;
}

}  // namespace wd
