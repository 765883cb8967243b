#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "wasser_dual/dense_matrix.hpp"
#include "wasser_dual/metric_space.hpp"

namespace wd {

/// Probability measure on the points of a finite metric space.
struct DiscreteMeasure {
  SpacePtr space;
  std::vector<double> weights;

  /// Validates nonnegativity, finiteness, length and unit mass (1e-12).
  static DiscreteMeasure from_weights(SpacePtr space, std::vector<double> weights);
  static DiscreteMeasure dirac(SpacePtr space, std::size_t point);
  static DiscreteMeasure uniform(SpacePtr space);

  std::size_t size() const noexcept { return weights.size(); }
  double integrate(std::span<const double> f) const;
};

/// Joint distribution on (source point, target point).
struct Coupling {
  DenseMatrix mass;
  std::vector<double> row_marginal;
  std::vector<double> col_marginal;

  /// Coupling with marginals recomputed from `mass`.
  static Coupling from_mass(DenseMatrix mass);
  static Coupling product(std::span<const double> mu, std::span<const double> nu);

  /// sum pi_ij * d_ij^p, i.e. ||d||_{L^p(pi)}^p.
  double cost_p(const DenseMatrix& dist, double p) const;
  /// max d_ij over the support of pi.
  double support_sup(const DenseMatrix& dist, double mass_threshold = 0.0) const;
  /// Largest marginal deviation from the given weights.
  double marginal_error(std::span<const double> mu, std::span<const double> nu) const;
};

/// Kantorovich pair: f on the target side, f* = c-transform on the source
/// side, with cost d^p. f is normalized so that f(0) = 0.
struct DualPotentials {
  std::vector<double> f;
  std::vector<double> f_star;
  double p = 1.0;
};

/// Exact solution of a balanced transportation problem.
struct TransportSolution {
  double cost = 0.0;
  DenseMatrix plan;            // supply.size() x demand.size()
  std::vector<double> u;       // row potentials, u_0 = 0
  std::vector<double> v;       // column potentials; u_i + v_j <= c_ij
  std::size_t pivots = 0;
  std::size_t degenerate_pivots = 0;
};

/// Transportation simplex: northwest-corner start, cycle pivoting on the
/// basis tree. Entering cells use the most negative reduced cost; after a
/// degenerate pivot the rule switches to Bland's (first eligible cell) until
/// the objective strictly decreases again. All masses must be positive and
/// the totals equal (relative 1e-9).
TransportSolution solve_transport(std::span<const double> supply,
                                  std::span<const double> demand, const DenseMatrix& cost);

/// Minimum-cost perfect matching on a square cost matrix (shortest
/// augmenting paths with potentials). Returns the column assigned to each row.
std::vector<std::size_t> solve_assignment(const DenseMatrix& cost, double* total = nullptr);

/// Largest flow through a bipartite network source -> rows (capacity
/// supply_i) -> columns over allowed cells (unbounded) -> sink (capacity
/// demand_j). Returns the flow value and fills `flow` (rows x cols).
double bipartite_max_flow(std::span<const double> supply, std::span<const double> demand,
                          const std::vector<std::vector<std::size_t>>& allowed, DenseMatrix& flow,
                          double epsilon = 1e-13);

struct WassersteinResult {
  double value = 0.0;
  Coupling plan;
  DualPotentials duals;
};

/// W_p over an explicit rectangular distance matrix (rows = support of mu).
/// Zero-mass points are dropped before solving and restored as zero rows or
/// columns. 1 <= p < inf.
WassersteinResult wasserstein_p(std::span<const double> mu, std::span<const double> nu,
                                const DenseMatrix& dist, double p);

/// W_p between measures on the same space under metric `d` (d may be a
/// second metric over the same points).
WassersteinResult wasserstein_p(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                const FiniteMetricSpace& d, double p);
WassersteinResult wasserstein_p(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p);

struct BottleneckResult {
  double value = 0.0;
  Coupling plan;
};

/// Minimal essential supremum of d over couplings: binary search over the
/// sorted distinct support distances with a max-flow feasibility test.
BottleneckResult wasserstein_inf(std::span<const double> mu, std::span<const double> nu,
                                 const DenseMatrix& dist);
BottleneckResult wasserstein_inf(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                 const FiniteMetricSpace& d);
BottleneckResult wasserstein_inf(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Above this exponent W_p is replaced by W_inf to stay inside double range.
inline constexpr double kLargestFiniteExponent = 300.0;

/// W_p for p in [1, inf]; p = +inf (or p > kLargestFiniteExponent) uses the
/// bottleneck solver.
double wasserstein_value(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         const FiniteMetricSpace& d, double p);
double wasserstein_value(std::span<const double> mu, std::span<const double> nu,
                         const DenseMatrix& dist, double p);

/// f*(y) = min_x { f(x) + d(x,y)^p }.
std::vector<double> c_transform(std::span<const double> f, const FiniteMetricSpace& d, double p);

/// W_p^p - (int f* dmu - int f dnu) for a target-side potential f.
double kantorovich_gap(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                       const FiniteMetricSpace& d, double p, std::span<const double> f);

/// int f dmu - int f dnu for a 1-Lipschitz f; throws PreconditionError with
/// the measured constant when Lip(f) > 1 + 1e-12.
double rubinstein_value(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                        const FiniteMetricSpace& d, std::span<const double> f);

/// 1-Lipschitz potential extracted from the W_1 dual (the c-transform of the
/// LP target potential); attains W_1 in rubinstein_value.
std::vector<double> rubinstein_certificate(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                           const FiniteMetricSpace& d);

using CouplingFamily = std::map<std::pair<std::size_t, std::size_t>, Coupling>;

/// sum_{x,y} pi(x,y) * P_{x,y}. Throws PreconditionError when the family has
/// no entry for a pair in the support of pi.
Coupling glue_couplings(const Coupling& pi, const CouplingFamily& family);

/// W_p for each p in an increasing list (p = inf allowed as last entry).
std::vector<double> wp_limit_sequence(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                      const FiniteMetricSpace& d, std::span<const double> p_list);

}  // namespace wd
