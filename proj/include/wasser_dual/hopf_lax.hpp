#pragma once

#include <span>
#include <vector>

#include "wasser_dual/metric_space.hpp"
#include "wasser_dual/slope.hpp"

namespace wd {

/// L(s) = s^p / p for p > 1; conjugate L*(s) = s^q / q with 1/p + 1/q = 1.
class PowerLagrangian {
 public:
  explicit PowerLagrangian(double p);

  double p() const noexcept { return p_; }
  double q() const noexcept { return q_; }
  double operator()(double s) const;
  /// L*(s) in closed form. Throws PreconditionError for s < 0.
  double conjugate(double s) const;
  /// t * L(d / t), the action of a constant-speed move of length d in time t.
  double action(double distance, double t) const;

 private:
  double p_;
  double q_;
};

/// Q_t f(x) = min_y { f(y) + t L(d(x,y)/t) }; Q_0 f = f. Throws
/// PreconditionError for t < 0.
ScalarField hopf_lax(const ScalarField& f, double t, const PowerLagrangian& lagrangian,
                     const FiniteMetricSpace& d);

/// Index of the minimizing y for each x (smallest index on ties).
std::vector<std::size_t> hopf_lax_minimizers(const ScalarField& f, double t,
                                             const PowerLagrangian& lagrangian,
                                             const FiniteMetricSpace& d);

/// Closed-form L*(s) = s^q / q.
double legendre(const PowerLagrangian& lagrangian, double s);

/// sup over w in {0, step, 2 step, ..., w_max} of w s - L(w); grid cross-check
/// for legendre().
double legendre_numeric(const PowerLagrangian& lagrangian, double s, double w_max, double step);

/// sup norm of Q_t(Q_s f) - Q_{t+s} f.
double semigroup_defect(const ScalarField& f, double s, double t, const PowerLagrangian& lagrangian,
                        const FiniteMetricSpace& d);

/// r(x) = (Q_{t+sigma} f(x) - Q_t f(x)) / sigma + L*(|grad Q_t f|(x)), with
/// the slope taken on nearest-neighbor shells. The Hamilton-Jacobi equation
/// is taken with the sign d/dt Q_t f = -L*(|grad Q_t f|).
std::vector<double> hj_residual(const ScalarField& f, double t, double sigma,
                                const PowerLagrangian& lagrangian, const FiniteMetricSpace& d);

struct SpaceTimeLipschitz {
  double measured = 0.0;   // max |Q_t f(x) - Q_s f(y)| / (|t-s| + d(x,y))
  double bound = 0.0;      // Lip(f) v L*(Lip(f))
  double tolerance = 0.0;  // mesh allowance
  bool holds() const { return measured <= bound + tolerance; }
};

/// Measures the space-time Lipschitz constant of (t, x) -> Q_t f(x) over the
/// grid `times` x points. Tolerance is 2 * bound * mesh, where mesh is the
/// largest nearest-neighbor distance.
SpaceTimeLipschitz hopf_lax_lipschitz_bound(const ScalarField& f, const PowerLagrangian& lagrangian,
                                            const FiniteMetricSpace& d,
                                            std::span<const double> times);

namespace serial {
ScalarField hopf_lax(const ScalarField& f, double t, const PowerLagrangian& lagrangian,
                     const FiniteMetricSpace& d);
}  // namespace serial

}  // namespace wd
