#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wasser_dual/metric_space.hpp"

namespace wd {

/// Function values on the points of a space.
struct ScalarField {
  SpacePtr space;
  std::vector<double> values;

  static ScalarField from_values(SpacePtr space, std::vector<double> values);
  std::size_t size() const noexcept { return values.size(); }
  double sup_norm() const;
  double oscillation() const;
};

/// Nonnegative slope values measured at a radius.
struct SlopeField {
  SpacePtr space;
  std::vector<double> values;
  /// Radius used. For nearest-neighbor shells this is the largest per-point
  /// radius.
  double scale = 0.0;

  double sup() const;
};

/// G_r(z) = max over 0 < d(z,w) <= r of |f(z) - f(w)| / d(z,w); 0 where the
/// punctured ball is empty. Throws PreconditionError for r <= 0.
SlopeField slope_at_scale(const ScalarField& f, const FiniteMetricSpace& d, double r);

/// Nearest-neighbor shell slope: at each x, slope_at_scale with r equal to
/// the distance from x to its nearest distinct point. This is the discrete
/// stand-in for the r -> 0 limit.
SlopeField local_slope(const ScalarField& f, const FiniteMetricSpace& d);

/// max over x != y of |f(x) - f(y)| / d(x,y); 0 on a single point.
double lipschitz_constant(const ScalarField& f, const FiniteMetricSpace& d);
double lipschitz_constant(std::span<const double> f, const FiniteMetricSpace& d);

/// Trapezoid path integral of g along `path` minus |f(end) - f(start)|.
double upper_gradient_check(const ScalarField& f, const SlopeField& g, const DiscretePath& path);

/// Slack allowed in upper_gradient_check at mesh h: 2 * Lip(f) * h.
inline double upper_gradient_tolerance(double lipschitz, double mesh) {
  return 2.0 * lipschitz * mesh;
}

namespace serial {
SlopeField slope_at_scale(const ScalarField& f, const FiniteMetricSpace& d, double r);
double lipschitz_constant(std::span<const double> f, const FiniteMetricSpace& d);
}  // namespace serial

}  // namespace wd
