#include "wasser_dual/slope.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wasser_dual/error.hpp"
#include "wasser_dual/parallel.hpp"

namespace wd {
namespace {

constexpr double kBallSlack = 1e-12;

void check_field(std::span<const double> f, const FiniteMetricSpace& d) {
  if (f.size() != d.size()) {
    throw PreconditionError("field has " + std::to_string(f.size()) + " values for " +
                            std::to_string(d.size()) + " points");
  }
  for (double v : f) {
    if (!std::isfinite(v)) throw PreconditionError("field has a non-finite value");
  }
}

double slope_at(std::span<const double> f, const FiniteMetricSpace& d, std::size_t z, double r) {
  const double reach = r * (1.0 + kBallSlack);
  const auto row = d.row(z);
  double best = 0.0;
  for (std::size_t w = 0; w < f.size(); ++w) {
    const double dist = row[w];
    if (dist > 0.0 && dist <= reach) best = std::max(best, std::abs(f[z] - f[w]) / dist);
  }
  return best;
}

}  // namespace

ScalarField ScalarField::from_values(SpacePtr space, std::vector<double> values) {
  if (!space) throw PreconditionError("field needs a space");
  if (values.size() != space->size()) {
    throw MalformedInput("field has " + std::to_string(values.size()) + " values for " +
                         std::to_string(space->size()) + " points");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw MalformedInput("field has a non-finite value");
  }
  return ScalarField{std::move(space), std::move(values)};
}

double ScalarField::sup_norm() const {
  double s = 0.0;
  for (double v : values) s = std::max(s, std::abs(v));
  return s;
}

double ScalarField::oscillation() const {
  if (values.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi - *lo;
}

double SlopeField::sup() const {
  double s = 0.0;
  for (double v : values) s = std::max(s, v);
  return s;
}

SlopeField slope_at_scale(const ScalarField& f, const FiniteMetricSpace& d, double r) {
  if (!(r > 0.0)) throw PreconditionError("slope radius must be positive");
  check_field(f.values, d);
  SlopeField g{f.space, std::vector<double>(f.size()), r};
  const auto n = static_cast<long>(f.size());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long z = 0; z < n; ++z) {
    g.values[static_cast<std::size_t>(z)] = slope_at(f.values, d, static_cast<std::size_t>(z), r);
  }
  return g;
}

SlopeField local_slope(const ScalarField& f, const FiniteMetricSpace& d) {
  check_field(f.values, d);
  SlopeField g{f.space, std::vector<double>(f.size()), 0.0};
  const auto n = static_cast<long>(f.size());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long sz = 0; sz < n; ++sz) {
    const auto z = static_cast<std::size_t>(sz);
    const double r = d.nearest_distance(z);
    g.values[z] = r > 0.0 ? slope_at(f.values, d, z, r) : 0.0;
  }
  for (std::size_t z = 0; z < f.size(); ++z) g.scale = std::max(g.scale, d.nearest_distance(z));
  return g;
}

double lipschitz_constant(std::span<const double> f, const FiniteMetricSpace& d) {
  check_field(f, d);
  const auto n = static_cast<long>(f.size());
  double best = 0.0;
#pragma omp parallel for schedule(dynamic, 16) reduction(max : best) num_threads(thread_count())
  for (long sx = 0; sx < n; ++sx) {
    const auto x = static_cast<std::size_t>(sx);
    const auto row = d.row(x);
    for (std::size_t y = x + 1; y < f.size(); ++y) {
      if (row[y] > 0.0) best = std::max(best, std::abs(f[x] - f[y]) / row[y]);
    }
  }
  return best;
}

double lipschitz_constant(const ScalarField& f, const FiniteMetricSpace& d) {
  return lipschitz_constant(std::span<const double>(f.values), d);
}

double upper_gradient_check(const ScalarField& f, const SlopeField& g, const DiscretePath& path) {
  if (path.vertices.empty()) throw PreconditionError("empty path");
  if (path.cumulative_length.size() != path.vertices.size()) {
    throw PreconditionError("path lengths do not match its vertices");
  }
  if (g.values.size() != f.values.size()) throw PreconditionError("slope field size mismatch");
  double integral = 0.0;
  for (std::size_t k = 0; k + 1 < path.vertices.size(); ++k) {
    const auto a = path.vertices[k];
    const auto b = path.vertices[k + 1];
    if (a >= f.size() || b >= f.size()) throw PreconditionError("path leaves the space");
    const double step = path.cumulative_length[k + 1] - path.cumulative_length[k];
    integral += 0.5 * (g.values[a] + g.values[b]) * step;
  }
  const double rise = std::abs(f.values[path.vertices.back()] - f.values[path.vertices.front()]);
  return integral - rise;
}

namespace serial {

SlopeField slope_at_scale(const ScalarField& f, const FiniteMetricSpace& d, double r) {
  if (!(r > 0.0)) throw PreconditionError("slope radius must be positive");
  check_field(f.values, d);
  SlopeField g{f.space, std::vector<double>(f.size()), r};
  for (std::size_t z = 0; z < f.size(); ++z) g.values[z] = slope_at(f.values, d, z, r);
  return g;
}

double lipschitz_constant(std::span<const double> f, const FiniteMetricSpace& d) {
  check_field(f, d);
  double best = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) {
    for (std::size_t y = x + 1; y < f.size(); ++y) {
      if (d(x, y) > 0.0) best = std::max(best, std::abs(f[x] - f[y]) / d(x, y));
    }
  }
  return best;
}

}  // namespace serial
}  // namespace wd
