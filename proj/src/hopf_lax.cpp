#include "wasser_dual/hopf_lax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wasser_dual/error.hpp"
#include "wasser_dual/parallel.hpp"

namespace wd {
namespace {

void check_inputs(const ScalarField& f, double t, const FiniteMetricSpace& d) {
  if (std::isnan(t) || t < 0.0) throw PreconditionError("Hopf-Lax time must be >= 0");
  if (f.size() != d.size()) throw PreconditionError("field size does not match the space");
}

// Minimum and smallest minimizing index of f(y) + t L(d(x,y)/t).
std::pair<double, std::size_t> infimum_at(const ScalarField& f, double t,
                                          const PowerLagrangian& lagrangian,
                                          const FiniteMetricSpace& d, std::size_t x) {
  const auto row = d.row(x);
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = x;
  for (std::size_t y = 0; y < f.size(); ++y) {
    const double candidate = f.values[y] + lagrangian.action(row[y], t);
    if (candidate < best) {
      best = candidate;
      arg = y;
    }
  }
  return {best, arg};
}

}  // namespace

PowerLagrangian::PowerLagrangian(double p) : p_(p), q_(0.0) {
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw PreconditionError("power Lagrangian needs a finite p > 1, got " + std::to_string(p));
  }
  q_ = p / (p - 1.0);
}

double PowerLagrangian::operator()(double s) const {
  if (s < 0.0) throw PreconditionError("Lagrangian argument must be >= 0");
  return std::pow(s, p_) / p_;
}

double PowerLagrangian::conjugate(double s) const {
  if (std::isnan(s) || s < 0.0) throw PreconditionError("Legendre argument must be >= 0");
  return std::pow(s, q_) / q_;
}

double PowerLagrangian::action(double distance, double t) const {
  if (distance == 0.0) return 0.0;
  // t L(d/t) = d^p / (p t^{p-1})
  return std::pow(distance, p_) / (p_ * std::pow(t, p_ - 1.0));
}

ScalarField hopf_lax(const ScalarField& f, double t, const PowerLagrangian& lagrangian,
                     const FiniteMetricSpace& d) {
  check_inputs(f, t, d);
  if (t == 0.0) return f;
  ScalarField out{f.space, std::vector<double>(f.size())};
  const auto n = static_cast<long>(f.size());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long x = 0; x < n; ++x) {
    out.values[static_cast<std::size_t>(x)] =
        infimum_at(f, t, lagrangian, d, static_cast<std::size_t>(x)).first;
  }
  return out;
}

std::vector<std::size_t> hopf_lax_minimizers(const ScalarField& f, double t,
                                             const PowerLagrangian& lagrangian,
                                             const FiniteMetricSpace& d) {
  check_inputs(f, t, d);
  std::vector<std::size_t> arg(f.size());
  for (std::size_t x = 0; x < f.size(); ++x) {
    arg[x] = t == 0.0 ? x : infimum_at(f, t, lagrangian, d, x).second;
  }
  return arg;
}

double legendre(const PowerLagrangian& lagrangian, double s) { return lagrangian.conjugate(s); }

double legendre_numeric(const PowerLagrangian& lagrangian, double s, double w_max, double step) {
  if (std::isnan(s) || s < 0.0) throw PreconditionError("Legendre argument must be >= 0");
  if (!(step > 0.0) || !(w_max >= 0.0)) throw PreconditionError("bad Legendre grid");
  double best = 0.0;
  const auto count = static_cast<std::size_t>(std::floor(w_max / step + 1e-9));
  for (std::size_t k = 0; k <= count; ++k) {
    const double w = static_cast<double>(k) * step;
    best = std::max(best, w * s - lagrangian(w));
  }
  return best;
}

double semigroup_defect(const ScalarField& f, double s, double t, const PowerLagrangian& lagrangian,
                        const FiniteMetricSpace& d) {
  if (!(s > 0.0) || !(t > 0.0)) throw PreconditionError("semigroup times must be positive");
  const auto composed = hopf_lax(hopf_lax(f, s, lagrangian, d), t, lagrangian, d);
  const auto direct = hopf_lax(f, s + t, lagrangian, d);
  double defect = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) {
    defect = std::max(defect, std::abs(composed.values[x] - direct.values[x]));
  }
  return defect;
}

std::vector<double> hj_residual(const ScalarField& f, double t, double sigma,
                                const PowerLagrangian& lagrangian, const FiniteMetricSpace& d) {
  if (!(t > 0.0) || !(sigma > 0.0)) throw PreconditionError("t and sigma must be positive");
  const auto now = hopf_lax(f, t, lagrangian, d);
  const auto later = hopf_lax(f, t + sigma, lagrangian, d);
  const auto slope = local_slope(now, d);
  std::vector<double> r(f.size());
  for (std::size_t x = 0; x < f.size(); ++x) {
    r[x] = (later.values[x] - now.values[x]) / sigma + lagrangian.conjugate(slope.values[x]);
  }
  return r;
}

SpaceTimeLipschitz hopf_lax_lipschitz_bound(const ScalarField& f, const PowerLagrangian& lagrangian,
                                            const FiniteMetricSpace& d,
                                            std::span<const double> times) {
  if (times.empty()) throw PreconditionError("time grid is empty");
  std::vector<std::vector<double>> q;
  q.reserve(times.size());
  for (double t : times) q.push_back(hopf_lax(f, t, lagrangian, d).values);

  const std::size_t n = f.size();
  const std::size_t total = times.size() * n;
  double measured = 0.0;
  const auto cells = static_cast<long>(total);
#pragma omp parallel for schedule(dynamic, 8) reduction(max : measured) num_threads(thread_count())
  for (long sa = 0; sa < cells; ++sa) {
    const auto a = static_cast<std::size_t>(sa);
    const std::size_t ta = a / n;
    const std::size_t xa = a % n;
    for (std::size_t b = a + 1; b < total; ++b) {
      const std::size_t tb = b / n;
      const std::size_t xb = b % n;
      const double gap = std::abs(times[ta] - times[tb]) + d(xa, xb);
      if (gap > 0.0) measured = std::max(measured, std::abs(q[ta][xa] - q[tb][xb]) / gap);
    }
  }

  const double lip = lipschitz_constant(f, d);
  SpaceTimeLipschitz result;
  result.measured = measured;
  result.bound = std::max(lip, lagrangian.conjugate(lip));
  double mesh = 0.0;
  for (std::size_t x = 0; x < n; ++x) mesh = std::max(mesh, d.nearest_distance(x));
  result.tolerance = 2.0 * result.bound * mesh;
  return result;
}

namespace serial {

ScalarField hopf_lax(const ScalarField& f, double t, const PowerLagrangian& lagrangian,
                     const FiniteMetricSpace& d) {
  check_inputs(f, t, d);
  if (t == 0.0) return f;
  ScalarField out{f.space, std::vector<double>(f.size())};
  for (std::size_t x = 0; x < f.size(); ++x) {
    out.values[x] = infimum_at(f, t, lagrangian, d, x).first;
  }
  return out;
}

}  // namespace serial
}  // namespace wd
