#include "wasser_dual/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "wasser_dual/error.hpp"

namespace wd {
namespace {

constexpr double kMassTolerance = 1e-12;

void check_exponent(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw PreconditionError("exponent p must be a finite real >= 1, got " + std::to_string(p));
  }
}

void check_same_space(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                      const FiniteMetricSpace& d) {
  if (!mu.space || !nu.space) throw PreconditionError("measure without a space");
  if (mu.space != nu.space && !mu.space->same_geometry(*nu.space)) {
    throw PreconditionError("measures live on different spaces");
  }
  if (d.size() != mu.size() || d.size() != nu.size()) {
    throw PreconditionError("metric size does not match the measures");
  }
}

void check_weights(std::span<const double> w, const char* what) {
  double total = 0.0;
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw MalformedInput(std::string(what) + " has a negative or non-finite weight");
    }
    total += x;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw MalformedInput(std::string(what) + " does not have unit mass (sum " +
                         std::to_string(total) + ")");
  }
}

std::vector<std::size_t> support(std::span<const double> w) {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) s.push_back(i);
  }
  return s;
}

struct Reduced {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
  std::vector<double> mu;
  std::vector<double> nu;
  DenseMatrix dist;
};

Reduced reduce(std::span<const double> mu, std::span<const double> nu, const DenseMatrix& dist) {
  if (dist.rows() != mu.size() || dist.cols() != nu.size()) {
    throw PreconditionError("distance matrix shape does not match the measures");
  }
  check_weights(mu, "source measure");
  check_weights(nu, "target measure");
  Reduced r;
  r.rows = support(mu);
  r.cols = support(nu);
  for (auto i : r.rows) r.mu.push_back(mu[i]);
  for (auto j : r.cols) r.nu.push_back(nu[j]);
  r.dist = DenseMatrix(r.rows.size(), r.cols.size());
  for (std::size_t a = 0; a < r.rows.size(); ++a) {
    for (std::size_t b = 0; b < r.cols.size(); ++b) r.dist(a, b) = dist(r.rows[a], r.cols[b]);
  }
  return r;
}

Coupling expand(const Reduced& r, const DenseMatrix& plan, std::size_t m, std::size_t n) {
  DenseMatrix full(m, n);
  for (std::size_t a = 0; a < r.rows.size(); ++a) {
    for (std::size_t b = 0; b < r.cols.size(); ++b) full(r.rows[a], r.cols[b]) = plan(a, b);
  }
  return Coupling::from_mass(std::move(full));
}

struct Bottleneck {
  double value = 0.0;
  DenseMatrix plan;
};

Bottleneck bottleneck(const Reduced& r) {
  std::vector<double> levels(r.dist.values().begin(), r.dist.values().end());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  const std::size_t m = r.mu.size();
  const std::size_t n = r.nu.size();
  double mu_total = 0.0;
  double nu_total = 0.0;
  for (double w : r.mu) mu_total += w;
  for (double w : r.nu) nu_total += w;
  const double total = std::min(mu_total, nu_total);
  auto feasible = [&](double threshold, DenseMatrix& flow) {
    std::vector<std::vector<std::size_t>> allowed(m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (r.dist(i, j) <= threshold) allowed[i].push_back(j);
      }
    }
    return bipartite_max_flow(r.mu, r.nu, allowed, flow) >= total - kMassTolerance;
  };

  std::size_t lo = 0;
  std::size_t hi = levels.size() - 1;  // the largest level is always feasible
  Bottleneck best;
  if (!feasible(levels[hi], best.plan)) throw SolverError("bottleneck max-flow is infeasible");
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    DenseMatrix flow;
    if (feasible(levels[mid], flow)) {
      hi = mid;
      best.plan = std::move(flow);
    } else {
      lo = mid + 1;
    }
  }
  best.value = levels[hi];
  return best;
}

// p-th power cost normalized by `scale`, capped at `cap`.
DenseMatrix normalized_cost(const DenseMatrix& dist, double scale, double p, double cap) {
  DenseMatrix c(dist.rows(), dist.cols());
  for (std::size_t k = 0; k < c.storage().size(); ++k) {
    const double v = std::pow(dist.values()[k] / scale, p);
    c.storage()[k] = std::min(v, cap);
  }
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// Measures and couplings

DiscreteMeasure DiscreteMeasure::from_weights(SpacePtr space, std::vector<double> weights) {
  if (!space) throw PreconditionError("measure needs a space");
  if (weights.size() != space->size()) {
    throw MalformedInput("measure has " + std::to_string(weights.size()) + " weights for " +
                         std::to_string(space->size()) + " points");
  }
  check_weights(weights, "measure");
  return DiscreteMeasure{std::move(space), std::move(weights)};
}

DiscreteMeasure DiscreteMeasure::dirac(SpacePtr space, std::size_t point) {
  if (!space || point >= space->size()) throw PreconditionError("dirac point out of range");
  std::vector<double> w(space->size(), 0.0);
  w[point] = 1.0;
  return DiscreteMeasure{std::move(space), std::move(w)};
}

DiscreteMeasure DiscreteMeasure::uniform(SpacePtr space) {
  if (!space || space->size() == 0) throw PreconditionError("uniform measure on an empty space");
  std::vector<double> w(space->size(), 1.0 / static_cast<double>(space->size()));
  return DiscreteMeasure{std::move(space), std::move(w)};
}

double DiscreteMeasure::integrate(std::span<const double> f) const {
  if (f.size() != weights.size()) throw PreconditionError("function size does not match measure");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += weights[i] * f[i];
  return s;
}

Coupling Coupling::from_mass(DenseMatrix mass) {
  Coupling c;
  c.row_marginal.assign(mass.rows(), 0.0);
  c.col_marginal.assign(mass.cols(), 0.0);
  for (std::size_t i = 0; i < mass.rows(); ++i) {
    for (std::size_t j = 0; j < mass.cols(); ++j) {
      if (mass(i, j) < 0.0) throw PreconditionError("coupling has a negative entry");
      c.row_marginal[i] += mass(i, j);
      c.col_marginal[j] += mass(i, j);
    }
  }
  c.mass = std::move(mass);
  return c;
}

Coupling Coupling::product(std::span<const double> mu, std::span<const double> nu) {
  DenseMatrix m(mu.size(), nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < nu.size(); ++j) m(i, j) = mu[i] * nu[j];
  }
  return from_mass(std::move(m));
}

double Coupling::cost_p(const DenseMatrix& dist, double p) const {
  if (dist.rows() != mass.rows() || dist.cols() != mass.cols()) {
    throw PreconditionError("distance matrix shape does not match the coupling");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < mass.values().size(); ++k) {
    const double w = mass.values()[k];
    if (w > 0.0) s += w * std::pow(dist.values()[k], p);
  }
  return s;
}

double Coupling::support_sup(const DenseMatrix& dist, double mass_threshold) const {
  double s = 0.0;
  for (std::size_t k = 0; k < mass.values().size(); ++k) {
    if (mass.values()[k] > mass_threshold) s = std::max(s, dist.values()[k]);
  }
  return s;
}

double Coupling::marginal_error(std::span<const double> mu, std::span<const double> nu) const {
  if (mu.size() != row_marginal.size() || nu.size() != col_marginal.size()) {
    throw PreconditionError("marginal size mismatch");
  }
  double e = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) e = std::max(e, std::abs(row_marginal[i] - mu[i]));
  for (std::size_t j = 0; j < nu.size(); ++j) e = std::max(e, std::abs(col_marginal[j] - nu[j]));
  return e;
}

// ---------------------------------------------------------------------------
// W_inf

BottleneckResult wasserstein_inf(std::span<const double> mu, std::span<const double> nu,
                                 const DenseMatrix& dist) {
  const auto r = reduce(mu, nu, dist);
  auto b = bottleneck(r);
  return BottleneckResult{b.value, expand(r, b.plan, mu.size(), nu.size())};
}

BottleneckResult wasserstein_inf(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                 const FiniteMetricSpace& d) {
  check_same_space(mu, nu, d);
  return wasserstein_inf(mu.weights, nu.weights, d.matrix());
}

BottleneckResult wasserstein_inf(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (!mu.space) throw PreconditionError("measure without a space");
  return wasserstein_inf(mu, nu, *mu.space);
}

// ---------------------------------------------------------------------------
// W_p

WassersteinResult wasserstein_p(std::span<const double> mu, std::span<const double> nu,
                                const DenseMatrix& dist, double p) {
  check_exponent(p);
  const auto r = reduce(mu, nu, dist);
  const std::size_t m = mu.size();
  const std::size_t n = nu.size();

  double dmax = 0.0;
  for (double v : r.dist.values()) dmax = std::max(dmax, v);

  // Costs are (d / scale)^p with scale = W_inf for p > 2. Entries above `cap`
  // are clamped; the cap grows until the optimum avoids clamped cells.
  double scale = dmax;
  if (p > 2.0 && dmax > 0.0) scale = bottleneck(r).value;
  if (!(scale > 0.0)) scale = dmax > 0.0 ? dmax : 1.0;

  double cap = p > 2.0 ? 1e6 : std::numeric_limits<double>::max();
  TransportSolution sol;
  DenseMatrix cost;
  while (true) {
    cost = normalized_cost(r.dist, scale, p, cap);
    sol = solve_transport(r.mu, r.nu, cost);
    bool touches_cap = false;
    for (std::size_t k = 0; k < cost.values().size(); ++k) {
      if (cost.values()[k] >= cap && sol.plan.values()[k] > 0.0) touches_cap = true;
    }
    if (!touches_cap || cap >= 1e300) break;
    cap = cap >= 1e294 ? std::numeric_limits<double>::max() : cap * 1e6;
  }

  WassersteinResult result;
  result.value = scale * std::pow(std::max(0.0, sol.cost), 1.0 / p);
  if (dmax == 0.0) result.value = 0.0;
  result.plan = expand(r, sol.plan, m, n);

  // Target potential f = -v, extended to zero-mass targets by
  // max_i (u_i - c_ij); the source side is its c-transform. Work in
  // normalized units and rescale at the end.
  const DenseMatrix exact = normalized_cost(dist, scale, p, std::numeric_limits<double>::infinity());
  std::vector<double> f(n, -std::numeric_limits<double>::infinity());
  for (std::size_t b = 0; b < r.cols.size(); ++b) f[r.cols[b]] = -sol.v[b];
  for (std::size_t j = 0; j < n; ++j) {
    if (nu[j] > 0.0) continue;
    for (std::size_t a = 0; a < r.rows.size(); ++a) {
      f[j] = std::max(f[j], sol.u[a] - exact(r.rows[a], j));
    }
  }
  std::vector<double> f_star(m, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) f_star[i] = std::min(f_star[i], f[j] + exact(i, j));
  }
  const double unit = std::pow(scale, p);
  const double shift = f[0];
  for (auto& x : f) x = (x - shift) * unit;
  for (auto& x : f_star) x = (x - shift) * unit;
  result.duals = DualPotentials{std::move(f), std::move(f_star), p};
  return result;
}

WassersteinResult wasserstein_p(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                const FiniteMetricSpace& d, double p) {
  check_same_space(mu, nu, d);
  return wasserstein_p(mu.weights, nu.weights, d.matrix(), p);
}

WassersteinResult wasserstein_p(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
  if (!mu.space) throw PreconditionError("measure without a space");
  return wasserstein_p(mu, nu, *mu.space, p);
}

double wasserstein_value(std::span<const double> mu, std::span<const double> nu,
                         const DenseMatrix& dist, double p) {
  if (std::isnan(p) || p < 1.0) throw PreconditionError("exponent p must be >= 1");
  if (p > kLargestFiniteExponent) return wasserstein_inf(mu, nu, dist).value;
  return wasserstein_p(mu, nu, dist, p).value;
}

double wasserstein_value(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         const FiniteMetricSpace& d, double p) {
  check_same_space(mu, nu, d);
  return wasserstein_value(mu.weights, nu.weights, d.matrix(), p);
}

// ---------------------------------------------------------------------------
// Duality

std::vector<double> c_transform(std::span<const double> f, const FiniteMetricSpace& d, double p) {
  check_exponent(p);
  if (f.size() != d.size()) throw PreconditionError("function size does not match the space");
  for (double x : f) {
    if (!std::isfinite(x)) throw PreconditionError("c_transform needs finite values");
  }
  std::vector<double> out(f.size(), std::numeric_limits<double>::infinity());
  for (std::size_t y = 0; y < f.size(); ++y) {
    const auto row = d.row(y);
    for (std::size_t x = 0; x < f.size(); ++x) {
      out[y] = std::min(out[y], f[x] + (p == 1.0 ? row[x] : std::pow(row[x], p)));
    }
  }
  return out;
}

double kantorovich_gap(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                       const FiniteMetricSpace& d, double p, std::span<const double> f) {
  const double w = wasserstein_p(mu, nu, d, p).value;
  const auto f_star = c_transform(f, d, p);
  return std::pow(w, p) - (mu.integrate(f_star) - nu.integrate(f));
}

double rubinstein_value(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                        const FiniteMetricSpace& d, std::span<const double> f) {
  check_same_space(mu, nu, d);
  if (f.size() != d.size()) throw PreconditionError("function size does not match the space");
  double lip = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) {
    for (std::size_t y = x + 1; y < f.size(); ++y) {
      if (d(x, y) > 0.0) lip = std::max(lip, std::abs(f[x] - f[y]) / d(x, y));
    }
  }
  if (lip > 1.0 + 1e-12) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", lip);
    throw PreconditionError(std::string("function is not 1-Lipschitz: constant ") + buffer);
  }
  return mu.integrate(f) - nu.integrate(f);
}

std::vector<double> rubinstein_certificate(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                           const FiniteMetricSpace& d) {
  return wasserstein_p(mu, nu, d, 1.0).duals.f_star;
}

// ---------------------------------------------------------------------------
// Gluing and limits

Coupling glue_couplings(const Coupling& pi, const CouplingFamily& family) {
  DenseMatrix glued;
  for (std::size_t x = 0; x < pi.mass.rows(); ++x) {
    for (std::size_t y = 0; y < pi.mass.cols(); ++y) {
      const double w = pi.mass(x, y);
      if (w <= 0.0) continue;
      auto it = family.find({x, y});
      if (it == family.end()) {
        throw PreconditionError("coupling family has no entry for (" + std::to_string(x) + ", " +
                                std::to_string(y) + ")");
      }
      const auto& local = it->second.mass;
      if (glued.empty()) glued = DenseMatrix(local.rows(), local.cols());
      if (local.rows() != glued.rows() || local.cols() != glued.cols()) {
        throw PreconditionError("coupling family entries have different shapes");
      }
      for (std::size_t k = 0; k < local.values().size(); ++k) {
        glued.storage()[k] += w * local.values()[k];
      }
    }
  }
  if (glued.empty()) throw PreconditionError("gluing an empty coupling");
  return Coupling::from_mass(std::move(glued));
}

std::vector<double> wp_limit_sequence(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                      const FiniteMetricSpace& d, std::span<const double> p_list) {
  for (std::size_t k = 0; k < p_list.size(); ++k) {
    if (std::isnan(p_list[k]) || p_list[k] < 1.0) throw PreconditionError("exponents must be >= 1");
    if (k > 0 && !(p_list[k] > p_list[k - 1])) {
      throw PreconditionError("exponent list must be increasing");
    }
  }
  std::vector<double> values;
  values.reserve(p_list.size());
  for (double p : p_list) values.push_back(wasserstein_value(mu, nu, d, p));
  return values;
}

}  // namespace wd
