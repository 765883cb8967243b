#include "wasser_dual/duality_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "wasser_dual/error.hpp"
#include "wasser_dual/hopf_lax.hpp"
#include "wasser_dual/parallel.hpp"
#include "wasser_dual/slope.hpp"
#include "wasser_dual/transport.hpp"

namespace wd {
namespace {

void check_kernel_space(const MarkovKernel& kernel, const FiniteMetricSpace& d) {
  if (kernel.size() != d.size()) throw PreconditionError("kernel and metric sizes differ");
}

void check_pairs(std::span<const PointPair> pairs, std::size_t n) {
  if (pairs.empty()) throw PreconditionError("pair list is empty");
  for (const auto& [x, y] : pairs) {
    if (x >= n || y >= n) throw PreconditionError("pair index out of range");
    if (x == y) throw PreconditionError("pair (" + std::to_string(x) + ", " + std::to_string(y) +
                                        ") is not a pair of distinct points");
  }
}

double kernel_wasserstein(const MarkovKernel& kernel, const FiniteMetricSpace& d, double p,
                          const PointPair& pair) {
  return wasserstein_value(kernel.row(pair.first), kernel.row(pair.second), d.matrix(), p);
}

SlopeField slope_for(const ScalarField& f, const FiniteMetricSpace& d, SlopeScale scale) {
  return scale ? slope_at_scale(f, d, *scale) : local_slope(f, d);
}

double mesh_of(const FiniteMetricSpace& d) {
  double mesh = 0.0;
  for (std::size_t x = 0; x < d.size(); ++x) mesh = std::max(mesh, d.nearest_distance(x));
  return mesh;
}

bool constant_field(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

// Per-field (G_q) ingredients: lhs(x) = |grad Pf|(x), rhs(x) = P(|grad f|^q)(x)^{1/q}.
struct GradientSides {
  std::vector<double> lhs;
  std::vector<double> rhs;
};

GradientSides gradient_sides(const MarkovKernel& kernel, const FiniteMetricSpace& d, double q,
                             const std::vector<double>& values, SlopeScale scale) {
  const auto& space = kernel.space();
  const ScalarField f{space, values};
  const ScalarField pf{space, apply(kernel, std::span<const double>(values))};
  GradientSides sides;
  sides.lhs = slope_for(pf, d, scale).values;
  const auto g = slope_for(f, d, scale).values;
  std::vector<double> gq(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) gq[i] = q == 1.0 ? g[i] : std::pow(g[i], q);
  sides.rhs = apply(kernel, std::span<const double>(gq));
  for (double& v : sides.rhs) v = q == 1.0 ? v : std::pow(std::max(v, 0.0), 1.0 / q);
  return sides;
}

}  // namespace

double conjugate_exponent(double p) {
  if (std::isnan(p) || p < 1.0) throw PreconditionError("exponent must be >= 1");
  if (p == 1.0) return kInf;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

std::vector<PointPair> all_pairs(std::size_t n) {
  std::vector<PointPair> pairs;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x + 1; y < n; ++y) pairs.emplace_back(x, y);
  }
  return pairs;
}

std::vector<PointPair> anchored_pairs(std::size_t n, std::size_t anchor) {
  if (anchor >= n) throw PreconditionError("anchor out of range");
  std::vector<PointPair> pairs;
  for (std::size_t y = 0; y < n; ++y) {
    if (y != anchor) pairs.emplace_back(anchor, y);
  }
  return pairs;
}

// ---------------------------------------------------------------------------
// Best constants

CpResult measure_Cp(const MarkovKernel& kernel, const FiniteMetricSpace& d, double p,
                    std::span<const PointPair> pairs) {
  check_kernel_space(kernel, d);
  check_pairs(pairs, d.size());
  if (std::isnan(p) || p < 1.0) throw PreconditionError("exponent must be >= 1");
  CpResult result;
  result.pairs.resize(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t k) {
    auto& m = result.pairs[k];
    m.pair = pairs[k];
    m.distance = d(pairs[k].first, pairs[k].second);
    if (!(m.distance > 0.0)) throw PreconditionError("pair at distance zero");
    m.wasserstein = kernel_wasserstein(kernel, d, p, pairs[k]);
    m.ratio = m.wasserstein / m.distance;
  });
  for (const auto& m : result.pairs) result.constant = std::max(result.constant, m.ratio);
  return result;
}

double best_constant_Cp(const MarkovKernel& kernel, const FiniteMetricSpace& d, double p,
                        std::span<const PointPair> pairs) {
  return measure_Cp(kernel, d, p, pairs).constant;
}

GqResult measure_Gq(const MarkovKernel& kernel, const FiniteMetricSpace& d, double q,
                    const FieldCorpus& corpus, SlopeScale scale) {
  check_kernel_space(kernel, d);
  if (corpus.empty()) throw PreconditionError("function corpus is empty");
  if (std::isnan(q) || q < 1.0) throw PreconditionError("conjugate exponent must be >= 1");
  for (const auto& f : corpus) {
    if (f.values.size() != d.size()) {
      throw PreconditionError("corpus field '" + f.name + "' has the wrong size");
    }
  }
  std::vector<std::vector<FunctionMargin>> per_field(corpus.size());
  parallel_for(corpus.size(), [&](std::size_t k) {
    const auto& values = corpus[k].values;
    if (constant_field(values)) return;
    if (std::isinf(q)) {
      const double rhs = lipschitz_constant(std::span<const double>(values), d);
      const auto pf = apply(kernel, std::span<const double>(values));
      const double lhs = lipschitz_constant(std::span<const double>(pf), d);
      per_field[k].push_back({k, 0, lhs, rhs, lhs / rhs});
      return;
    }
    const auto sides = gradient_sides(kernel, d, q, values, scale);
    for (std::size_t x = 0; x < d.size(); ++x) {
      const double lhs = sides.lhs[x];
      const double rhs = sides.rhs[x];
      if (lhs == 0.0 && rhs == 0.0) continue;
      per_field[k].push_back({k, x, lhs, rhs, rhs > 0.0 ? lhs / rhs : kInf});
    }
  });
  GqResult result;
  bool any = false;
  for (auto& entries : per_field) {
    for (auto& e : entries) {
      if (!any || e.ratio > result.constant) {
        result.constant = e.ratio;
        result.argmax_field = e.field;
      }
      any = true;
      result.entries.push_back(e);
    }
  }
  if (!any) throw PreconditionError("function corpus contains only constants");
  return result;
}

double best_constant_Gq(const MarkovKernel& kernel, const FiniteMetricSpace& d, double q,
                        const FieldCorpus& corpus, SlopeScale scale) {
  return measure_Gq(kernel, d, q, corpus, scale).constant;
}

// ---------------------------------------------------------------------------
// Proof-path diagnostic

FundamentalChain fundamental_chain_diagnostic(const MarkovKernel& kernel,
                                              const FiniteMetricSpace& d, double p,
                                              std::span<const double> f, PointPair pair,
                                              std::size_t grid) {
  check_kernel_space(kernel, d);
  if (!(p > 1.0) || !std::isfinite(p)) throw PreconditionError("chain diagnostic needs 1 < p < inf");
  if (grid < 4) throw PreconditionError("chain grid must have at least 4 intervals");
  const auto [x, y] = pair;
  const auto path = minimal_geodesic(d, y, x);
  const auto s_of_vertex = path.speed_parameters();
  const PowerLagrangian lagrangian(p);
  const ScalarField field{kernel.space(), std::vector<double>(f.begin(), f.end())};

  // P Q_s f at every grid time.
  std::vector<std::vector<double>> pq(grid + 1);
  parallel_for(grid + 1, [&](std::size_t k) {
    const double s = static_cast<double>(k) / static_cast<double>(grid);
    pq[k] = apply(kernel, std::span<const double>(hopf_lax(field, s, lagrangian, d).values));
  });

  // Linear interpolation of a vertex function at path parameter s.
  auto along = [&](const std::vector<double>& g, double s) {
    if (path.vertices.size() == 1) return g[path.vertices.front()];
    auto it = std::upper_bound(s_of_vertex.begin(), s_of_vertex.end(), s);
    std::size_t hi = static_cast<std::size_t>(it - s_of_vertex.begin());
    hi = std::clamp<std::size_t>(hi, 1, s_of_vertex.size() - 1);
    const std::size_t lo = hi - 1;
    const double span = s_of_vertex[hi] - s_of_vertex[lo];
    const double w = span > 0.0 ? (s - s_of_vertex[lo]) / span : 0.0;
    return (1.0 - w) * g[path.vertices[lo]] + w * g[path.vertices[hi]];
  };

  const double h = 1.0 / static_cast<double>(grid);
  std::vector<double> F(grid + 1);
  for (std::size_t k = 0; k <= grid; ++k) F[k] = along(pq[k], static_cast<double>(k) * h);

  std::vector<double> dF(grid + 1);
  dF[0] = (F[1] - F[0]) / h;
  dF[grid] = (F[grid] - F[grid - 1]) / h;
  for (std::size_t k = 1; k < grid; ++k) dF[k] = (F[k + 1] - F[k - 1]) / (2.0 * h);
  double integral = 0.0;
  for (std::size_t k = 0; k < grid; ++k) integral += 0.5 * (dF[k] + dF[k + 1]) * h;

  FundamentalChain chain;
  chain.pair = pair;
  chain.direct = pq[grid][x] - pq[0][y];
  chain.reconstructed = integral;
  chain.error = std::abs(integral - chain.direct);
  chain.max_time_derivative = -kInf;
  for (std::size_t k = 0; k < grid; ++k) {
    const double s = static_cast<double>(k) * h;
    chain.max_time_derivative =
        std::max(chain.max_time_derivative, (along(pq[k + 1], s) - along(pq[k], s)) / h);
  }
  const double w = wasserstein_p(kernel.row(x), kernel.row(y), d.matrix(), p).value;
  chain.kantorovich_slack = std::pow(w, p) - p * chain.direct;
  return chain;
}

// ---------------------------------------------------------------------------
// Report

double DualityReport::min_pair_margin() const {
  return pair_margins.empty() ? 0.0 : *std::min_element(pair_margins.begin(), pair_margins.end());
}

double DualityReport::min_fn_margin() const {
  return fn_margins.empty() ? 0.0 : *std::min_element(fn_margins.begin(), fn_margins.end());
}

DualityReport duality_gap_report(const MarkovKernel& kernel, const FiniteMetricSpace& d, double p,
                                 std::span<const PointPair> pairs, const FieldCorpus& corpus,
                                 SlopeScale scale, const ReportOptions& options) {
  DualityReport report;
  report.p = p;
  report.q = conjugate_exponent(p);
  auto cp = measure_Cp(kernel, d, p, pairs);
  auto gq = measure_Gq(kernel, d, report.q, corpus, scale);
  report.K_C = cp.constant;
  report.K_G = gq.constant;
  report.argmax_field = gq.argmax_field;
  report.mesh = mesh_of(d);
  for (const auto& m : cp.pairs) report.pair_margins.push_back(report.K_C * m.distance - m.wasserstein);
  report.pairs = std::move(cp.pairs);
  for (const auto& e : gq.entries) report.fn_margins.push_back(report.K_C * e.rhs - e.lhs);
  report.functions = std::move(gq.entries);

  if (p > 1.0 && std::isfinite(p) && d.graph()) {
    const auto count = std::min(options.chain_pairs, pairs.size());
    for (std::size_t k = 0; k < count; ++k) {
      report.chain.push_back(fundamental_chain_diagnostic(
          kernel, d, p, corpus[report.argmax_field].values, pairs[k], options.chain_grid));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Side conditions

MonotonicityTable monotonicity_audit(const MarkovKernel& kernel, const FiniteMetricSpace& d,
                                     std::span<const PointPair> pairs,
                                     std::span<const double> exponents, double tolerance) {
  check_kernel_space(kernel, d);
  check_pairs(pairs, d.size());
  if (exponents.empty()) throw PreconditionError("exponent list is empty");
  for (std::size_t k = 0; k < exponents.size(); ++k) {
    if (std::isnan(exponents[k]) || exponents[k] < 1.0 || std::isinf(exponents[k])) {
      throw PreconditionError("audit exponents must be finite and >= 1");
    }
    if (k > 0 && !(exponents[k] > exponents[k - 1])) {
      throw PreconditionError("audit exponents must be increasing");
    }
  }
  MonotonicityTable table;
  table.exponents.assign(exponents.begin(), exponents.end());
  table.rows.resize(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t r) {
    auto& row = table.rows[r];
    row.pair = pairs[r];
    for (double p : exponents) row.values.push_back(kernel_wasserstein(kernel, d, p, pairs[r]));
    row.w_inf = kernel_wasserstein(kernel, d, kInf, pairs[r]);
    for (std::size_t k = 1; k < row.values.size(); ++k) {
      if (row.values[k] < row.values[k - 1] - tolerance) row.nondecreasing = false;
    }
    for (double v : row.values) {
      if (v > row.w_inf + tolerance) row.below_inf = false;
    }
  });
  table.constants.assign(exponents.size(), 0.0);
  for (const auto& row : table.rows) {
    const double dist = d(row.pair.first, row.pair.second);
    for (std::size_t k = 0; k < row.values.size(); ++k) {
      table.constants[k] = std::max(table.constants[k], row.values[k] / dist);
    }
    table.constant_inf = std::max(table.constant_inf, row.w_inf / dist);
    table.rows_nondecreasing = table.rows_nondecreasing && row.nondecreasing;
    table.rows_below_inf = table.rows_below_inf && row.below_inf;
  }
  for (std::size_t k = 1; k < table.constants.size(); ++k) {
    if (table.constants[k] < table.constants[k - 1] - tolerance) table.constants_nondecreasing = false;
  }
  return table;
}

std::vector<SupportMargin> g_infty_prime_check(const MarkovKernel& kernel,
                                               const FiniteMetricSpace& d,
                                               const FieldCorpus& corpus, SlopeScale scale,
                                               double K, double support_threshold) {
  check_kernel_space(kernel, d);
  if (!(K > 0.0)) throw PreconditionError("support check needs a positive constant");
  std::vector<std::vector<SupportMargin>> per_field(corpus.size());
  parallel_for(corpus.size(), [&](std::size_t k) {
    const ScalarField f{kernel.space(), corpus[k].values};
    const auto pf = apply(kernel, f);
    const auto lhs = slope_for(pf, d, scale).values;
    const auto g = slope_for(f, d, scale).values;
    for (std::size_t x = 0; x < d.size(); ++x) {
      double sup = 0.0;
      const auto row = kernel.row(x);
      for (std::size_t y = 0; y < row.size(); ++y) {
        if (row[y] > support_threshold) sup = std::max(sup, g[y]);
      }
      SupportMargin m{k, x, lhs[x] / K, sup, 0.0};
      m.margin = m.rhs - m.lhs;
      per_field[k].push_back(m);
    }
  });
  std::vector<SupportMargin> out;
  for (auto& entries : per_field) out.insert(out.end(), entries.begin(), entries.end());
  return out;
}

ImplicationAudit implication_audit(const MarkovKernel& kernel, const FiniteMetricSpace& d,
                                   double p, std::span<const PointPair> pairs,
                                   const FieldCorpus& corpus, SlopeScale scale, double tolerance) {
  ImplicationAudit audit;
  audit.p = p;
  audit.q = conjugate_exponent(p);
  audit.K_C = best_constant_Cp(kernel, d, p, pairs);
  const auto gq = measure_Gq(kernel, d, audit.q, corpus, scale);
  audit.min_margin = kInf;
  for (const auto& e : gq.entries) {
    const double margin = audit.K_C * e.rhs - e.lhs;
    audit.min_margin = std::min(audit.min_margin, margin);
    if (margin < -tolerance) ++audit.violations;
  }
  if (std::isinf(p)) {
    std::vector<double> excess(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t k) {
      const auto [x, y] = pairs[k];
      const auto plan = wasserstein_inf(kernel.row(x), kernel.row(y), d.matrix()).plan;
      excess[k] = plan.support_sup(d.matrix()) - audit.K_C * d(x, y);
    });
    for (double e : excess) audit.max_support_excess = std::max(audit.max_support_excess, e);
  }
  return audit;
}

GluingCheck gluing_consistency(const MarkovKernel& kernel, const FiniteMetricSpace& d,
                               const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
  check_kernel_space(kernel, d);
  const auto outer = wasserstein_p(mu, nu, d, p);
  CouplingFamily family;
  double summed = 0.0;
  double summed_w = 0.0;
  const auto& pi = outer.plan.mass;
  for (std::size_t x = 0; x < pi.rows(); ++x) {
    for (std::size_t y = 0; y < pi.cols(); ++y) {
      if (pi(x, y) <= 0.0) continue;
      auto local = wasserstein_p(kernel.row(x), kernel.row(y), d.matrix(), p);
      summed += pi(x, y) * local.plan.cost_p(d.matrix(), p);
      summed_w += pi(x, y) * std::pow(local.value, p);
      family.emplace(std::make_pair(x, y), std::move(local.plan));
    }
  }
  const auto glued = glue_couplings(outer.plan, family);
  const auto pmu = adjoint_apply(kernel, mu);
  const auto pnu = adjoint_apply(kernel, nu);
  GluingCheck check;
  check.glued_cost = glued.cost_p(d.matrix(), p);
  check.summed_cost = summed;
  check.identity_error = std::abs(check.glued_cost - check.summed_cost);
  check.lhs = wasserstein_p(pmu.weights, pnu.weights, d.matrix(), p).value;
  check.rhs = std::pow(summed_w, 1.0 / p);
  check.marginal_error = glued.marginal_error(pmu.weights, pnu.weights);
  return check;
}

std::vector<ChebyshevSplit> chebyshev_split_check(const MarkovKernel& kernel,
                                                  const FiniteMetricSpace& d, double p, double K,
                                                  std::span<const PointPair> pairs,
                                                  const FieldCorpus& corpus) {
  check_kernel_space(kernel, d);
  check_pairs(pairs, d.size());
  if (!(p > 1.0) || !std::isfinite(p)) throw PreconditionError("Chebyshev split needs 1 < p < inf");
  const double q = conjugate_exponent(p);
  std::vector<std::vector<ChebyshevSplit>> per_pair(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t k) {
    const auto [x, y] = pairs[k];
    const double dt = K * d(x, y);
    const double r = std::pow(dt, 1.0 / (2.0 * q));
    const auto px = kernel.row(x);
    const auto py = kernel.row(y);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const ScalarField f{kernel.space(), corpus[i].values};
      const auto g = slope_at_scale(f, d, r).values;
      double lq = 0.0;
      double pfx = 0.0;
      double pfy = 0.0;
      for (std::size_t z = 0; z < g.size(); ++z) {
        lq += px[z] * std::pow(g[z], q);
        pfx += px[z] * f.values[z];
        pfy += py[z] * f.values[z];
      }
      ChebyshevSplit split;
      split.pair = pairs[k];
      split.field = i;
      split.lhs = std::abs(pfx - pfy);
      split.rhs = std::pow(lq, 1.0 / q) * dt + 2.0 * f.sup_norm() * std::pow(dt, 1.0 + 0.5 * (p - 1.0));
      per_pair[k].push_back(split);
    }
  });
  std::vector<ChebyshevSplit> out;
  for (auto& entries : per_pair) out.insert(out.end(), entries.begin(), entries.end());
  return out;
}

// ---------------------------------------------------------------------------
// Heisenberg Monte Carlo

double empirical_wasserstein(const DenseMatrix& dist, double p) {
  const std::size_t m = dist.rows();
  if (m == 0 || dist.cols() != m) throw PreconditionError("empirical clouds must have equal size");
  if (std::isinf(p) || p > kLargestFiniteExponent) {
    const std::vector<double> uniform(m, 1.0 / static_cast<double>(m));
    return wasserstein_inf(uniform, uniform, dist).value;
  }
  if (std::isnan(p) || p < 1.0) throw PreconditionError("exponent must be >= 1");
  double scale = 0.0;
  for (double v : dist.values()) scale = std::max(scale, v);
  if (scale == 0.0) return 0.0;
  DenseMatrix cost(m, m);
  for (std::size_t k = 0; k < cost.storage().size(); ++k) {
    cost.storage()[k] = std::pow(dist.values()[k] / scale, p);
  }
  double total = 0.0;
  solve_assignment(cost, &total);
  return scale * std::pow(std::max(total, 0.0) / static_cast<double>(m), 1.0 / p);
}

namespace {

BootstrapInterval percentile_interval(double estimate, std::vector<double> samples) {
  BootstrapInterval ci{estimate, estimate, estimate};
  if (samples.empty()) return ci;
  std::sort(samples.begin(), samples.end());
  auto at = [&](double level) {
    const double pos = level * static_cast<double>(samples.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, samples.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return (1.0 - w) * samples[lo] + w * samples[hi];
  };
  ci.lower = at(0.025);
  ci.upper = at(0.975);
  return ci;
}

DenseMatrix select(const DenseMatrix& dist, const std::vector<std::size_t>& index) {
  DenseMatrix out(index.size(), index.size());
  for (std::size_t a = 0; a < index.size(); ++a) {
    for (std::size_t b = 0; b < index.size(); ++b) out(a, b) = dist(index[a], index[b]);
  }
  return out;
}

}  // namespace

HeisenbergConstant estimate_heisenberg_constant(
    std::span<const std::pair<Step2Point, Step2Point>> pairs, double p,
    const HeisenbergRunOptions& options) {
  if (pairs.empty()) throw PreconditionError("no start pairs");
  if (options.thinned < 2) throw PreconditionError("thinned cloud needs at least 2 points");
  HeisenbergConstant result;
  result.p = p;
  result.t = options.t;
  result.pairs.resize(pairs.size());
  std::vector<std::vector<double>> boot(pairs.size());

  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& [x, y] = pairs[k];
    auto& est = result.pairs[k];
    est.x = x;
    est.y = y;
    est.gauge = koranyi_gauge(x, y);
    if (!(est.gauge > 0.0)) throw PreconditionError("start pair points coincide");

    SDEConfig cfg;
    cfg.t = options.t;
    cfg.steps = options.steps;
    cfg.samples = options.samples;
    cfg.seed = options.seed + k;
    cfg.start = x;
    const auto cloud_x = sample_diffusion(cfg);
    const auto cloud_y = left_translate_cloud(cloud_x, group_mul(y, group_inverse(x)));

    const auto dist = gauge_matrix(thin_cloud(cloud_x, options.thinned),
                                   thin_cloud(cloud_y, options.thinned));
    est.wasserstein = empirical_wasserstein(dist, p);
    const double ratio = est.wasserstein / est.gauge;

    const std::size_t stride = std::max<std::size_t>(1, options.samples / options.thinned);
    double lo = ratio;
    double hi = ratio;
    for (std::size_t j = 1; j < 4 && stride > 1; ++j) {
      const std::size_t offset = j * stride / 4;
      const auto alt = gauge_matrix(thin_cloud(cloud_x, options.thinned, offset),
                                    thin_cloud(cloud_y, options.thinned, offset));
      const double r = empirical_wasserstein(alt, p) / est.gauge;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    est.thinning_spread = hi - lo;

    const std::size_t m = dist.rows();
    boot[k].resize(options.bootstrap);
    parallel_for(options.bootstrap, [&](std::size_t b) {
      std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(k),
                        static_cast<std::uint32_t>(b), 0xB0075u};
      std::mt19937_64 engine(seq);
      std::uniform_int_distribution<std::size_t> pick(0, m - 1);
      std::vector<std::size_t> index(m);
      for (auto& i : index) i = pick(engine);
      boot[k][b] = empirical_wasserstein(select(dist, index), p) / est.gauge;
    });
    est.ratio = percentile_interval(ratio, boot[k]);
  }

  double best = 0.0;
  for (const auto& est : result.pairs) best = std::max(best, est.ratio.estimate);
  std::vector<double> maxima(options.bootstrap, 0.0);
  for (std::size_t b = 0; b < options.bootstrap; ++b) {
    for (std::size_t k = 0; k < pairs.size(); ++k) maxima[b] = std::max(maxima[b], boot[k][b]);
  }
  result.constant = percentile_interval(best, std::move(maxima));
  return result;
}

}  // namespace wd
