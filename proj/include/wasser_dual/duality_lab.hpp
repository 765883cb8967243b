#pragma once

// Harness for the equivalence between Wasserstein control of a Markov
// kernel,
//     (C_p)  W_p(P_x, P_y) <= K d(x, y)                      for all x, y,
// and the gradient estimate with the Holder conjugate q,
//     (G_q)  |grad Pf|(x) <= K (P |grad f|^q)(x)^{1/q}      for all f, x,
// (for q = inf: Lip(Pf) <= K Lip(f)). Both sides are measured as best
// constants over finite pair lists and function corpora.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wasser_dual/heisenberg.hpp"
#include "wasser_dual/kernels.hpp"
#include "wasser_dual/metric_space.hpp"

namespace wd {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Holder conjugate: 1 <-> inf, otherwise p / (p - 1).
double conjugate_exponent(double p);

using PointPair = std::pair<std::size_t, std::size_t>;

/// All unordered pairs (x, y), x < y.
std::vector<PointPair> all_pairs(std::size_t n);
/// Pairs (anchor, y) for y != anchor; enough for translation-invariant kernels.
std::vector<PointPair> anchored_pairs(std::size_t n, std::size_t anchor = 0);

struct NamedField {
  std::string name;
  std::vector<double> values;
};
using FieldCorpus = std::vector<NamedField>;

struct CorpusOptions {
  /// Distance cones d(x0, .); 0 means every point is a center.
  bool distance_cones = true;
  std::size_t cone_centers = 0;
  /// cos/sin(2 pi k i / n) for k = 1..fourier_modes. Only meaningful on the
  /// discrete torus.
  std::size_t fourier_modes = 0;
  /// 1-Lipschitz McShane extensions min_s { g(s) + d(x, s) } of random data.
  std::size_t mcshane_fields = 8;
  /// Hopf-Lax smoothings Q_t of random fields (p = 2).
  std::size_t hopf_lax_smoothings = 4;
  std::uint64_t seed = 20240917;
};

FieldCorpus build_corpus(const FiniteMetricSpace& d, const CorpusOptions& options);

/// Appends the target-side Kantorovich potentials of W_p(P_x, P_y) for each
/// pair and exponent (finite p only). These are the extremal test functions
/// of the dual problem.
void add_kantorovich_potentials(FieldCorpus& corpus, const MarkovKernel& kernel,
                                const FiniteMetricSpace& d, std::span<const PointPair> pairs,
                                std::span<const double> exponents);

struct PairMeasurement {
  PointPair pair;
  double distance = 0.0;
  double wasserstein = 0.0;
  double ratio = 0.0;
};

struct CpResult {
  double constant = 0.0;
  std::vector<PairMeasurement> pairs;
};

/// W_p(P_x, P_y) / d(x, y) over the pair list; p = kInf uses W_inf.
/// Throws PreconditionError for an empty list or a pair with x == y.
CpResult measure_Cp(const MarkovKernel& kernel, const FiniteMetricSpace& d, double p,
                    std::span<const PointPair> pairs);
double best_constant_Cp(const MarkovKernel& kernel, const FiniteMetricSpace& d, double p,
                        std::span<const PointPair> pairs);

/// Slope radius on both sides of (G_q); nullopt selects nearest-neighbor
/// shells.
using SlopeScale = std::optional<double>;

struct FunctionMargin {
  std::size_t field = 0;
  std::size_t point = 0;  // unused (0) for q = inf
  double lhs = 0.0;       // |grad Pf|(x), or Lip(Pf)
  double rhs = 0.0;       // (P |grad f|^q)(x)^{1/q}, or Lip(f)
  double ratio = 0.0;
};

struct GqResult {
  double constant = 0.0;
  std::size_t argmax_field = 0;
  std::vector<FunctionMargin> entries;
};

/// max over (f, x) of lhs / rhs. Throws PreconditionError when the corpus is
/// empty or contains only constants.
GqResult measure_Gq(const MarkovKernel& kernel, const FiniteMetricSpace& d, double q,
                    const FieldCorpus& corpus, SlopeScale scale);
double best_constant_Gq(const MarkovKernel& kernel, const FiniteMetricSpace& d, double q,
                        const FieldCorpus& corpus, SlopeScale scale);

/// Evaluation of s -> P Q_s f(gamma_s) along the d-geodesic gamma from y
/// (s = 0) to x (s = 1), with L(s) = s^p / p. The derivative is taken by
/// central differences on a uniform s-grid (edges interpolated linearly) and
/// integrated back with the trapezoid rule.
struct FundamentalChain {
  PointPair pair;
  double direct = 0.0;         // P Q_1 f(x) - P f(y)
  double reconstructed = 0.0;  // trapezoid integral of the derivative
  double error = 0.0;
  /// p * (P Q_1 f(x) - P f(y)) <= W_p(P_x, P_y)^p must hold for every f.
  double kantorovich_slack = 0.0;
  /// Largest value of the time part of the derivative (must be <= 0).
  double max_time_derivative = 0.0;
};

FundamentalChain fundamental_chain_diagnostic(const MarkovKernel& kernel,
                                              const FiniteMetricSpace& d, double p,
                                              std::span<const double> f, PointPair pair,
                                              std::size_t grid = 400);

struct DualityReport {
  double p = 1.0;
  double q = kInf;
  double K_C = 0.0;
  double K_G = 0.0;
  /// Per-pair slack K_C d(x,y) - W_p(P_x, P_y).
  std::vector<PairMeasurement> pairs;
  std::vector<double> pair_margins;
  /// Per-(f, x) slack of (G_q) with d~ = K_C d injected:
  /// K_C * rhs - lhs.
  std::vector<FunctionMargin> functions;
  std::vector<double> fn_margins;
  std::size_t argmax_field = 0;
  double mesh = 0.0;
  std::optional<double> mc_ci;
  std::vector<FundamentalChain> chain;

  double gap() const { return K_C > K_G ? K_C - K_G : K_G - K_C; }
  double min_pair_margin() const;
  double min_fn_margin() const;
};

struct ReportOptions {
  /// Number of pairs (from the front of the list) that get the
  /// fundamental-chain diagnostic; only used for 1 < p < inf.
  std::size_t chain_pairs = 2;
  std::size_t chain_grid = 400;
};

DualityReport duality_gap_report(const MarkovKernel& kernel, const FiniteMetricSpace& d, double p,
                                 std::span<const PointPair> pairs, const FieldCorpus& corpus,
                                 SlopeScale scale, const ReportOptions& options = {});

struct MonotonicityRow {
  PointPair pair;
  std::vector<double> values;  // W_p for each p in the list
  double w_inf = 0.0;
  bool nondecreasing = true;
  bool below_inf = true;
};

struct MonotonicityTable {
  std::vector<double> exponents;
  std::vector<double> constants;  // K_C(p)
  double constant_inf = 0.0;
  std::vector<MonotonicityRow> rows;
  bool constants_nondecreasing = true;
  bool rows_nondecreasing = true;
  bool rows_below_inf = true;
};

/// W_p(P_x, P_y) and K_C(p) across an increasing exponent list, plus the W_inf
/// column.
MonotonicityTable monotonicity_audit(const MarkovKernel& kernel, const FiniteMetricSpace& d,
                                     std::span<const PointPair> pairs,
                                     std::span<const double> exponents, double tolerance = 1e-10);

struct SupportMargin {
  std::size_t field = 0;
  std::size_t point = 0;
  double lhs = 0.0;  // |grad Pf|(x) / K
  double rhs = 0.0;  // max of |grad f| over supp P_x
  double margin = 0.0;
};

/// Support-form gradient estimate |grad_{K d} Pf|(x) <= max_{supp P_x} |grad f|.
std::vector<SupportMargin> g_infty_prime_check(const MarkovKernel& kernel,
                                               const FiniteMetricSpace& d,
                                               const FieldCorpus& corpus, SlopeScale scale,
                                               double K, double support_threshold = 0.0);

struct ImplicationAudit {
  double p = 1.0;
  double q = kInf;
  double K_C = 0.0;
  double min_margin = 0.0;
  std::size_t violations = 0;
  /// p = inf only: max over tested pairs of (d(z,w) - K_C d(x,y)) on the
  /// support of the optimal W_inf plan.
  double max_support_excess = -kInf;
};

/// Injects d~ = K_C(p) d and evaluates every (G_q) margin on the corpus.
ImplicationAudit implication_audit(const MarkovKernel& kernel, const FiniteMetricSpace& d,
                                   double p, std::span<const PointPair> pairs,
                                   const FieldCorpus& corpus, SlopeScale scale,
                                   double tolerance = 1e-6);

struct GluingCheck {
  double glued_cost = 0.0;        // ||d||^p_{L^p(glued)}
  double summed_cost = 0.0;       // sum pi(x,y) ||d||^p_{L^p(P_{x,y})}
  double identity_error = 0.0;
  double lhs = 0.0;               // W_p(P* mu, P* nu)
  double rhs = 0.0;               // (sum pi(x,y) W_p(P_x, P_y)^p)^{1/p}
  double marginal_error = 0.0;    // glued marginals vs P* mu, P* nu
};

/// Glues optimal plans of (P_x, P_y) along an optimal plan of (mu, nu).
GluingCheck gluing_consistency(const MarkovKernel& kernel, const FiniteMetricSpace& d,
                               const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p);

struct ChebyshevSplit {
  PointPair pair;
  std::size_t field = 0;
  double lhs = 0.0;  // |Pf(x) - Pf(y)|
  double rhs = 0.0;  // ||G_r||_{L^q(P_x)} d~ + 2 ||f||_inf d~^{1 + (p-1)/2}
};

/// Splits |Pf(x) - Pf(y)| at radius r = d~(x,y)^{1/(2q)}, d~ = K d, for
/// 1 < p < inf.
std::vector<ChebyshevSplit> chebyshev_split_check(const MarkovKernel& kernel,
                                                  const FiniteMetricSpace& d, double p, double K,
                                                  std::span<const PointPair> pairs,
                                                  const FieldCorpus& corpus);

/// Percentile bootstrap interval.
struct BootstrapInterval {
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double half_width() const { return 0.5 * (upper - lower); }
  bool overlaps(const BootstrapInterval& other) const {
    return lower <= other.upper && other.lower <= upper;
  }
};

struct HeisenbergRunOptions {
  double t = 0.25;
  std::size_t steps = 200;
  std::size_t samples = 4000;
  /// Support size after thinning for the exact OT solves.
  std::size_t thinned = 200;
  std::size_t bootstrap = 200;
  std::uint64_t seed = 1;
};

struct HeisenbergPairEstimate {
  Step2Point x;
  Step2Point y;
  double gauge = 0.0;
  double wasserstein = 0.0;
  BootstrapInterval ratio;
  /// Spread of the ratio over independent thinning offsets.
  double thinning_spread = 0.0;
};

struct HeisenbergConstant {
  double p = 1.0;
  double t = 0.0;
  std::vector<HeisenbergPairEstimate> pairs;
  /// max over pairs of W_p(cloud_x, cloud_y) / gauge(x, y), with the bootstrap
  /// interval of that maximum.
  BootstrapInterval constant;
};

/// Monte Carlo estimate of K_p for the subelliptic diffusion on a step-2
/// group under the Koranyi gauge. cloud_y is the left translate of cloud_x
/// by y x^{-1} (same driving noise); W_p is computed exactly between the
/// thinned empirical clouds and bootstrapped by joint resampling.
HeisenbergConstant estimate_heisenberg_constant(
    std::span<const std::pair<Step2Point, Step2Point>> pairs, double p,
    const HeisenbergRunOptions& options);

/// W_p between equal-size uniform empirical measures with cost matrix `dist`
/// (assignment solver; p = inf uses the bottleneck solver).
double empirical_wasserstein(const DenseMatrix& dist, double p);

}  // namespace wd
