#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "wasser_dual/error.hpp"
#include "wasser_dual/hopf_lax.hpp"
#include "wasser_dual/slope.hpp"

using namespace wd;

namespace {

SpacePtr two_points() {
  DenseMatrix d(2, 2);
  d(0, 1) = d(1, 0) = 1.0;
  return std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::from_matrix(d));
}

std::vector<double> direct_hopf_lax(const std::vector<double>& f, double t, double p,
                                    const FiniteMetricSpace& d) {
  std::vector<double> out(f.size());
  for (std::size_t x = 0; x < f.size(); ++x) {
    double best = f[x];
    for (std::size_t y = 0; y < f.size(); ++y) {
      best = std::min(best, f[y] + std::pow(d(x, y), p) / (p * std::pow(t, p - 1.0)));
    }
    out[x] = best;
  }
  return out;
}

ScalarField random_field(const SpacePtr& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> v(s->size());
  for (double& x : v) x = unit(rng);
  return ScalarField::from_values(s, v);
}

ScalarField smooth_field(const SpacePtr& s) {
  std::vector<double> v(s->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(3.0 * (*s)(0, i)) + (*s)(0, i);
  return ScalarField::from_values(s, v);
}

}  // namespace

TEST(HopfLax, ConstantFieldIsFixed) {
  const auto s = torus_space(12);
  const auto f = ScalarField::from_values(s, std::vector<double>(12, 2.5));
  EXPECT_EQ(hopf_lax(f, 0.3, PowerLagrangian(2.0), *s).values, f.values);
}

TEST(HopfLax, TwoPointExample) {
  const auto s = two_points();
  const auto q = hopf_lax(ScalarField::from_values(s, {0, 10}), 1.0, PowerLagrangian(2.0), *s);
  EXPECT_EQ(q.values, (std::vector<double>{0, 0.5}));
}

TEST(HopfLax, RejectsNegativeTimeAndBadExponent) {
  const auto s = two_points();
  EXPECT_THROW(hopf_lax(ScalarField::from_values(s, {0, 1}), -1.0, PowerLagrangian(2.0), *s),
               PreconditionError);
  EXPECT_THROW(PowerLagrangian(1.0), PreconditionError);
}

TEST(HopfLax, MatchesDirectFormula) {
  std::mt19937_64 rng(1);
  const auto s = torus_space(40);
  for (double p : {1.5, 2.0, 3.0}) {
    const auto f = random_field(s, rng);
    for (double t : {0.01, 0.1, 1.0}) {
      const auto q = hopf_lax(f, t, PowerLagrangian(p), *s).values;
      const auto ref = direct_hopf_lax(f.values, t, p, *s);
      for (std::size_t x = 0; x < q.size(); ++x) EXPECT_NEAR(q[x], ref[x], 1e-13);
    }
  }
}

TEST(HopfLax, SandwichAndMonotoneInTime) {
  std::mt19937_64 rng(2);
  const auto s = unit_interval_space(50);
  for (int trial = 0; trial < 5; ++trial) {
    const auto f = random_field(s, rng);
    const double inf_f = *std::min_element(f.values.begin(), f.values.end());
    std::vector<double> prev = f.values;
    for (double t : {0.001, 0.01, 0.05, 0.2, 1.0, 10.0}) {
      const auto q = hopf_lax(f, t, PowerLagrangian(2.0), *s).values;
      for (std::size_t x = 0; x < q.size(); ++x) {
        EXPECT_LE(q[x], f.values[x]);
        EXPECT_GE(q[x], inf_f);
        EXPECT_LE(q[x], prev[x]);
      }
      prev = q;
    }
  }
}

TEST(HopfLax, MinimizerIsSelfForSmallTime) {
  std::mt19937_64 rng(4);
  const auto s = torus_space(20);
  for (double p : {1.5, 2.0, 3.0}) {
    const auto f = random_field(s, rng);
    const double osc = f.oscillation();
    const double t_min = std::pow(std::pow(s->min_positive_distance(), p) / (p * osc), 1.0 / (p - 1.0));
    const auto m = hopf_lax_minimizers(f, 0.5 * t_min, PowerLagrangian(p), *s);
    for (std::size_t x = 0; x < m.size(); ++x) EXPECT_EQ(m[x], x);
  }
}

TEST(Legendre, ClosedFormAndNumeric) {
  EXPECT_EQ(legendre(PowerLagrangian(2.0), 0.0), 0.0);
  EXPECT_DOUBLE_EQ(legendre(PowerLagrangian(2.0), 3.0), 4.5);
  EXPECT_NEAR(legendre(PowerLagrangian(3.0), 2.0), std::pow(2.0, 1.5) * 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(legendre_numeric(PowerLagrangian(3.0), 2.0, 10.0, 1e-5), 1.8856, 1e-4);
}

TEST(Legendre, YoungInequality) {
  for (double p : {1.5, 2.0, 3.0}) {
    const PowerLagrangian L(p);
    for (double a = 0.0; a <= 3.0; a += 0.1) {
      for (double b = 0.0; b <= 3.0; b += 0.1) EXPECT_GE(L(a) + L.conjugate(b) - a * b, -1e-9);
      const double b = std::pow(a, p - 1.0);
      EXPECT_NEAR(L(a) + L.conjugate(b), a * b, 1e-9);
    }
  }
}

TEST(Semigroup, ConstantFieldHasZeroDefect) {
  const auto s = torus_space(10);
  EXPECT_EQ(semigroup_defect(ScalarField::from_values(s, std::vector<double>(10, 1.0)), 0.1, 0.2,
                             PowerLagrangian(2.0), *s),
            0.0);
}

TEST(Semigroup, TwoPointDefectIsReported) {
  const auto s = two_points();
  const double defect =
      semigroup_defect(ScalarField::from_values(s, {0, 10}), 0.5, 0.5, PowerLagrangian(2.0), *s);
  EXPECT_GE(defect, 0.0);
  EXPECT_TRUE(std::isfinite(defect));
}

TEST(Semigroup, DefectShrinksWithMesh) {
  for (double p : {1.5, 2.0, 3.0}) {
    double previous = 1e300;
    for (std::size_t n : {50, 100, 200}) {
      const auto s = unit_interval_space(n);
      const double defect = semigroup_defect(smooth_field(s), 0.1, 0.1, PowerLagrangian(p), *s);
      EXPECT_LE(defect, previous);
      previous = defect;
    }
    EXPECT_LE(previous, 5.0 / 199.0);
  }
}

TEST(HamiltonJacobi, ConstantFieldResidualVanishes) {
  const auto s = unit_interval_space(20);
  const auto r = hj_residual(ScalarField::from_values(s, std::vector<double>(20, 4.0)), 0.1, 1e-3,
                             PowerLagrangian(2.0), *s);
  for (double v : r) EXPECT_EQ(v, 0.0);
}

TEST(HamiltonJacobi, LinearFieldInteriorResidual) {
  const std::size_t n = 200;
  const auto s = unit_interval_space(n);
  const auto f = ScalarField::from_values(s, {s->row(0).begin(), s->row(0).end()});
  const double sigma = 1e-3, h = 1.0 / 199.0, t = 0.1;
  const auto r = hj_residual(f, t, sigma, PowerLagrangian(2.0), *s);
  for (std::size_t x = 0; x < n; ++x) {
    if ((*s)(0, x) > t + sigma + h) EXPECT_LE(std::abs(r[x]), 10.0 * (h + sigma)) << x;
  }
}

TEST(SpaceTimeLipschitz, Examples) {
  const auto s = unit_interval_space(40);
  const std::vector<double> times = {0.0, 0.05, 0.1, 0.2};
  const auto zero = hopf_lax_lipschitz_bound(ScalarField::from_values(s, std::vector<double>(40, 1.0)),
                                             PowerLagrangian(2.0), *s, times);
  EXPECT_EQ(zero.measured, 0.0);
  EXPECT_EQ(zero.bound, 0.0);
  const auto cone = ScalarField::from_values(s, {s->row(0).begin(), s->row(0).end()});
  const auto one = hopf_lax_lipschitz_bound(cone, PowerLagrangian(2.0), *s, times);
  EXPECT_NEAR(one.bound, 1.0, 1e-12);
  EXPECT_TRUE(one.holds());
  auto doubled = cone;
  for (double& v : doubled.values) v *= 2.0;
  const auto two = hopf_lax_lipschitz_bound(doubled, PowerLagrangian(2.0), *s, times);
  EXPECT_NEAR(two.bound, 2.0, 1e-12);
  EXPECT_TRUE(two.holds());
}
