#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "wasser_dual/error.hpp"
#include "wasser_dual/duality_lab.hpp"
#include "wasser_dual/transport.hpp"

using namespace wd;

namespace {

SpacePtr two_points() {
  DenseMatrix d(2, 2);
  d(0, 1) = d(1, 0) = 1.0;
  return std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::from_matrix(d));
}

SpacePtr line3() { return std::make_shared<const FiniteMetricSpace>(shortest_path_space(path_graph(3))); }

SpacePtr random_space(std::mt19937_64& rng, std::size_t n) {
  return std::make_shared<const FiniteMetricSpace>(
      FiniteMetricSpace::from_matrix(oracle::random_euclidean(rng, n)));
}

double dual_value(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const DualPotentials& duals) {
  return mu.integrate(duals.f_star) - nu.integrate(duals.f);
}

}  // namespace

TEST(Wasserstein, DiracToItself) {
  const auto s = two_points();
  const auto a = DiscreteMeasure::dirac(s, 0);
  const auto r = wasserstein_p(a, a, 1.0);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.plan.mass(0, 0), 1.0);
}

TEST(Wasserstein, TwoPointInstance) {
  const auto s = two_points();
  const auto mu = DiscreteMeasure::from_weights(s, {0.5, 0.5});
  const auto nu = DiscreteMeasure::from_weights(s, {0.75, 0.25});
  EXPECT_NEAR(wasserstein_p(mu, nu, 1.0).value, 0.25, 1e-15);
  EXPECT_NEAR(wasserstein_p(mu, nu, 2.0).value, 0.5, 1e-15);
  EXPECT_EQ(wasserstein_inf(mu, nu).value, 1.0);
}

TEST(Wasserstein, InfOnCollinearPoints) {
  const auto s = line3();
  const auto mu = DiscreteMeasure::dirac(s, 0);
  const auto nu = DiscreteMeasure::from_weights(s, {0.0, 0.5, 0.5});
  EXPECT_EQ(wasserstein_inf(mu, nu).value, 2.0);
  EXPECT_EQ(wasserstein_inf(mu, mu).value, 0.0);
}

TEST(Wasserstein, RejectsBadMeasures) {
  const auto s = two_points();
  EXPECT_THROW(DiscreteMeasure::from_weights(s, {0.5, 0.6}), MalformedInput);
  EXPECT_THROW(DiscreteMeasure::from_weights(s, {1.5, -0.5}), MalformedInput);
  EXPECT_THROW(DiscreteMeasure::from_weights(s, {1.0}), MalformedInput);
  const auto mu = DiscreteMeasure::dirac(s, 0);
  EXPECT_THROW(wasserstein_p(mu, mu, 0.5), PreconditionError);
}

TEST(Wasserstein, MatchesGridOracleOnSmallSupports) {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> shape(0, 3);
  const std::pair<std::size_t, std::size_t> shapes[] = {{2, 2}, {2, 3}, {3, 2}, {1, 4}};
  for (int trial = 0; trial < 30; ++trial) {
    const auto [m, n] = shapes[shape(rng)];
    const auto mu = oracle::random_probability(rng, m);
    const auto nu = oracle::random_probability(rng, n);
    const auto pts = oracle::random_euclidean(rng, m + n);
    DenseMatrix dist(m, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) dist(i, j) = pts(i, m + j);
    for (double p : {1.0, 2.0, 3.0}) {
      EXPECT_NEAR(wasserstein_p(mu, nu, dist, p).value, oracle::grid_wasserstein(mu, nu, dist, p, 2e-3),
                  2e-3);
    }
  }
}

TEST(Wasserstein, MatchesClosedFormTwoByTwo) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto mu = oracle::random_probability(rng, 2);
    const auto nu = oracle::random_probability(rng, 2);
    const auto pts = oracle::random_euclidean(rng, 4);
    DenseMatrix dist(2, 2);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) dist(i, j) = pts(i, 2 + j);
    for (double p : {1.0, 2.0, 3.0}) {
      EXPECT_NEAR(wasserstein_p(mu, nu, dist, p).value, oracle::two_by_two_wasserstein(mu, nu, dist, p),
                  1e-9);
    }
  }
}

TEST(Wasserstein, InfMatchesHallOracle) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t m = 2 + trial % 5, n = 2 + (trial / 5) % 5;
    const auto mu = oracle::random_probability(rng, m, 0.2);
    const auto nu = oracle::random_probability(rng, n, 0.2);
    const auto pts = oracle::random_euclidean(rng, m + n);
    DenseMatrix dist(m, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) dist(i, j) = pts(i, m + j);
    const auto r = wasserstein_inf(mu, nu, dist);
    EXPECT_EQ(r.value, oracle::hall_bottleneck(mu, nu, dist));
    EXPECT_LE(r.plan.marginal_error(mu, nu), 1e-12);
    EXPECT_LE(r.plan.support_sup(dist), r.value);
    bool is_entry = false;
    for (double v : dist.values()) is_entry = is_entry || v == r.value;
    EXPECT_TRUE(is_entry);
  }
}

TEST(Wasserstein, StrongDualityAndFeasibleDuals) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_space(rng, 5 + trial);
    const auto mu = DiscreteMeasure::from_weights(s, oracle::random_probability(rng, s->size(), 0.3));
    const auto nu = DiscreteMeasure::from_weights(s, oracle::random_probability(rng, s->size(), 0.3));
    for (double p : {1.0, 2.0, 3.5}) {
      const auto r = wasserstein_p(mu, nu, p);
      const double primal = std::pow(r.value, p);
      EXPECT_NEAR(primal, dual_value(mu, nu, r.duals), 1e-9);
      EXPECT_NEAR(r.plan.cost_p(s->matrix(), p), primal, 1e-9);
      EXPECT_LE(r.plan.marginal_error(mu.weights, nu.weights), 1e-12);
      EXPECT_EQ(r.duals.f[0], 0.0);
      for (std::size_t x = 0; x < s->size(); ++x)
        for (std::size_t y = 0; y < s->size(); ++y)
          EXPECT_LE(r.duals.f_star[x] - r.duals.f[y], oracle::power_cost((*s)(x, y), p) + 1e-9);
      EXPECT_NEAR(kantorovich_gap(mu, nu, *s, p, r.duals.f), 0.0, 1e-9);
    }
  }
}

TEST(Wasserstein, MetricAxioms) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = random_space(rng, 6 + trial);
    std::vector<DiscreteMeasure> m;
    for (int k = 0; k < 3; ++k) m.push_back(DiscreteMeasure::from_weights(s, oracle::random_probability(rng, s->size(), 0.3)));
    for (double p : {1.0, 2.0, kInf}) {
      auto w = [&](int a, int b) { return wasserstein_value(m[a], m[b], *s, p); };
      EXPECT_NEAR(w(0, 1), w(1, 0), 1e-8);
      EXPECT_NEAR(w(0, 0), 0.0, 1e-12);
      EXPECT_GT(w(0, 1), 0.0);
      EXPECT_LE(w(0, 2), w(0, 1) + w(1, 2) + 1e-8);
    }
  }
}

TEST(Wasserstein, LimitSequenceOnTwoPointFamily) {
  const auto s = two_points();
  const auto mu = DiscreteMeasure::from_weights(s, {0.5, 0.5});
  const auto nu = DiscreteMeasure::from_weights(s, {0.75, 0.25});
  const std::vector<double> ps = {1, 2, 4, 8, 16, 32, 64, kInf};
  const auto seq = wp_limit_sequence(mu, nu, *s, ps);
  for (std::size_t k = 0; k + 1 < ps.size(); ++k) {
    EXPECT_NEAR(seq[k], std::pow(0.25, 1.0 / ps[k]), 1e-12);
    EXPECT_LE(seq[k], seq[k + 1] + 1e-10);
  }
  EXPECT_EQ(seq.back(), 1.0);
  EXPECT_EQ(wp_limit_sequence(mu, mu, *s, ps), std::vector<double>(ps.size(), 0.0));
}

TEST(Wasserstein, LargeExponentStaysMonotone) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = random_space(rng, 12);
    const auto mu = DiscreteMeasure::from_weights(s, oracle::random_probability(rng, 12, 0.2));
    const auto nu = DiscreteMeasure::from_weights(s, oracle::random_probability(rng, 12, 0.2));
    const std::vector<double> ps = {1, 2, 4, 8, 16, 32, 64, 128, kInf};
    const auto seq = wp_limit_sequence(mu, nu, *s, ps);
    for (std::size_t k = 0; k + 1 < seq.size(); ++k) EXPECT_LE(seq[k], seq[k + 1] + 1e-10);
  }
}

TEST(CTransform, Examples) {
  const auto s = two_points();
  EXPECT_EQ(c_transform(std::vector<double>{0, 0}, *s, 1.0), (std::vector<double>{0, 0}));
  EXPECT_EQ(c_transform(std::vector<double>{0, 3}, *s, 1.0), (std::vector<double>{0, 1}));
  const auto shifted = c_transform(std::vector<double>{2, 5}, *s, 1.0);
  EXPECT_EQ(shifted, (std::vector<double>{2, 3}));
}

TEST(KantorovichGap, WeakDualityForArbitraryPotentials) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const auto s = random_space(rng, 10);
  const auto mu = DiscreteMeasure::from_weights(s, oracle::random_probability(rng, 10));
  const auto nu = DiscreteMeasure::from_weights(s, oracle::random_probability(rng, 10));
  for (int k = 0; k < 50; ++k) {
    std::vector<double> f(10);
    for (double& v : f) v = unit(rng);
    EXPECT_GE(kantorovich_gap(mu, nu, *s, 2.0, f), -1e-12);
  }
  EXPECT_EQ(kantorovich_gap(mu, mu, *s, 2.0, std::vector<double>(10, 0.0)), 0.0);
}

TEST(Rubinstein, TwoPointCertificate) {
  const auto s = two_points();
  const auto a = DiscreteMeasure::dirac(s, 0);
  const auto b = DiscreteMeasure::dirac(s, 1);
  EXPECT_EQ(rubinstein_value(a, b, *s, std::vector<double>{0, -1}), 1.0);
  EXPECT_THROW(rubinstein_value(a, b, *s, std::vector<double>{0, 2}), PreconditionError);
  EXPECT_EQ(rubinstein_value(a, a, *s, std::vector<double>{0, 1}), 0.0);
}

TEST(Rubinstein, CertificateAttainsW1) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = random_space(rng, 8);
    const auto mu = DiscreteMeasure::from_weights(s, oracle::random_probability(rng, 8, 0.3));
    const auto nu = DiscreteMeasure::from_weights(s, oracle::random_probability(rng, 8, 0.3));
    const auto f = rubinstein_certificate(mu, nu, *s);
    EXPECT_NEAR(rubinstein_value(mu, nu, *s, f), wasserstein_p(mu, nu, 1.0).value, 1e-10);
    const auto x0 = static_cast<std::size_t>(trial % 8);
    const auto cone = std::vector<double>(s->row(x0).begin(), s->row(x0).end());
    const auto dirac = DiscreteMeasure::dirac(s, x0);
    const double v = rubinstein_value(dirac, nu, *s, cone);
    EXPECT_NEAR(v, -nu.integrate(cone), 1e-15);
    EXPECT_LE(std::abs(v), wasserstein_p(dirac, nu, 1.0).value + 1e-12);
  }
}

TEST(Gluing, DiracPicksPlan) {
  const auto s = two_points();
  DenseMatrix m(2, 2);
  m(0, 1) = 1.0;
  const auto pi = Coupling::from_mass(m);
  CouplingFamily family;
  family[{0, 1}] = Coupling::product(std::vector<double>{0.3, 0.7}, std::vector<double>{0.5, 0.5});
  const auto glued = glue_couplings(pi, family);
  const Coupling expected = family[{0, 1}];
  EXPECT_EQ(glued.mass, expected.mass);
  EXPECT_THROW(glue_couplings(Coupling::from_mass(DenseMatrix::identity(2)), family), PreconditionError);
}

TEST(Gluing, HandComputedTwoByTwo) {
  DenseMatrix m(2, 2);
  m(0, 0) = 0.25;
  m(1, 1) = 0.75;
  const auto pi = Coupling::from_mass(m);
  DenseMatrix a(2, 2), b(2, 2);
  a(0, 1) = 1.0;
  b(0, 0) = 0.5;
  b(1, 1) = 0.5;
  CouplingFamily family{{{0, 0}, Coupling::from_mass(a)}, {{1, 1}, Coupling::from_mass(b)}};
  const auto g = glue_couplings(pi, family);
  EXPECT_DOUBLE_EQ(g.mass(0, 0), 0.375);
  EXPECT_DOUBLE_EQ(g.mass(0, 1), 0.25);
  EXPECT_DOUBLE_EQ(g.mass(1, 1), 0.375);
  EXPECT_DOUBLE_EQ(g.mass(1, 0), 0.0);
  DenseMatrix dist(2, 2);
  dist(0, 1) = dist(1, 0) = 2.0;
  EXPECT_DOUBLE_EQ(g.cost_p(dist, 2.0), 0.25 * 4.0);
}

TEST(Solvers, AssignmentMatchesPermutationSearch) {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 6;
    DenseMatrix c(n, n);
    for (auto& v : c.storage()) v = unit(rng);
    double total = 0.0;
    solve_assignment(c, &total);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    double best = 1e300;
    do {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += c(i, perm[i]);
      best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_NEAR(total, best, 1e-12);
  }
}

TEST(Solvers, SimplexHandlesDegenerateInstances) {
  const std::vector<double> supply(6, 1.0 / 6.0), demand(6, 1.0 / 6.0);
  DenseMatrix cost(6, 6, 1.0);
  for (std::size_t i = 0; i < 6; ++i) cost(i, (i + 1) % 6) = 0.0;
  const auto sol = solve_transport(supply, demand, cost);
  EXPECT_NEAR(sol.cost, 0.0, 1e-15);
  EXPECT_THROW(solve_transport(std::vector<double>{0.5}, std::vector<double>{1.0}, DenseMatrix(1, 1)),
               PreconditionError);
}
