#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "wasser_dual/error.hpp"
#include "wasser_dual/kernels.hpp"

using namespace wd;

namespace {

SpacePtr two_points() {
  DenseMatrix d(2, 2);
  d(0, 1) = d(1, 0) = 1.0;
  return std::make_shared<const FiniteMetricSpace>(shortest_path_space(path_graph(2)));
}

MarkovKernel half_half() {
  return MarkovKernel::from_rows(two_points(), DenseMatrix(2, 2, 0.5));
}

}  // namespace

TEST(Kernel, IdentityAndConstants) {
  const auto s = torus_space(9);
  const auto id = identity_kernel(s);
  const std::vector<double> f = {1, 4, 2, 8, 5, 7, 0, 3, 6};
  EXPECT_EQ(wd::apply(id, std::span<const double>(f)), f);
  const auto heat = torus_heat_kernel(s, 0.03);
  for (double v : wd::apply(heat, std::vector<double>(9, 2.0))) EXPECT_NEAR(v, 2.0, 1e-14);
}

TEST(Kernel, TwoStateExample) {
  const auto k = half_half();
  EXPECT_EQ(wd::apply(k, std::vector<double>{0, 2}), (std::vector<double>{1, 1}));
  const auto mu = DiscreteMeasure::dirac(k.space(), 0);
  EXPECT_EQ(adjoint_apply(k, mu).weights, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(adjoint_apply(identity_kernel(k.space()), mu).weights, mu.weights);
}

TEST(Kernel, AdjointOfDiracIsRow) {
  const auto k = torus_heat_kernel(16, 0.01);
  for (std::size_t x = 0; x < 16; ++x) {
    const auto img = adjoint_apply(k, DiscreteMeasure::dirac(k.space(), x)).weights;
    const auto row = k.row(x);
    for (std::size_t y = 0; y < 16; ++y) EXPECT_EQ(img[y], row[y]);
  }
}

TEST(Kernel, RejectsMalformedRows) {
  const auto s = two_points();
  EXPECT_THROW(MarkovKernel::from_rows(s, DenseMatrix(3, 3, 1.0 / 3.0)), MalformedInput);
  DenseMatrix neg(2, 2);
  neg(0, 0) = 1.5;
  neg(0, 1) = -0.5;
  neg(1, 1) = 1.0;
  EXPECT_THROW(MarkovKernel::from_rows(s, neg), PreconditionError);
  EXPECT_THROW(MarkovKernel::from_rows(s, DenseMatrix(2, 2, 0.4)), PreconditionError);
  EXPECT_THROW(wd::apply(half_half(), std::vector<double>{1, 2, 3}), PreconditionError);
}

TEST(HeatKernel, RowsAndTranslationInvariance) {
  for (auto method : {HeatKernelMethod::wrapped_gaussian, HeatKernelMethod::laplacian_exponential}) {
    const auto k = torus_heat_kernel(32, 0.02, method);
    for (std::size_t x = 0; x < 32; ++x) {
      double sum = 0.0;
      for (double v : k.row(x)) {
        EXPECT_GE(v, 0.0);
        sum += v;
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
      for (std::size_t y = 0; y < 32; ++y) EXPECT_EQ(k.matrix()(x, y), k.matrix()((x + 1) % 32, (y + 1) % 32));
    }
  }
}

TEST(HeatKernel, LargeTimeIsUniform) {
  const auto k = torus_heat_kernel(20, 10.0);
  for (double v : k.matrix().values()) EXPECT_NEAR(v, 1.0 / 20.0, 1e-10);
}

TEST(HeatKernel, ChapmanKolmogorovDefectIsSmall) {
  const auto a = torus_heat_kernel(64, 0.01);
  const auto b = torus_heat_kernel(64, 0.02);
  const auto ab = torus_heat_kernel(64, 0.03);
  EXPECT_LE(max_row_total_variation(a.then(b), ab), 1e-8);
}

TEST(HeatKernel, RejectsBadParameters) {
  EXPECT_THROW(torus_heat_kernel(2, 0.1), PreconditionError);
  EXPECT_THROW(torus_heat_kernel(8, 0.0), PreconditionError);
}

TEST(RandomWalk, Examples) {
  const auto s = std::make_shared<const FiniteMetricSpace>(shortest_path_space(cycle_graph(5)));
  const auto lazy0 = random_walk_kernel(s, 4, 0.0);
  EXPECT_EQ(lazy0.matrix(), DenseMatrix::identity(5));
  const auto pair = std::make_shared<const FiniteMetricSpace>(shortest_path_space(path_graph(2)));
  const auto swap = random_walk_kernel(pair, 1, 1.0);
  EXPECT_EQ(swap.matrix()(0, 1), 1.0);
  EXPECT_EQ(swap.matrix()(1, 0), 1.0);
  const auto walk = random_walk_kernel(s, 3, 0.5);
  for (std::size_t x = 0; x < 5; ++x) {
    double sum = 0.0;
    for (double v : walk.row(x)) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  const auto bare = std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::from_matrix(s->matrix()));
  EXPECT_THROW(random_walk_kernel(bare, 1, 0.5), PreconditionError);
}

TEST(Kernel, DualityPairing) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const auto k = torus_heat_kernel(30, 0.02);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> f(30);
    for (double& v : f) v = unit(rng);
    const auto mu = DiscreteMeasure::from_weights(k.space(), oracle::random_probability(rng, 30));
    const auto pf = wd::apply(k, std::span<const double>(f));
    EXPECT_NEAR(mu.integrate(pf), adjoint_apply(k, mu).integrate(f), 1e-12);
  }
}

TEST(Kernel, CompositionPreservesMass) {
  const auto s = std::make_shared<const FiniteMetricSpace>(shortest_path_space(cycle_graph(12)));
  const auto a = random_walk_kernel(s, 2, 0.3);
  const auto b = collapse_kernel(s, 4);
  for (const auto& k : {a.then(a), a.then(b), b.then(a)}) {
    for (std::size_t x = 0; x < 12; ++x) {
      double sum = 0.0;
      for (double v : k.row(x)) {
        EXPECT_GE(v, 0.0);
        sum += v;
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}
