#pragma once

#include <cstddef>
#include <span>

#include "wasser_dual/dense_matrix.hpp"
#include "wasser_dual/metric_space.hpp"
#include "wasser_dual/slope.hpp"
#include "wasser_dual/transport.hpp"

namespace wd {

/// Row-stochastic transition matrix: row x is the density of P_x.
class MarkovKernel {
 public:
  /// Throws MalformedInput on shape mismatch and PreconditionError when a
  /// row is negative or does not sum to 1 within 1e-12.
  static MarkovKernel from_rows(SpacePtr space, DenseMatrix rows);

  const SpacePtr& space() const noexcept { return space_; }
  std::size_t size() const noexcept { return rows_.rows(); }
  const DenseMatrix& matrix() const noexcept { return rows_; }
  std::span<const double> row(std::size_t x) const { return rows_.row(x); }

  /// P_x as a measure.
  DiscreteMeasure measure(std::size_t x) const;

  /// Kernel of "this step, then `next`".
  MarkovKernel then(const MarkovKernel& next) const;

 private:
  MarkovKernel(SpacePtr space, DenseMatrix rows) : space_(std::move(space)), rows_(std::move(rows)) {}

  SpacePtr space_;
  DenseMatrix rows_;
};

/// Pf(x) = sum_y P_x(y) f(y).
ScalarField apply(const MarkovKernel& kernel, const ScalarField& f);
std::vector<double> apply(const MarkovKernel& kernel, std::span<const double> f);

/// (P* mu)(y) = sum_x mu(x) P_x(y).
DiscreteMeasure adjoint_apply(const MarkovKernel& kernel, const DiscreteMeasure& mu);

enum class HeatKernelMethod {
  wrapped_gaussian,       // sum_k exp(-(d + k)^2 / (2t)), normalized per row
  laplacian_exponential,  // exp(t/2 * graph Laplacian), via the circulant spectrum
};

/// Heat kernel on the unit-circumference discrete torus with n >= 3 points.
MarkovKernel torus_heat_kernel(std::size_t n, double t,
                               HeatKernelMethod method = HeatKernelMethod::wrapped_gaussian);
/// Same, on an existing torus space (size n, mesh 1/n).
MarkovKernel torus_heat_kernel(SpacePtr torus, double t,
                               HeatKernelMethod method = HeatKernelMethod::wrapped_gaussian);

/// ((1 - laziness) I + laziness W)^steps with W the degree-normalized
/// adjacency of the space's generating graph.
MarkovKernel random_walk_kernel(SpacePtr space, std::size_t steps, double laziness);

MarkovKernel identity_kernel(SpacePtr space);
/// Every row equal to the Dirac mass at `target`.
MarkovKernel collapse_kernel(SpacePtr space, std::size_t target);

/// max over x of the total-variation distance between rows a_x and b_x.
double max_row_total_variation(const MarkovKernel& a, const MarkovKernel& b);

namespace serial {
std::vector<double> apply(const MarkovKernel& kernel, std::span<const double> f);
std::vector<double> adjoint_apply(const MarkovKernel& kernel, std::span<const double> mu);
}  // namespace serial

}  // namespace wd
