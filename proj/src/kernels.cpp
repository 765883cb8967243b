#include "wasser_dual/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "wasser_dual/error.hpp"
#include "wasser_dual/parallel.hpp"

namespace wd {
namespace {

constexpr double kRowTolerance = 1e-12;

void check_space(const MarkovKernel& kernel, std::size_t size) {
  if (size != kernel.size()) {
    throw PreconditionError("kernel has " + std::to_string(kernel.size()) + " points, input has " +
                            std::to_string(size));
  }
}

void normalize_rows(DenseMatrix& rows) {
  for (std::size_t x = 0; x < rows.rows(); ++x) {
    auto row = rows.row(x);
    double sum = 0.0;
    for (double& v : row) {
      v = std::max(v, 0.0);
      sum += v;
    }
    for (double& v : row) v /= sum;
  }
}

// Circulant kernel on the n-point torus from its first row.
DenseMatrix circulant(const std::vector<double>& first) {
  const std::size_t n = first.size();
  DenseMatrix rows(n, n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) rows(x, y) = first[(y + n - x) % n];
  }
  return rows;
}

std::vector<double> wrapped_gaussian_row(std::size_t n, double t) {
  const auto wraps = static_cast<long>(std::ceil(0.5 + std::sqrt(72.0 * t))) + 1;
  std::vector<double> row(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double offset = static_cast<double>(std::min(k, n - k)) / static_cast<double>(n);
    double sum = 0.0;
    for (long w = -wraps; w <= wraps; ++w) {
      const double s = offset + static_cast<double>(w);
      sum += std::exp(-s * s / (2.0 * t));
    }
    row[k] = sum;
  }
  double total = 0.0;
  for (double v : row) total += v;
  for (double& v : row) v /= total;
  return row;
}

std::vector<double> laplacian_exponential_row(std::size_t n, double t) {
  const double nn = static_cast<double>(n);
  std::vector<double> row(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = std::sin(std::numbers::pi * static_cast<double>(k) / nn);
    const double weight = std::exp(-0.5 * t * 4.0 * nn * nn * s * s);
    for (std::size_t j = 0; j < n; ++j) {
      const auto phase = static_cast<double>((k * j) % n);
      row[j] += weight * std::cos(2.0 * std::numbers::pi * phase / nn);
    }
  }
  double total = 0.0;
  for (double& v : row) {
    v = std::max(v / nn, 0.0);
    total += v;
  }
  for (double& v : row) v /= total;
  return row;
}

}  // namespace

MarkovKernel MarkovKernel::from_rows(SpacePtr space, DenseMatrix rows) {
  if (!space) throw PreconditionError("kernel needs a space");
  if (rows.rows() != space->size() || rows.cols() != space->size()) {
    throw MalformedInput("kernel matrix is " + std::to_string(rows.rows()) + "x" +
                         std::to_string(rows.cols()) + " for " + std::to_string(space->size()) +
                         " points");
  }
  for (std::size_t x = 0; x < rows.rows(); ++x) {
    double sum = 0.0;
    for (double v : rows.row(x)) {
      if (!std::isfinite(v)) throw MalformedInput("kernel has a non-finite entry");
      if (v < 0.0) throw PreconditionError("kernel row " + std::to_string(x) + " is negative");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowTolerance) {
      throw PreconditionError("kernel row " + std::to_string(x) + " sums to " +
                              std::to_string(sum));
    }
  }
  return MarkovKernel(std::move(space), std::move(rows));
}

DiscreteMeasure MarkovKernel::measure(std::size_t x) const {
  if (x >= size()) throw PreconditionError("kernel row out of range");
  const auto r = row(x);
  return DiscreteMeasure{space_, std::vector<double>(r.begin(), r.end())};
}

MarkovKernel MarkovKernel::then(const MarkovKernel& next) const {
  check_space(next, size());
  auto rows = multiply(rows_, next.rows_);
  normalize_rows(rows);
  return MarkovKernel(space_, std::move(rows));
}

std::vector<double> apply(const MarkovKernel& kernel, std::span<const double> f) {
  check_space(kernel, f.size());
  std::vector<double> out(f.size());
  const auto n = static_cast<long>(f.size());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long sx = 0; sx < n; ++sx) {
    const auto row = kernel.row(static_cast<std::size_t>(sx));
    double s = 0.0;
    for (std::size_t y = 0; y < row.size(); ++y) s += row[y] * f[y];
    out[static_cast<std::size_t>(sx)] = s;
  }
  return out;
}

ScalarField apply(const MarkovKernel& kernel, const ScalarField& f) {
  return ScalarField{kernel.space(), apply(kernel, std::span<const double>(f.values))};
}

DiscreteMeasure adjoint_apply(const MarkovKernel& kernel, const DiscreteMeasure& mu) {
  check_space(kernel, mu.size());
  const std::size_t n = mu.size();
  std::vector<double> out(n, 0.0);
  const auto cols = static_cast<long>(n);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long sy = 0; sy < cols; ++sy) {
    const auto y = static_cast<std::size_t>(sy);
    double s = 0.0;
    for (std::size_t x = 0; x < n; ++x) s += mu.weights[x] * kernel.matrix()(x, y);
    out[y] = s;
  }
  return DiscreteMeasure{kernel.space(), std::move(out)};
}

MarkovKernel torus_heat_kernel(SpacePtr torus, double t, HeatKernelMethod method) {
  if (!torus || torus->size() < 3) throw PreconditionError("torus needs at least 3 points");
  if (!(t > 0.0) || !std::isfinite(t)) throw PreconditionError("heat time must be positive");
  const std::size_t n = torus->size();
  auto first = method == HeatKernelMethod::wrapped_gaussian ? wrapped_gaussian_row(n, t)
                                                            : laplacian_exponential_row(n, t);
  return MarkovKernel::from_rows(std::move(torus), circulant(first));
}

MarkovKernel torus_heat_kernel(std::size_t n, double t, HeatKernelMethod method) {
  return torus_heat_kernel(torus_space(n), t, method);
}

MarkovKernel random_walk_kernel(SpacePtr space, std::size_t steps, double laziness) {
  if (!space) throw PreconditionError("kernel needs a space");
  if (!space->graph()) throw PreconditionError("random walk needs the generating graph");
  if (!(laziness >= 0.0 && laziness <= 1.0)) throw PreconditionError("laziness must be in [0, 1]");
  const auto& graph = *space->graph();
  if (!graph.connected()) throw PreconditionError("random walk needs a connected graph");
  const std::size_t n = space->size();
  DenseMatrix step(n, n);
  for (std::size_t x = 0; x < n; ++x) {
    step(x, x) += 1.0 - laziness;
    const auto neighbors = graph.neighbors(x);
    for (const auto& nb : neighbors) {
      step(x, nb.vertex) += laziness / static_cast<double>(neighbors.size());
    }
  }
  DenseMatrix result = DenseMatrix::identity(n);
  DenseMatrix power = step;
  for (std::size_t e = steps; e > 0; e >>= 1) {
    if (e & 1U) result = multiply(result, power);
    if (e > 1) power = multiply(power, power);
  }
  normalize_rows(result);
  return MarkovKernel::from_rows(std::move(space), std::move(result));
}

MarkovKernel identity_kernel(SpacePtr space) {
  if (!space) throw PreconditionError("kernel needs a space");
  const std::size_t n = space->size();
  return MarkovKernel::from_rows(std::move(space), DenseMatrix::identity(n));
}

MarkovKernel collapse_kernel(SpacePtr space, std::size_t target) {
  if (!space || target >= space->size()) throw PreconditionError("collapse target out of range");
  const std::size_t n = space->size();
  DenseMatrix rows(n, n);
  for (std::size_t x = 0; x < n; ++x) rows(x, target) = 1.0;
  return MarkovKernel::from_rows(std::move(space), std::move(rows));
}

double max_row_total_variation(const MarkovKernel& a, const MarkovKernel& b) {
  check_space(b, a.size());
  double worst = 0.0;
  for (std::size_t x = 0; x < a.size(); ++x) {
    double tv = 0.0;
    const auto ra = a.row(x);
    const auto rb = b.row(x);
    for (std::size_t y = 0; y < ra.size(); ++y) tv += std::abs(ra[y] - rb[y]);
    worst = std::max(worst, 0.5 * tv);
  }
  return worst;
}

namespace serial {

std::vector<double> apply(const MarkovKernel& kernel, std::span<const double> f) {
  check_space(kernel, f.size());
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t x = 0; x < f.size(); ++x) {
    const auto row = kernel.row(x);
    for (std::size_t y = 0; y < row.size(); ++y) out[x] += row[y] * f[y];
  }
  return out;
}

std::vector<double> adjoint_apply(const MarkovKernel& kernel, std::span<const double> mu) {
  check_space(kernel, mu.size());
  std::vector<double> out(mu.size(), 0.0);
  for (std::size_t x = 0; x < mu.size(); ++x) {
    const auto row = kernel.row(x);
    for (std::size_t y = 0; y < row.size(); ++y) out[y] += mu[x] * row[y];
  }
  return out;
}

}  // namespace serial
}  // namespace wd
