#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <span>
#include <vector>

#include "wasser_dual/dense_matrix.hpp"

namespace wd {

/// Element of R^n x R^{n(n-1)/2} with the step-2 group law
///   (x; z) . (x'; z') = (x + x'; z_ij + z'_ij + (x_i x'_j - x_j x'_i) / 2).
/// Area coordinates are ordered by pairs (i, j), i < j, lexicographically.
/// n = 2 is the Heisenberg group on R^3.
class Step2Point {
 public:
  Step2Point() = default;
  /// Origin of the group with n horizontal coordinates.
  explicit Step2Point(std::size_t n);
  Step2Point(std::vector<double> horizontal, std::vector<double> area);

  /// n = 2 convenience: (x, y; z).
  static Step2Point heisenberg(double x, double y, double z);

  static std::size_t area_dimension(std::size_t n) { return n * (n - 1) / 2; }
  /// Position of z_ij (i < j) in the area vector.
  static std::size_t area_index(std::size_t n, std::size_t i, std::size_t j);

  std::size_t horizontal_dimension() const noexcept { return x_.size(); }
  std::size_t dimension() const noexcept { return x_.size() + z_.size(); }
  std::span<const double> horizontal() const noexcept { return x_; }
  std::span<const double> area() const noexcept { return z_; }
  std::span<double> horizontal() noexcept { return x_; }
  std::span<double> area() noexcept { return z_; }

  bool operator==(const Step2Point&) const = default;

 private:
  std::vector<double> x_;
  std::vector<double> z_;
};

Step2Point group_mul(const Step2Point& a, const Step2Point& b);
Step2Point group_inverse(const Step2Point& a);
/// delta_lambda(x; z) = (lambda x; lambda^2 z).
Step2Point dilate(const Step2Point& a, double lambda);

/// Koranyi-type gauge [|dx|^4 + |dz|^2]^{1/4} of a^{-1} . b. Symmetric and
/// left-invariant; a quasi-metric, not asserted to satisfy the triangle
/// inequality.
double koranyi_gauge(const Step2Point& a, const Step2Point& b);

struct CCEstimate {
  double lower = 0.0;
  double upper = 0.0;
  /// Length of the best horizontal polygon found; equals `upper`.
  std::size_t segments = 0;
  /// |endpoint reached by the polygon - target| in gauge units.
  double endpoint_residual = 0.0;
  bool converged = true;
};

/// Carnot-Caratheodory distance bracket for n = 2. `upper` is the length of
/// the shortest horizontal path found among piecewise-constant controls
/// with `resolution` equal-time segments (shooting over the arc parameter,
/// then Newton refinement). `lower` is gauge / c, where c is the largest
/// gauge/upper ratio over a calibration set of unit-gauge directions (and
/// this pair).
CCEstimate cc_distance_estimate(const Step2Point& a, const Step2Point& b, std::size_t resolution);

/// Largest gauge / upper ratio over the calibration directions.
double cc_calibration_ratio(std::size_t resolution);

/// Monte Carlo configuration for the subelliptic diffusion.
struct SDEConfig {
  double t = 1.0;
  std::size_t steps = 1;
  std::size_t samples = 1;
  std::uint64_t seed = 0;
  Step2Point start{2};

  /// Throws PreconditionError unless t > 0, steps >= 1, samples >= 1.
  void validate() const;
};

/// Sample cloud: `size()` points of a step-2 group stored row-wise.
class Cloud {
 public:
  Cloud() = default;
  Cloud(std::size_t horizontal_dim, std::size_t samples);

  std::size_t size() const noexcept { return samples_; }
  std::size_t horizontal_dimension() const noexcept { return n_; }
  std::size_t dimension() const noexcept { return stride_; }

  std::span<const double> coordinates(std::size_t i) const {
    return {data_.data() + i * stride_, stride_};
  }
  std::span<double> coordinates(std::size_t i) { return {data_.data() + i * stride_, stride_}; }
  Step2Point point(std::size_t i) const;
  void set_point(std::size_t i, const Step2Point& p);

  std::span<const double> raw() const noexcept { return data_; }
  bool operator==(const Cloud&) const = default;

 private:
  std::size_t n_ = 0;
  std::size_t stride_ = 0;
  std::size_t samples_ = 0;
  std::vector<double> data_;
};

/// Euler scheme for the left-invariant diffusion driven by
/// `increments` (steps x n, row-major): horizontal coordinates add the
/// Brownian increments; area coordinates add (x_i dW_j - x_j dW_i) / 2 at the
/// left endpoint (Ito).
Step2Point integrate_increments(const Step2Point& start, std::span<const double> increments);

/// Brownian increments for one sample: steps x n Gaussians with variance
/// t/steps, drawn from a stream keyed by (seed, sample).
std::vector<double> brownian_increments(const SDEConfig& config, std::size_t sample);

/// `samples` independent endpoints at time t. Parallel over samples; bit
/// reproducible for a fixed configuration regardless of thread count.
Cloud sample_diffusion(const SDEConfig& config);

/// Applies group_mul(g, .) to every sample.
Cloud left_translate_cloud(const Cloud& cloud, const Step2Point& g);

/// Deterministic stratified thinning: the `target` samples at indices
/// offset + k * stride with stride = size / target. Returns the cloud
/// unchanged when it already has at most `target` points.
Cloud thin_cloud(const Cloud& cloud, std::size_t target, std::size_t offset = 0);

/// Matrix of koranyi_gauge between the points of a and b.
DenseMatrix gauge_matrix(const Cloud& a, const Cloud& b);

/// CSV `sample,x1..xn,z12..`.
void write_cloud_csv(std::ostream& out, const Cloud& cloud);

/// Structured text with keys t, steps, samples, seed, start (comma-separated
/// coordinates: n horizontal followed by n(n-1)/2 area values).
SDEConfig parse_sde_config(std::istream& in);
void write_sde_config(std::ostream& out, const SDEConfig& config);
Step2Point parse_step2_point(const std::string& text);

namespace serial {
Cloud sample_diffusion(const SDEConfig& config);
}  // namespace serial

}  // namespace wd
