#include "wasser_dual/heisenberg.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "wasser_dual/csv_io.hpp"
#include "wasser_dual/error.hpp"
#include "wasser_dual/parallel.hpp"

namespace wd {
namespace {

void check_same_group(const Step2Point& a, const Step2Point& b) {
  if (a.horizontal_dimension() != b.horizontal_dimension()) {
    throw PreconditionError("group elements have different horizontal dimensions (" +
                            std::to_string(a.horizontal_dimension()) + " vs " +
                            std::to_string(b.horizontal_dimension()) + ")");
  }
}

double gauge_of(const Step2Point& g) {
  double x2 = 0.0;
  double z2 = 0.0;
  for (double v : g.horizontal()) x2 += v * v;
  for (double v : g.area()) z2 += v * v;
  return std::pow(x2 * x2 + z2, 0.25);
}

}  // namespace

// ---------------------------------------------------------------------------
// Group structure

Step2Point::Step2Point(std::size_t n) : x_(n, 0.0), z_(area_dimension(n), 0.0) {}

Step2Point::Step2Point(std::vector<double> horizontal, std::vector<double> area)
    : x_(std::move(horizontal)), z_(std::move(area)) {
  if (z_.size() != area_dimension(x_.size())) {
    throw MalformedInput("a step-2 point with " + std::to_string(x_.size()) +
                         " horizontal coordinates needs " +
                         std::to_string(area_dimension(x_.size())) + " area coordinates");
  }
  for (double v : x_) {
    if (!std::isfinite(v)) throw MalformedInput("non-finite group coordinate");
  }
  for (double v : z_) {
    if (!std::isfinite(v)) throw MalformedInput("non-finite group coordinate");
  }
}

Step2Point Step2Point::heisenberg(double x, double y, double z) { return Step2Point({x, y}, {z}); }

std::size_t Step2Point::area_index(std::size_t n, std::size_t i, std::size_t j) {
  if (!(i < j && j < n)) throw PreconditionError("area index needs i < j < n");
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

Step2Point group_mul(const Step2Point& a, const Step2Point& b) {
  check_same_group(a, b);
  const std::size_t n = a.horizontal_dimension();
  Step2Point c(n);
  const auto ax = a.horizontal();
  const auto bx = b.horizontal();
  for (std::size_t i = 0; i < n; ++i) c.horizontal()[i] = ax[i] + bx[i];
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      c.area()[k] = a.area()[k] + b.area()[k] + 0.5 * (ax[i] * bx[j] - ax[j] * bx[i]);
    }
  }
  return c;
}

Step2Point group_inverse(const Step2Point& a) {
  Step2Point b = a;
  for (double& v : b.horizontal()) v = -v;
  for (double& v : b.area()) v = -v;
  return b;
}

Step2Point dilate(const Step2Point& a, double lambda) {
  Step2Point b = a;
  for (double& v : b.horizontal()) v *= lambda;
  for (double& v : b.area()) v *= lambda * lambda;
  return b;
}

double koranyi_gauge(const Step2Point& a, const Step2Point& b) {
  return gauge_of(group_mul(group_inverse(a), b));
}

// ---------------------------------------------------------------------------
// Carnot-Caratheodory bracket (n = 2)

namespace {

struct Polygon {
  double length = 0.0;
  std::vector<double> headings;
  double side = 0.0;
};

// Region between an inscribed arc polygon (central angle theta, `res` equal
// sides) and its chord c.
double arc_area(double c, double theta, std::size_t res) {
  if (theta <= 0.0) return 0.0;
  const double r = c / (2.0 * std::sin(0.5 * theta));
  const double k = static_cast<double>(res);
  return 0.5 * r * r * (k * std::sin(theta / k) - std::sin(theta));
}

Polygon arc_polygon(double dx, double dy, double area, std::size_t res) {
  const double c = std::hypot(dx, dy);
  const double target = std::abs(area);
  const double orientation = area >= 0.0 ? 1.0 : -1.0;
  const double k = static_cast<double>(res);
  Polygon poly;
  poly.headings.resize(res);
  if (c == 0.0) {
    // Closed regular polygon with the prescribed area.
    poly.length = std::sqrt(4.0 * k * std::tan(std::numbers::pi / k) * target);
    poly.side = poly.length / k;
    for (std::size_t s = 0; s < res; ++s) {
      poly.headings[s] = orientation * 2.0 * std::numbers::pi * static_cast<double>(s) / k;
    }
    return poly;
  }
  double theta = 0.0;
  if (target > 0.0) {
    double lo = 0.0;
    double hi = 2.0 * std::numbers::pi;
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
      const double mid = 0.5 * (lo + hi);
      (arc_area(c, mid, res) < target ? lo : hi) = mid;
    }
    theta = 0.5 * (lo + hi);
    for (int it = 0; it < 5; ++it) {
      const double h = 1e-7 * std::max(theta, 1e-3);
      const double f = arc_area(c, theta, res) - target;
      const double slope = (arc_area(c, theta + h, res) - arc_area(c, theta - h, res)) / (2.0 * h);
      if (!(slope > 0.0)) break;
      const double next = theta - f / slope;
      if (!(next > 0.0 && next < 2.0 * std::numbers::pi)) break;
      if (std::abs(arc_area(c, next, res) - target) >= std::abs(f)) break;
      theta = next;
    }
  }
  const double phi = std::atan2(dy, dx);
  if (theta == 0.0) {
    poly.length = c;
  } else {
    const double r = c / (2.0 * std::sin(0.5 * theta));
    poly.length = k * 2.0 * r * std::sin(theta / (2.0 * k));
  }
  poly.side = poly.length / k;
  for (std::size_t s = 0; s < res; ++s) {
    const double turn = -0.5 * theta + theta / (2.0 * k) + static_cast<double>(s) * theta / k;
    poly.headings[s] = phi + orientation * turn;
  }
  return poly;
}

Step2Point polygon_endpoint(const Polygon& poly) {
  Step2Point at(2);
  for (double h : poly.headings) {
    at = group_mul(at, Step2Point::heisenberg(poly.side * std::cos(h), poly.side * std::sin(h), 0.0));
  }
  return at;
}

void check_resolution(std::size_t resolution) {
  if (resolution < 3) throw PreconditionError("CC estimate needs at least 3 segments");
}

double pair_ratio(const Step2Point& target, std::size_t resolution, Polygon* out = nullptr) {
  auto poly = arc_polygon(target.horizontal()[0], target.horizontal()[1], target.area()[0],
                          resolution);
  const double g = gauge_of(target);
  if (out) *out = poly;
  return poly.length > 0.0 ? g / poly.length : 0.0;
}

}  // namespace

double cc_calibration_ratio(std::size_t resolution) {
  check_resolution(resolution);
  // Unit-gauge targets |x|^2 = cos a, z = sin a, a in [0, pi/2].
  constexpr int kDirections = 64;
  double worst = 0.0;
  for (int s = 0; s <= kDirections; ++s) {
    const double a = 0.5 * std::numbers::pi * s / kDirections;
    const double radius = std::sqrt(std::max(0.0, std::cos(a)));
    worst = std::max(worst, pair_ratio(Step2Point::heisenberg(radius, 0.0, std::sin(a)), resolution));
  }
  return worst;
}

CCEstimate cc_distance_estimate(const Step2Point& a, const Step2Point& b, std::size_t resolution) {
  check_same_group(a, b);
  if (a.horizontal_dimension() != 2) {
    throw PreconditionError("CC estimation is only available for the Heisenberg group (n = 2)");
  }
  check_resolution(resolution);
  CCEstimate est;
  est.segments = resolution;
  const auto target = group_mul(group_inverse(a), b);
  const double g = gauge_of(target);
  if (g == 0.0) return est;

  Polygon poly;
  const double ratio = pair_ratio(target, resolution, &poly);
  est.upper = poly.length;
  est.endpoint_residual = gauge_of(group_mul(group_inverse(polygon_endpoint(poly)), target));
  est.converged = est.endpoint_residual <= 1e-7 * std::max(1.0, g);
  const double c_upper = std::max(cc_calibration_ratio(resolution), ratio);
  est.lower = g / c_upper;
  return est;
}

// ---------------------------------------------------------------------------
// Diffusion sampling

void SDEConfig::validate() const {
  if (!(t > 0.0) || !std::isfinite(t)) throw PreconditionError("SDE horizon t must be positive");
  if (steps < 1) throw PreconditionError("SDE needs at least one step");
  if (samples < 1) throw PreconditionError("SDE needs at least one sample");
  if (start.horizontal_dimension() < 2) {
    throw PreconditionError("SDE start must have at least 2 horizontal coordinates");
  }
}

Cloud::Cloud(std::size_t horizontal_dim, std::size_t samples)
    : n_(horizontal_dim),
      stride_(horizontal_dim + Step2Point::area_dimension(horizontal_dim)),
      samples_(samples),
      data_(stride_ * samples, 0.0) {}

Step2Point Cloud::point(std::size_t i) const {
  const auto c = coordinates(i);
  return Step2Point(std::vector<double>(c.begin(), c.begin() + static_cast<long>(n_)),
                    std::vector<double>(c.begin() + static_cast<long>(n_), c.end()));
}

void Cloud::set_point(std::size_t i, const Step2Point& p) {
  if (p.horizontal_dimension() != n_) throw PreconditionError("cloud point dimension mismatch");
  auto c = coordinates(i);
  std::copy(p.horizontal().begin(), p.horizontal().end(), c.begin());
  std::copy(p.area().begin(), p.area().end(), c.begin() + static_cast<long>(n_));
}

Step2Point integrate_increments(const Step2Point& start, std::span<const double> increments) {
  const std::size_t n = start.horizontal_dimension();
  if (n == 0 || increments.size() % n != 0) {
    throw PreconditionError("increment count is not a multiple of the horizontal dimension");
  }
  Step2Point at = start;
  auto x = at.horizontal();
  auto z = at.area();
  for (std::size_t step = 0; step < increments.size() / n; ++step) {
    const auto dw = increments.subspan(step * n, n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j, ++k) z[k] += 0.5 * (x[i] * dw[j] - x[j] * dw[i]);
    }
    for (std::size_t i = 0; i < n; ++i) x[i] += dw[i];
  }
  return at;
}

std::vector<double> brownian_increments(const SDEConfig& config, std::size_t sample) {
  config.validate();
  const std::size_t n = config.start.horizontal_dimension();
  const auto seed = config.seed;
  const auto index = static_cast<std::uint64_t>(sample);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 engine(seq);
  std::normal_distribution<double> normal(0.0, std::sqrt(config.t / static_cast<double>(config.steps)));
  std::vector<double> dw(config.steps * n);
  for (double& v : dw) v = normal(engine);
  return dw;
}

Cloud sample_diffusion(const SDEConfig& config) {
  config.validate();
  Cloud cloud(config.start.horizontal_dimension(), config.samples);
  const auto samples = static_cast<long>(config.samples);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long s = 0; s < samples; ++s) {
    const auto i = static_cast<std::size_t>(s);
    cloud.set_point(i, integrate_increments(config.start, brownian_increments(config, i)));
  }
  return cloud;
}

namespace serial {

Cloud sample_diffusion(const SDEConfig& config) {
  config.validate();
  Cloud cloud(config.start.horizontal_dimension(), config.samples);
  for (std::size_t i = 0; i < config.samples; ++i) {
    cloud.set_point(i, integrate_increments(config.start, brownian_increments(config, i)));
  }
  return cloud;
}

}  // namespace serial

Cloud left_translate_cloud(const Cloud& cloud, const Step2Point& g) {
  if (g.horizontal_dimension() != cloud.horizontal_dimension()) {
    throw PreconditionError("translation element dimension mismatch");
  }
  Cloud out(cloud.horizontal_dimension(), cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) out.set_point(i, group_mul(g, cloud.point(i)));
  return out;
}

Cloud thin_cloud(const Cloud& cloud, std::size_t target, std::size_t offset) {
  if (target == 0) throw PreconditionError("thinning target must be positive");
  if (cloud.size() <= target) return cloud;
  const std::size_t stride = cloud.size() / target;
  offset %= stride;
  Cloud out(cloud.horizontal_dimension(), target);
  for (std::size_t k = 0; k < target; ++k) {
    const auto src = cloud.coordinates(offset + k * stride);
    std::copy(src.begin(), src.end(), out.coordinates(k).begin());
  }
  return out;
}

DenseMatrix gauge_matrix(const Cloud& a, const Cloud& b) {
  if (a.horizontal_dimension() != b.horizontal_dimension()) {
    throw PreconditionError("clouds live on different groups");
  }
  DenseMatrix m(a.size(), b.size());
  std::vector<Step2Point> bp(b.size());
  for (std::size_t j = 0; j < b.size(); ++j) bp[j] = b.point(j);
  const auto rows = static_cast<long>(a.size());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long si = 0; si < rows; ++si) {
    const auto i = static_cast<std::size_t>(si);
    const auto inverse = group_inverse(a.point(i));
    for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = gauge_of(group_mul(inverse, bp[j]));
  }
  return m;
}

// ---------------------------------------------------------------------------
// I/O

void write_cloud_csv(std::ostream& out, const Cloud& cloud) {
  const std::size_t n = cloud.horizontal_dimension();
  out << "sample";
  for (std::size_t i = 0; i < n; ++i) out << ",x" << i + 1;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) out << ",z" << i + 1 << j + 1;
  }
  out << '\n';
  for (std::size_t s = 0; s < cloud.size(); ++s) {
    out << s;
    for (double v : cloud.coordinates(s)) out << ',' << format_double(v);
    out << '\n';
  }
}

Step2Point parse_step2_point(const std::string& text) {
  std::vector<double> coords;
  for (const auto& cell : split_csv_line(text)) coords.push_back(parse_double(cell, "start"));
  // n + n(n-1)/2 = n(n+1)/2 coordinates in total.
  std::size_t n = 1;
  while (n * (n + 1) / 2 < coords.size()) ++n;
  if (n < 2 || n * (n + 1) / 2 != coords.size()) {
    throw MalformedInput("start needs n + n(n-1)/2 coordinates for some n >= 2, got " +
                         std::to_string(coords.size()));
  }
  return Step2Point(std::vector<double>(coords.begin(), coords.begin() + static_cast<long>(n)),
                    std::vector<double>(coords.begin() + static_cast<long>(n), coords.end()));
}

SDEConfig parse_sde_config(std::istream& in) {
  std::map<std::string, std::string> values;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw MalformedInput("SDE config line " + std::to_string(line_number) + ": expected key = value");
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const auto key = trim(line.substr(0, eq));
    if (key != "t" && key != "steps" && key != "samples" && key != "seed" && key != "start") {
      throw MalformedInput("SDE config: unknown key '" + key + "'");
    }
    values[key] = trim(line.substr(eq + 1));
  }
  for (const char* key : {"t", "steps", "samples", "seed", "start"}) {
    if (!values.count(key)) throw MalformedInput(std::string("SDE config: missing key '") + key + "'");
  }
  SDEConfig config;
  config.t = parse_double(values["t"], "t");
  config.steps = static_cast<std::size_t>(parse_u64(values["steps"], "steps"));
  config.samples = static_cast<std::size_t>(parse_u64(values["samples"], "samples"));
  config.seed = parse_u64(values["seed"], "seed");
  config.start = parse_step2_point(values["start"]);
  config.validate();
  return config;
}

void write_sde_config(std::ostream& out, const SDEConfig& config) {
  out << "t = " << format_double(config.t) << '\n'
      << "steps = " << config.steps << '\n'
      << "samples = " << config.samples << '\n'
      << "seed = " << config.seed << '\n'
      << "start = ";
  bool first = true;
  for (double v : config.start.horizontal()) {
    out << (first ? "" : ", ") << format_double(v);
    first = false;
  }
  for (double v : config.start.area()) out << ", " << format_double(v);
  out << '\n';
}

}  // namespace wd
