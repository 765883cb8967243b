#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <string>

#include "wasser_dual/duality_lab.hpp"
#include "wasser_dual/error.hpp"
#include "wasser_dual/hopf_lax.hpp"

namespace wd {
namespace {

std::string format_exponent(double p) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%g", p);
  return buffer;
}

bool is_constant(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

FieldCorpus build_corpus(const FiniteMetricSpace& d, const CorpusOptions& options) {
  const std::size_t n = d.size();
  if (n < 2) throw PreconditionError("corpus needs at least two points");
  FieldCorpus corpus;
  std::mt19937_64 rng(options.seed);

  if (options.distance_cones) {
    const std::size_t centers =
        options.cone_centers == 0 ? n : std::min(options.cone_centers, n);
    for (std::size_t c = 0; c < centers; ++c) {
      const std::size_t x0 = c * n / centers;
      const auto row = d.row(x0);
      corpus.push_back({"cone_" + std::to_string(x0), std::vector<double>(row.begin(), row.end())});
    }
  }

  for (std::size_t k = 1; k <= options.fourier_modes; ++k) {
    std::vector<double> c(n), s(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>((k * i) % n) /
                           static_cast<double>(n);
      c[i] = std::cos(angle);
      s[i] = std::sin(angle);
    }
    corpus.push_back({"cos_" + std::to_string(k), std::move(c)});
    corpus.push_back({"sin_" + std::to_string(k), std::move(s)});
  }

  const double diameter = d.diameter();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t m = 0; m < options.mcshane_fields; ++m) {
    const std::size_t anchors = std::max<std::size_t>(2, n / 8);
    std::vector<std::size_t> points(n);
    for (std::size_t i = 0; i < n; ++i) points[i] = i;
    std::shuffle(points.begin(), points.end(), rng);
    points.resize(anchors);
    std::vector<double> data(anchors);
    for (double& v : data) v = diameter * unit(rng);
    std::vector<double> f(n);
    for (std::size_t x = 0; x < n; ++x) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < anchors; ++a) best = std::min(best, data[a] + d(x, points[a]));
      f[x] = best;
    }
    corpus.push_back({"mcshane_" + std::to_string(m), std::move(f)});
  }

  if (options.hopf_lax_smoothings > 0) {
    const PowerLagrangian quadratic(2.0);
    auto space = std::make_shared<const FiniteMetricSpace>(d);
    for (std::size_t k = 0; k < options.hopf_lax_smoothings; ++k) {
      std::vector<double> raw(n);
      for (double& v : raw) v = 2.0 * unit(rng) - 1.0;
      const double t = 0.02 * static_cast<double>(k + 1) * diameter * diameter;
      auto smooth = hopf_lax(ScalarField{space, std::move(raw)}, t, quadratic, d);
      corpus.push_back({"hopf_lax_" + std::to_string(k), std::move(smooth.values)});
    }
  }

  corpus.erase(std::remove_if(corpus.begin(), corpus.end(),
                              [](const NamedField& f) { return is_constant(f.values); }),
               corpus.end());
  return corpus;
}

void add_kantorovich_potentials(FieldCorpus& corpus, const MarkovKernel& kernel,
                                const FiniteMetricSpace& d, std::span<const PointPair> pairs,
                                std::span<const double> exponents) {
  for (double p : exponents) {
    if (!std::isfinite(p) || p > kLargestFiniteExponent) continue;
    for (const auto& [x, y] : pairs) {
      auto result = wasserstein_p(kernel.row(x), kernel.row(y), d.matrix(), p);
      auto& f = result.duals.f_star;
      if (is_constant(f) ||
          !std::all_of(f.begin(), f.end(), [](double v) { return std::isfinite(v); })) {
        continue;
      }
      corpus.push_back({"kantorovich_p" + format_exponent(p) + "_" + std::to_string(x) + "_" +
                            std::to_string(y),
                        std::move(f)});
    }
  }
}

}  // namespace wd
