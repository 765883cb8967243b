#include "wasser_dual/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "wasser_dual/csv_io.hpp"
#include "wasser_dual/error.hpp"
#include "wasser_dual/heisenberg.hpp"
#include "wasser_dual/hopf_lax.hpp"
#include "wasser_dual/kernels.hpp"
#include "wasser_dual/parallel.hpp"
#include "wasser_dual/slope.hpp"
#include "wasser_dual/transport.hpp"

namespace wd {

// ---------------------------------------------------------------------------
// Config

std::string ExperimentConfig::get(const std::string& key, const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

std::string ExperimentConfig::require(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) throw MalformedInput("missing config key '" + key + "'");
  return it->second;
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? parse_double(values.at(key), key) : fallback;
}

std::size_t ExperimentConfig::get_size(const std::string& key, std::size_t fallback) const {
  return has(key) ? static_cast<std::size_t>(parse_u64(values.at(key), key)) : fallback;
}

std::vector<double> ExperimentConfig::p_list(const std::string& key) const {
  std::vector<double> out;
  const auto raw = get(key, "");
  for (const auto& cell : split_csv_line(raw)) {
    if (cell.empty()) continue;
    const double p = parse_double(cell, key);
    if (std::isnan(p) || p < 1.0) {
      throw MalformedInput("field '" + key + "': exponent " + cell + " is below 1");
    }
    out.push_back(p);
  }
  if (out.empty()) throw MalformedInput("p_list empty");
  return out;
}

std::filesystem::path ExperimentConfig::path(const std::string& key) const {
  std::filesystem::path p = require(key);
  if (p.is_relative()) p = base_dir / p;
  if (!std::filesystem::exists(p)) {
    throw MalformedInput("field '" + key + "': file '" + p.string() + "' does not exist");
  }
  return p;
}

namespace {

void apply_overrides(ExperimentConfig& cfg, std::span<const std::string> overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw MalformedInput("override '" + o + "' is not of the form key=value");
    }
    auto key = o.substr(0, eq);
    if (key.find('.') == std::string::npos) key = "run." + key;
    cfg.values[key] = o.substr(eq + 1);
  }
}

void check_command(const std::string& command) {
  const auto& known = known_commands();
  if (std::find(known.begin(), known.end(), command) == known.end()) {
    throw MalformedInput("unknown command '" + command + "'");
  }
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& command,
                              std::span<const std::string> overrides) {
  check_command(command);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw MalformedInput("config: " + e.message() + " at line " + std::to_string(e.line()));
  }
  ExperimentConfig cfg;
  cfg.command = command;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      cfg.values["run." + section] = body.data();
      continue;
    }
    for (const auto& [key, value] : body) cfg.values[section + "." + key] = value.data();
  }
  apply_overrides(cfg, overrides);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::string& command,
                             std::span<const std::string> overrides) {
  check_command(command);
  std::ifstream in(path);
  if (!in) throw MalformedInput("cannot open config '" + path.string() + "'");
  auto cfg = parse_config(in, command, overrides);
  cfg.base_dir = path.parent_path();
  return cfg;
}

// ---------------------------------------------------------------------------
// Plot data

std::string emit_plot_data(std::span<const DualityReport> reports) {
  std::vector<const DualityReport*> sorted;
  for (const auto& r : reports) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const DualityReport* a, const DualityReport* b) { return a->p < b->p; });
  std::ostringstream out;
  out << "p,K_C,K_G,ci_halfwidth,mesh\n";
  for (const auto* r : sorted) {
    out << format_double(r->p) << ',' << format_double(r->K_C) << ',' << format_double(r->K_G)
        << ',' << format_double(r->mc_ci.value_or(0.0)) << ',' << format_double(r->mesh) << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Commands

namespace {

struct Tolerances {
  double marginal = 1e-10;
  double duality_gap = 1e-8;
  double monotone = 1e-10;
  double constant_gap = 0.05;
  double implication = 1e-6;
  double support = 1e-10;
  double gluing = 1e-8;
};

Tolerances resolve_tolerances(const ExperimentConfig& cfg) {
  Tolerances t;
  t.marginal = cfg.get_double("tolerance.marginal", t.marginal);
  t.duality_gap = cfg.get_double("tolerance.duality_gap", t.duality_gap);
  t.monotone = cfg.get_double("tolerance.monotone", t.monotone);
  t.constant_gap = cfg.get_double("tolerance.constant_gap", t.constant_gap);
  t.implication = cfg.get_double("tolerance.implication", t.implication);
  t.support = cfg.get_double("tolerance.support", t.support);
  t.gluing = cfg.get_double("tolerance.gluing", t.gluing);
  return t;
}

std::string exponent_label(double p) {
  if (std::isinf(p)) return "inf";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%g", p);
  return buffer;
}

class Outputs {
 public:
  explicit Outputs(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  void summary(const std::string& quantity, double value) {
    summary_ << quantity << ',' << format_double(value) << '\n';
  }
  void table(const std::string& name, const std::string& body) { tables_.emplace_back(name, body); }
  void fail(const std::string& table) {
    if (std::find(failed_.begin(), failed_.end(), table) == failed_.end()) failed_.push_back(table);
  }
  const std::vector<std::string>& failed() const { return failed_; }

  void flush(const std::string& manifest) {
    for (const auto& [name, body] : tables_) write_file_atomic(dir_ / name, body);
    write_file_atomic(dir_ / "summary.csv", "quantity,value\n" + summary_.str());
    write_file_atomic(dir_ / "manifest", manifest);
  }

 private:
  std::filesystem::path dir_;
  std::ostringstream summary_;
  std::vector<std::pair<std::string, std::string>> tables_;
  std::vector<std::string> failed_;
};

SpacePtr build_space(const ExperimentConfig& cfg) {
  const auto type = cfg.get("space.type", "torus");
  if (type == "torus") return torus_space(cfg.get_size("space.n", 64));
  if (type == "interval") return unit_interval_space(cfg.get_size("space.n", 100));
  if (type == "edge_list") {
    std::ifstream in(cfg.path("space.edges"));
    return std::make_shared<const FiniteMetricSpace>(shortest_path_space(read_edge_list(in)));
  }
  throw MalformedInput("field 'space.type': unknown space '" + type + "'");
}

MarkovKernel build_kernel(const ExperimentConfig& cfg, const SpacePtr& space) {
  const auto type = cfg.get("kernel.type", "heat");
  if (type == "heat") {
    const auto method = cfg.get("kernel.method", "wrapped_gaussian");
    HeatKernelMethod m;
    if (method == "wrapped_gaussian") {
      m = HeatKernelMethod::wrapped_gaussian;
    } else if (method == "laplacian_exponential") {
      m = HeatKernelMethod::laplacian_exponential;
    } else {
      throw MalformedInput("field 'kernel.method': unknown method '" + method + "'");
    }
    return torus_heat_kernel(space, cfg.get_double("kernel.t", 0.02), m);
  }
  if (type == "random_walk") {
    return random_walk_kernel(space, cfg.get_size("kernel.steps", 3),
                              cfg.get_double("kernel.laziness", 0.5));
  }
  if (type == "identity") return identity_kernel(space);
  if (type == "collapse") return collapse_kernel(space, cfg.get_size("kernel.target", 0));
  throw MalformedInput("field 'kernel.type': unknown kernel '" + type + "'");
}

std::vector<PointPair> build_pairs(const ExperimentConfig& cfg, const FiniteMetricSpace& d) {
  const auto kind = cfg.get("run.pairs", cfg.get("space.type", "torus") == "torus" ? "anchored" : "all");
  if (kind == "anchored") return anchored_pairs(d.size(), cfg.get_size("run.anchor", 0));
  if (kind == "all") return all_pairs(d.size());
  throw MalformedInput("field 'run.pairs': expected 'anchored' or 'all', got '" + kind + "'");
}

SlopeScale build_scale(const ExperimentConfig& cfg, const FiniteMetricSpace& d) {
  const auto raw = cfg.get("run.slope_scale", "mesh");
  if (raw == "shell") return std::nullopt;
  if (raw == "mesh") {
    double mesh = 0.0;
    for (std::size_t x = 0; x < d.size(); ++x) mesh = std::max(mesh, d.nearest_distance(x));
    return mesh;
  }
  const double r = parse_double(raw, "run.slope_scale");
  if (!(r > 0.0)) throw MalformedInput("field 'run.slope_scale' must be positive");
  return r;
}

FieldCorpus build_corpus_from(const ExperimentConfig& cfg, const MarkovKernel& kernel,
                              const FiniteMetricSpace& d, std::span<const PointPair> pairs,
                              std::span<const double> exponents) {
  CorpusOptions options;
  const bool torus = cfg.get("space.type", "torus") == "torus";
  options.cone_centers = cfg.get_size("corpus.cone_centers", 0);
  options.distance_cones = cfg.get("corpus.cones", "true") == "true";
  options.fourier_modes = cfg.get_size("corpus.fourier_modes", torus ? 8 : 0);
  options.mcshane_fields = cfg.get_size("corpus.mcshane", options.mcshane_fields);
  options.hopf_lax_smoothings = cfg.get_size("corpus.hopf_lax", options.hopf_lax_smoothings);
  options.seed = parse_u64(cfg.get("corpus.seed", cfg.get("run.seed", "1")), "corpus.seed");
  auto corpus = build_corpus(d, options);
  const auto potentials = cfg.get_size("corpus.kantorovich_pairs", 4);
  if (potentials > 0) {
    std::vector<PointPair> chosen(pairs.begin(),
                                  pairs.begin() + static_cast<long>(std::min(potentials, pairs.size())));
    add_kantorovich_potentials(corpus, kernel, d, chosen, exponents);
  }
  return corpus;
}

std::string manifest_text(const ExperimentConfig& cfg, const Tolerances& tol,
                          const std::vector<std::string>& failed) {
  std::ostringstream out;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[64];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  out << "tool = wasser-dual\nversion = 1.0.0\n";
  out << "command = " << cfg.command << '\n';
  out << "timestamp = " << stamp << '\n';
  out << "threads = " << thread_count() << "\n\n[config]\n";
  for (const auto& [key, value] : cfg.values) out << key << " = " << value << '\n';
  out << "\n[tolerances]\n"
      << "marginal = " << format_double(tol.marginal) << '\n'
      << "duality_gap = " << format_double(tol.duality_gap) << '\n'
      << "monotone = " << format_double(tol.monotone) << '\n'
      << "constant_gap = " << format_double(tol.constant_gap) << '\n'
      << "implication = " << format_double(tol.implication) << '\n'
      << "support = " << format_double(tol.support) << '\n'
      << "gluing = " << format_double(tol.gluing) << '\n';
  out << "\n[result]\nstatus = " << (failed.empty() ? "pass" : "fail") << '\n';
  for (const auto& t : failed) out << "failed_table = " << t << '\n';
  return out.str();
}

std::vector<double> read_measure(const ExperimentConfig& cfg, const std::string& key,
                                 std::size_t n) {
  if (cfg.has("measures." + key + "_file")) {
    return read_index_value_csv_file(cfg.path("measures." + key + "_file"), n, key);
  }
  std::vector<double> w;
  for (const auto& cell : split_csv_line(cfg.require("measures." + key))) {
    w.push_back(parse_double(cell, "measures." + key));
  }
  if (w.size() != n) {
    throw MalformedInput("field 'measures." + key + "': " + std::to_string(w.size()) +
                         " weights for " + std::to_string(n) + " points");
  }
  return w;
}

void run_wasserstein(const ExperimentConfig& cfg, const Tolerances& tol, Outputs& out) {
  const auto space = build_space(cfg);
  const auto p_list = cfg.p_list();
  const auto mu = DiscreteMeasure::from_weights(space, read_measure(cfg, "mu", space->size()));
  const auto nu = DiscreteMeasure::from_weights(space, read_measure(cfg, "nu", space->size()));

  std::ostringstream values;
  values << "p,W,marginal_error,kantorovich_gap\n";
  double previous = -1.0;
  for (double p : p_list) {
    const auto label = exponent_label(p);
    double w = 0.0;
    double gap = 0.0;
    Coupling plan;
    if (std::isinf(p) || p > kLargestFiniteExponent) {
      auto r = wasserstein_inf(mu, nu);
      w = r.value;
      plan = std::move(r.plan);
    } else {
      auto r = wasserstein_p(mu, nu, *space, p);
      w = r.value;
      const double dual = mu.integrate(r.duals.f_star) - nu.integrate(r.duals.f);
      gap = std::pow(w, p) - dual;
      std::ostringstream duals;
      duals << "index,f,f_star\n";
      for (std::size_t i = 0; i < r.duals.f.size(); ++i) {
        duals << i << ',' << format_double(r.duals.f[i]) << ',' << format_double(r.duals.f_star[i])
              << '\n';
      }
      out.table("duals_p" + label + ".csv", duals.str());
      plan = std::move(r.plan);
    }
    const double marginal = plan.marginal_error(mu.weights, nu.weights);
    std::ostringstream triples;
    write_sparse_triples_csv(triples, plan.mass);
    out.table("plan_p" + label + ".csv", triples.str());
    values << format_double(p) << ',' << format_double(w) << ',' << format_double(marginal) << ','
           << format_double(gap) << '\n';
    out.summary("W_" + label, w);
    if (marginal > tol.marginal) out.fail("wasserstein.csv");
    if (std::abs(gap) > tol.duality_gap) out.fail("wasserstein.csv");
    if (w < previous - tol.monotone) out.fail("wasserstein.csv");
    previous = w;
  }
  out.table("wasserstein.csv", values.str());
}

std::vector<double> build_field(const ExperimentConfig& cfg, const FiniteMetricSpace& d) {
  const auto type = cfg.get("field.type", "linear");
  const std::size_t n = d.size();
  std::vector<double> f(n);
  if (type == "file") return read_index_value_csv_file(cfg.path("field.file"), n, "field.file");
  if (type == "linear") {
    for (std::size_t i = 0; i < n; ++i) f[i] = d(0, i);
  } else if (type == "cosine") {
    const double k = cfg.get_double("field.frequency", 1.0);
    for (std::size_t i = 0; i < n; ++i) f[i] = std::cos(2.0 * 3.141592653589793 * k * d(0, i));
  } else {
    throw MalformedInput("field 'field.type': unknown field '" + type + "'");
  }
  return f;
}

void run_hopf_lax(const ExperimentConfig& cfg, const Tolerances& tol, Outputs& out) {
  const auto space = build_space(cfg);
  const auto& d = *space;
  const PowerLagrangian lagrangian(cfg.get_double("run.p", 2.0));
  const ScalarField f = ScalarField::from_values(space, build_field(cfg, d));
  std::vector<double> times;
  for (const auto& cell : split_csv_line(cfg.get("run.times", "0.05,0.1,0.2"))) {
    const double t = parse_double(cell, "run.times");
    if (!(t >= 0.0)) throw MalformedInput("field 'run.times': times must be >= 0");
    times.push_back(t);
  }
  std::sort(times.begin(), times.end());
  const double sigma = cfg.get_double("run.sigma", 1e-3);

  std::vector<std::vector<double>> q;
  for (double t : times) q.push_back(hopf_lax(f, t, lagrangian, d).values);
  std::ostringstream table;
  table << "index,f";
  for (double t : times) table << ",Q_" << format_double(t);
  table << '\n';
  const double inf_f = *std::min_element(f.values.begin(), f.values.end());
  bool sandwich = true;
  bool monotone = true;
  for (std::size_t x = 0; x < d.size(); ++x) {
    table << x << ',' << format_double(f.values[x]);
    for (std::size_t k = 0; k < times.size(); ++k) {
      table << ',' << format_double(q[k][x]);
      if (q[k][x] > f.values[x] || q[k][x] < inf_f) sandwich = false;
      if (k > 0 && q[k][x] > q[k - 1][x]) monotone = false;
    }
    table << '\n';
  }
  out.table("hopf_lax.csv", table.str());
  if (!sandwich || !monotone) out.fail("hopf_lax.csv");

  std::ostringstream residuals;
  residuals << "t,index,residual\n";
  for (double t : times) {
    if (t <= 0.0) continue;
    const auto r = hj_residual(f, t, sigma, lagrangian, d);
    double worst = 0.0;
    for (std::size_t x = 0; x < r.size(); ++x) {
      residuals << format_double(t) << ',' << x << ',' << format_double(r[x]) << '\n';
      worst = std::max(worst, std::abs(r[x]));
    }
    out.summary("max_hj_residual_t" + exponent_label(t), worst);
  }
  out.table("hj_residual.csv", residuals.str());

  std::ostringstream checks;
  checks << "quantity,value,bound\n";
  if (times.size() >= 2 && times[0] > 0.0) {
    const double defect = semigroup_defect(f, times[0], times[1], lagrangian, d);
    checks << "semigroup_defect," << format_double(defect) << ",\n";
    out.summary("semigroup_defect", defect);
  }
  const auto lip = hopf_lax_lipschitz_bound(f, lagrangian, d, times);
  checks << "space_time_lipschitz," << format_double(lip.measured) << ','
         << format_double(lip.bound + lip.tolerance) << '\n';
  out.table("checks.csv", checks.str());
  out.summary("space_time_lipschitz", lip.measured);
  out.summary("space_time_lipschitz_bound", lip.bound);
  if (!lip.holds()) out.fail("checks.csv");
  (void)tol;
}

void run_check_duality(const ExperimentConfig& cfg, const Tolerances& tol, Outputs& out) {
  const auto space = build_space(cfg);
  const auto& d = *space;
  const auto kernel = build_kernel(cfg, space);
  const auto p_list = cfg.p_list();
  const auto pairs = build_pairs(cfg, d);
  const auto scale = build_scale(cfg, d);
  const auto corpus = build_corpus_from(cfg, kernel, d, pairs, p_list);

  ReportOptions options;
  options.chain_pairs = cfg.get_size("run.chain_pairs", options.chain_pairs);
  options.chain_grid = cfg.get_size("run.chain_grid", options.chain_grid);

  std::vector<DualityReport> reports;
  std::ostringstream pair_table, fn_table, chain_table;
  pair_table << "p,x,y,distance,W,ratio,margin\n";
  fn_table << "p,field,name,point,lhs,rhs,ratio,margin\n";
  chain_table << "p,x,y,direct,reconstructed,error,kantorovich_slack,max_time_derivative\n";
  for (double p : p_list) {
    auto report = duality_gap_report(kernel, d, p, pairs, corpus, scale, options);
    const auto label = format_double(p);
    for (std::size_t k = 0; k < report.pairs.size(); ++k) {
      const auto& m = report.pairs[k];
      pair_table << label << ',' << m.pair.first << ',' << m.pair.second << ','
                 << format_double(m.distance) << ',' << format_double(m.wasserstein) << ','
                 << format_double(m.ratio) << ',' << format_double(report.pair_margins[k]) << '\n';
    }
    for (std::size_t k = 0; k < report.functions.size(); ++k) {
      const auto& e = report.functions[k];
      fn_table << label << ',' << e.field << ',' << corpus[e.field].name << ',' << e.point << ','
               << format_double(e.lhs) << ',' << format_double(e.rhs) << ','
               << format_double(e.ratio) << ',' << format_double(report.fn_margins[k]) << '\n';
    }
    for (const auto& c : report.chain) {
      chain_table << label << ',' << c.pair.first << ',' << c.pair.second << ','
                  << format_double(c.direct) << ',' << format_double(c.reconstructed) << ','
                  << format_double(c.error) << ',' << format_double(c.kantorovich_slack) << ','
                  << format_double(c.max_time_derivative) << '\n';
      if (c.kantorovich_slack < -tol.duality_gap) out.fail("chain.csv");
    }
    const auto ex = exponent_label(p);
    out.summary("K_C_" + ex, report.K_C);
    out.summary("K_G_" + ex, report.K_G);
    out.summary("gap_" + ex, report.gap());
    if (report.gap() > tol.constant_gap) out.fail("summary.csv");
    reports.push_back(std::move(report));
  }
  out.summary("corpus_size", static_cast<double>(corpus.size()));
  out.summary("mesh", reports.front().mesh);
  out.table("pairs.csv", pair_table.str());
  out.table("functions.csv", fn_table.str());
  out.table("chain.csv", chain_table.str());
  out.table("plot_data.csv", emit_plot_data(reports));
}

void run_simulate_heisenberg(const ExperimentConfig& cfg, const Tolerances& tol, Outputs& out) {
  SDEConfig sde;
  sde.t = cfg.get_double("sde.t", 1.0);
  sde.steps = cfg.get_size("sde.steps", 200);
  sde.samples = cfg.get_size("sde.samples", 10000);
  if (!cfg.has("sde.seed") && !cfg.has("run.seed")) {
    throw MalformedInput("field 'run.seed': a seed is required for sampling");
  }
  sde.seed = parse_u64(cfg.get("sde.seed", cfg.get("run.seed", "")), "sde.seed");
  sde.start = parse_step2_point(cfg.get("sde.start", "0,0,0"));
  sde.validate();

  const auto cloud = sample_diffusion(sde);
  const std::size_t n = cloud.horizontal_dimension();
  const std::size_t dim = cloud.dimension();
  std::vector<double> mean(dim, 0.0), var(dim, 0.0);
  for (std::size_t s = 0; s < cloud.size(); ++s) {
    const auto c = cloud.coordinates(s);
    for (std::size_t k = 0; k < dim; ++k) mean[k] += c[k];
  }
  const auto count = static_cast<double>(cloud.size());
  for (double& m : mean) m /= count;
  for (std::size_t s = 0; s < cloud.size(); ++s) {
    const auto c = cloud.coordinates(s);
    for (std::size_t k = 0; k < dim; ++k) var[k] += (c[k] - mean[k]) * (c[k] - mean[k]);
  }
  for (double& v : var) v /= std::max(1.0, count - 1.0);

  std::ostringstream stats;
  stats << "coordinate,start,mean,variance,mean_bound\n";
  std::vector<double> start(sde.start.horizontal().begin(), sde.start.horizontal().end());
  start.insert(start.end(), sde.start.area().begin(), sde.start.area().end());
  for (std::size_t k = 0; k < dim; ++k) {
    const std::string name = k < n ? "x" + std::to_string(k + 1) : "z" + std::to_string(k - n + 1);
    const double bound = 4.0 * std::sqrt(var[k] / count);
    stats << name << ',' << format_double(start[k]) << ',' << format_double(mean[k]) << ','
          << format_double(var[k]) << ',' << format_double(bound) << '\n';
    out.summary("mean_" + name, mean[k]);
    out.summary("var_" + name, var[k]);
    if (std::abs(mean[k] - start[k]) > bound) out.fail("moments.csv");
    if (k < n && std::abs(var[k] - sde.t) > 4.0 * sde.t * std::sqrt(2.0 / std::max(1.0, count - 1.0))) {
      out.fail("moments.csv");
    }
  }
  out.table("moments.csv", stats.str());
  if (cfg.get("run.write_cloud", "false") == "true") {
    std::ostringstream body;
    write_cloud_csv(body, cloud);
    out.table("cloud.csv", body.str());
  }
  std::ostringstream config_echo;
  write_sde_config(config_echo, sde);
  out.table("sde_config.txt", config_echo.str());

  if (cfg.has("estimate.pairs")) {
    // Pairs given as "x1 y1 z1 ; x2 y2 z2 ..." with a shared base point from sde.start.
    std::vector<std::pair<Step2Point, Step2Point>> pairs;
    std::stringstream raw(cfg.require("estimate.pairs"));
    std::string item;
    while (std::getline(raw, item, ';')) {
      if (item.find_first_not_of(" \t") == std::string::npos) continue;
      pairs.emplace_back(sde.start, parse_step2_point(item));
    }
    HeisenbergRunOptions options;
    options.t = sde.t;
    options.steps = sde.steps;
    options.samples = sde.samples;
    options.seed = sde.seed;
    options.thinned = cfg.get_size("estimate.thinned", options.thinned);
    options.bootstrap = cfg.get_size("estimate.bootstrap", options.bootstrap);
    std::ostringstream table;
    table << "p,pair,gauge,W,ratio,ci_lower,ci_upper,thinning_spread\n";
    std::vector<DualityReport> reports;
    for (double p : cfg.p_list()) {
      const auto k = estimate_heisenberg_constant(pairs, p, options);
      for (std::size_t i = 0; i < k.pairs.size(); ++i) {
        const auto& e = k.pairs[i];
        table << format_double(p) << ',' << i << ',' << format_double(e.gauge) << ','
              << format_double(e.wasserstein) << ',' << format_double(e.ratio.estimate) << ','
              << format_double(e.ratio.lower) << ',' << format_double(e.ratio.upper) << ','
              << format_double(e.thinning_spread) << '\n';
      }
      const auto ex = exponent_label(p);
      out.summary("K_hat_" + ex, k.constant.estimate);
      out.summary("K_hat_" + ex + "_ci_lower", k.constant.lower);
      out.summary("K_hat_" + ex + "_ci_upper", k.constant.upper);
      if (!std::isfinite(k.constant.estimate)) out.fail("heisenberg_constant.csv");
      DualityReport r;
      r.p = p;
      r.K_C = k.constant.estimate;
      r.K_G = std::numeric_limits<double>::quiet_NaN();
      r.mc_ci = k.constant.half_width();
      reports.push_back(r);
    }
    out.table("heisenberg_constant.csv", table.str());
    out.table("plot_data.csv", emit_plot_data(reports));
  }
  (void)tol;
}

void run_audit(const ExperimentConfig& cfg, const Tolerances& tol, Outputs& out) {
  const auto space = build_space(cfg);
  const auto& d = *space;
  const auto kernel = build_kernel(cfg, space);
  const auto pairs = build_pairs(cfg, d);
  const auto scale = build_scale(cfg, d);
  const auto p_list = cfg.p_list();
  const auto corpus = build_corpus_from(cfg, kernel, d, pairs, p_list);

  // Monotonicity over the finite exponents, with the W_inf column.
  std::vector<double> finite;
  for (double p : p_list) {
    if (std::isfinite(p)) finite.push_back(p);
  }
  std::sort(finite.begin(), finite.end());
  finite.erase(std::unique(finite.begin(), finite.end()), finite.end());
  if (!finite.empty()) {
    const auto table = monotonicity_audit(kernel, d, pairs, finite, tol.monotone);
    std::ostringstream body;
    body << "x,y";
    for (double p : finite) body << ",W_" << exponent_label(p);
    body << ",W_inf\n";
    for (const auto& row : table.rows) {
      body << row.pair.first << ',' << row.pair.second;
      for (double v : row.values) body << ',' << format_double(v);
      body << ',' << format_double(row.w_inf) << '\n';
    }
    out.table("monotonicity.csv", body.str());
    for (std::size_t k = 0; k < finite.size(); ++k) {
      out.summary("K_C_" + exponent_label(finite[k]), table.constants[k]);
    }
    out.summary("K_C_inf", table.constant_inf);
    if (!table.rows_nondecreasing || !table.rows_below_inf || !table.constants_nondecreasing) {
      out.fail("monotonicity.csv");
    }
  }

  std::ostringstream implication;
  implication << "p,q,K_C,min_margin,violations,max_support_excess\n";
  double k_support = 0.0;
  for (double p : p_list) {
    const auto audit = implication_audit(kernel, d, p, pairs, corpus, scale, tol.implication);
    implication << format_double(p) << ',' << format_double(audit.q) << ','
                << format_double(audit.K_C) << ',' << format_double(audit.min_margin) << ','
                << audit.violations << ',' << format_double(audit.max_support_excess) << '\n';
    out.summary("implication_min_margin_" + exponent_label(p), audit.min_margin);
    if (audit.violations > 0) out.fail("implication.csv");
    if (std::isinf(p) && audit.max_support_excess > tol.support) out.fail("implication.csv");
    if (p > 1.0) k_support = std::max(k_support, audit.K_C);
  }
  out.table("implication.csv", implication.str());

  if (k_support > 0.0) {
    const auto margins = g_infty_prime_check(kernel, d, corpus, scale, k_support);
    std::ostringstream body;
    body << "field,point,lhs,rhs,margin\n";
    std::size_t violations = 0;
    for (const auto& m : margins) {
      body << m.field << ',' << m.point << ',' << format_double(m.lhs) << ','
           << format_double(m.rhs) << ',' << format_double(m.margin) << '\n';
      if (m.margin < -tol.implication) ++violations;
    }
    out.table("support_gradient.csv", body.str());
    out.summary("support_gradient_violations", static_cast<double>(violations));
  }

  // Gluing on random measure pairs.
  std::mt19937_64 rng(parse_u64(cfg.get("run.seed", "1"), "run.seed"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto random_measure = [&]() {
    std::vector<double> w(d.size());
    double total = 0.0;
    for (double& v : w) {
      v = unit(rng) < 0.3 ? unit(rng) : 0.0;
      total += v;
    }
    if (total == 0.0) {
      w[0] = 1.0;
      total = 1.0;
    }
    for (double& v : w) v /= total;
    return DiscreteMeasure::from_weights(space, std::move(w));
  };
  std::ostringstream gluing;
  gluing << "instance,p,glued_cost,summed_cost,identity_error,lhs,rhs,marginal_error\n";
  const auto instances = cfg.get_size("run.gluing_instances", 5);
  for (std::size_t i = 0; i < instances; ++i) {
    const auto mu = random_measure();
    const auto nu = random_measure();
    for (double p : finite) {
      const auto g = gluing_consistency(kernel, d, mu, nu, p);
      gluing << i << ',' << format_double(p) << ',' << format_double(g.glued_cost) << ','
             << format_double(g.summed_cost) << ',' << format_double(g.identity_error) << ','
             << format_double(g.lhs) << ',' << format_double(g.rhs) << ','
             << format_double(g.marginal_error) << '\n';
      if (g.identity_error > tol.gluing || g.lhs > g.rhs + tol.gluing ||
          g.marginal_error > tol.gluing) {
        out.fail("gluing.csv");
      }
    }
  }
  out.table("gluing.csv", gluing.str());

  std::ostringstream cheb;
  cheb << "p,x,y,field,lhs,rhs\n";
  for (double p : finite) {
    if (p <= 1.0) continue;
    const double k = best_constant_Cp(kernel, d, p, pairs);
    for (const auto& s : chebyshev_split_check(kernel, d, p, k, pairs, corpus)) {
      cheb << format_double(p) << ',' << s.pair.first << ',' << s.pair.second << ',' << s.field
           << ',' << format_double(s.lhs) << ',' << format_double(s.rhs) << '\n';
      if (s.lhs > s.rhs + 1e-12) out.fail("chebyshev.csv");
    }
  }
  out.table("chebyshev.csv", cheb.str());
}

}  // namespace

RunResult run(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  RunResult result;
  try {
    check_command(config.command);
    const auto tol = resolve_tolerances(config);
    Outputs out(out_dir);
    if (config.command == "wasserstein") {
      run_wasserstein(config, tol, out);
    } else if (config.command == "hopf-lax") {
      run_hopf_lax(config, tol, out);
    } else if (config.command == "check-duality") {
      run_check_duality(config, tol, out);
    } else if (config.command == "simulate-heisenberg") {
      run_simulate_heisenberg(config, tol, out);
    } else {
      run_audit(config, tol, out);
    }
    out.flush(manifest_text(config, tol, out.failed()));
    result.failed_tables = out.failed();
    if (!result.failed_tables.empty()) {
      result.code = ExitCode::assertion_failed;
      result.diagnostic = "assertion failed in table " + result.failed_tables.front();
    }
  } catch (const MalformedInput& e) {
    result.code = ExitCode::malformed_input;
    result.diagnostic = e.what();
  } catch (const PreconditionError& e) {
    result.code = ExitCode::malformed_input;
    result.diagnostic = e.what();
  } catch (const SolverError& e) {
    result.code = ExitCode::assertion_failed;
    result.diagnostic = std::string("solver: ") + e.what();
  }
  return result;
}

}  // namespace wd
