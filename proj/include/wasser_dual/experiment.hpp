#pragma once

// Batch front-end behind the `wasser-dual` executable.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wasser_dual/duality_lab.hpp"

namespace wd {

enum class ExitCode : int { ok = 0, malformed_input = 1, assertion_failed = 2 };

/// Flattened `section.key -> value` view of a key = value config file.
struct ExperimentConfig {
  std::string command;
  std::map<std::string, std::string> values;
  std::filesystem::path base_dir;  // relative file paths resolve here

  bool has(const std::string& key) const { return values.count(key) != 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  /// Comma-separated exponents; "inf" allowed. Throws MalformedInput with
  /// "p_list empty" when the list has no entries.
  std::vector<double> p_list(const std::string& key = "run.p_list") const;
  std::filesystem::path path(const std::string& key) const;
};

inline const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> commands = {"wasserstein", "hopf-lax", "check-duality",
                                                    "simulate-heisenberg", "audit"};
  return commands;
}

/// Parses a key = value file with [section] headers (INI). Keys outside a
/// section live under "run.". Overrides are `section.key=value` strings.
ExperimentConfig load_config(const std::filesystem::path& path, const std::string& command,
                             std::span<const std::string> overrides = {});
ExperimentConfig parse_config(std::istream& in, const std::string& command,
                              std::span<const std::string> overrides = {});

struct RunResult {
  ExitCode code = ExitCode::ok;
  std::string diagnostic;     // one line; empty on success
  std::vector<std::string> failed_tables;
};

/// Executes the configured command and writes manifest, summary.csv and
/// detail tables into `out_dir` (created if needed). Malformed input yields
/// ExitCode::malformed_input; failed invariants yield assertion_failed with
/// the failing table named in the diagnostic.
RunResult run(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// `p,K_C,K_G,ci_halfwidth,mesh` rows sorted by p with inf last.
std::string emit_plot_data(std::span<const DualityReport> reports);

}  // namespace wd
