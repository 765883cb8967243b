#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wasser_dual/error.hpp"
#include "wasser_dual/experiment.hpp"
#include "wasser_dual/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein / gradient duality experiments on finite metric spaces"};
  std::string command;
  std::string config_path;
  std::string out_dir = "out";
  std::string seed;
  std::vector<std::string> overrides;
  app.add_option("command", command, "wasserstein | hopf-lax | check-duality | simulate-heisenberg | audit")
      ->required();
  app.add_option("--config", config_path, "experiment config (key = value sections)")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "seed override");
  app.add_option("--override", overrides, "section.key=value")->take_all();
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "wasser-dual: %s\n", e.what());
    return 1;
  }

  wd::reload_thread_cap_from_env();
  if (!seed.empty()) {
    overrides.push_back("run.seed=" + seed);
    overrides.push_back("sde.seed=" + seed);
  }
  wd::RunResult result;
  try {
    const auto config = wd::load_config(config_path, command, overrides);
    result = wd::run(config, out_dir);
  } catch (const wd::MalformedInput& e) {
    result.code = wd::ExitCode::malformed_input;
    result.diagnostic = e.what();
  } catch (const std::exception& e) {
    result.code = wd::ExitCode::malformed_input;
    result.diagnostic = e.what();
  }
  if (!result.diagnostic.empty()) std::fprintf(stderr, "wasser-dual: %s\n", result.diagnostic.c_str());
  return static_cast<int>(result.code);
}
