#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "wasser_dual/error.hpp"
#include "wasser_dual/experiment.hpp"

using namespace wd;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("wd_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig config(const std::string& text, const std::string& command,
                        std::vector<std::string> overrides = {}) {
  std::istringstream in(text);
  auto c = parse_config(in, command, overrides);
  c.base_dir = WD_CONFIG_DIR;
  return c;
}

int cli(const std::string& args) {
  const int status = std::system((std::string(WD_CLI_PATH) + " " + args + " 2>/dev/null").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kTwoPoint =
    "[space]\ntype = edge_list\nedges = two_point.edges\n"
    "[measures]\nmu = 0.5, 0.5\nnu = 0.75, 0.25\n[run]\np_list = 1\n";

}  // namespace

TEST(Config, FlattensSectionsAndOverrides) {
  const auto c = config("seed = 4\n[space]\ntype = torus\nn = 8\n", "audit", {"space.n=16", "p_list=1,2"});
  EXPECT_EQ(c.get("run.seed", ""), "4");
  EXPECT_EQ(c.get_size("space.n", 0), 16u);
  EXPECT_EQ(c.p_list(), (std::vector<double>{1, 2}));
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(config("", "bogus"), MalformedInput);
  try {
    config("[run]\np_list =\n", "audit").p_list();
    FAIL();
  } catch (const MalformedInput& e) {
    EXPECT_NE(std::string(e.what()).find("p_list empty"), std::string::npos);
  }
  EXPECT_THROW(config("[run]\np_list = 0.5\n", "audit").p_list(), MalformedInput);
  EXPECT_THROW(config("[space]\nedges = missing.edges\n", "audit").path("space.edges"), MalformedInput);
  EXPECT_THROW(config("[space]\nn = x\n", "audit").get_size("space.n", 0), MalformedInput);
  const auto p = config("[run]\np_list = 1, inf\n", "audit").p_list();
  EXPECT_TRUE(std::isinf(p.back()));
}

TEST(Run, WassersteinTwoPointSummary) {
  const auto dir = scratch("w");
  const auto r = run(config(kTwoPoint, "wasserstein"), dir);
  EXPECT_EQ(r.code, ExitCode::ok) << r.diagnostic;
  EXPECT_NE(slurp(dir / "summary.csv").find("W_1,0.25\n"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "manifest"));
  EXPECT_TRUE(fs::exists(dir / "plan_p1.csv"));
}

TEST(Run, MalformedInputExitsOne) {
  const auto dir = scratch("bad");
  auto r = run(config("[space]\ntype = torus\nn = 8\n[run]\np_list =\n", "check-duality"), dir);
  EXPECT_EQ(r.code, ExitCode::malformed_input);
  EXPECT_NE(r.diagnostic.find("p_list empty"), std::string::npos);
  r = run(config("[space]\ntype = edge_list\nedges = nowhere.edges\n[run]\np_list = 1\n", "audit"), dir);
  EXPECT_EQ(r.code, ExitCode::malformed_input);
  EXPECT_NE(r.diagnostic.find("space.edges"), std::string::npos);
  r = run(config("[sde]\nt = 1\n[run]\np_list = 1\n", "simulate-heisenberg"), dir);
  EXPECT_EQ(r.code, ExitCode::malformed_input);
}

TEST(Run, ReproducibleBodies) {
  const std::string text =
      "[space]\ntype = torus\nn = 16\n[kernel]\nt = 0.02\n[run]\np_list = 1, 2, inf\nseed = 5\n";
  const auto a = scratch("ra"), b = scratch("rb");
  ASSERT_EQ(run(config(text, "check-duality"), a).code, ExitCode::ok);
  ASSERT_EQ(run(config(text, "check-duality"), b).code, ExitCode::ok);
  for (const char* name : {"summary.csv", "pairs.csv", "functions.csv", "chain.csv", "plot_data.csv"}) {
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
}

TEST(Run, AuditAndHopfLaxPass) {
  const auto dir = scratch("audit");
  auto r = run(config("[space]\ntype = torus\nn = 16\n[kernel]\nt = 0.02\n[run]\np_list = 1, 2, inf\nseed = 2\n",
                      "audit"),
               dir);
  EXPECT_EQ(r.code, ExitCode::ok) << r.diagnostic;
  r = run(config("[space]\ntype = interval\nn = 60\n[run]\np = 2\ntimes = 0.05, 0.1\n", "hopf-lax"), dir);
  EXPECT_EQ(r.code, ExitCode::ok) << r.diagnostic;
}

TEST(PlotData, Examples) {
  EXPECT_EQ(emit_plot_data({}), "p,K_C,K_G,ci_halfwidth,mesh\n");
  DualityReport one;
  one.p = 1.0;
  one.K_C = 1.0;
  one.K_G = 1.0;
  one.mesh = 0.125;
  EXPECT_EQ(emit_plot_data(std::vector<DualityReport>{one}), "p,K_C,K_G,ci_halfwidth,mesh\n1,1,1,0,0.125\n");
  DualityReport inf = one, two = one;
  inf.p = kInf;
  two.p = 2.0;
  const auto text = emit_plot_data(std::vector<DualityReport>{inf, one, two});
  EXPECT_LT(text.find("\n1,"), text.find("\n2,"));
  EXPECT_LT(text.find("\n2,"), text.find("\ninf,"));
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  std::ofstream(dir / "w.ini") << "[space]\ntype = edge_list\nedges = " << WD_CONFIG_DIR
                               << "/two_point.edges\n[measures]\nmu = 0.5, 0.5\nnu = 0.75, 0.25\n[run]\np_list = 1\n";
  EXPECT_EQ(cli("wasserstein --config " + (dir / "w.ini").string() + " --out " + (dir / "o").string()), 0);
  EXPECT_EQ(cli("wasserstein --config " + (dir / "w.ini").string() + " --override run.p_list= --out " +
                (dir / "o").string()),
            1);
  EXPECT_EQ(cli("nonsense --config " + (dir / "w.ini").string()), 1);
  EXPECT_EQ(cli("wasserstein"), 1);
  std::ofstream(dir / "cd.ini") << "[space]\ntype = torus\nn = 32\n[kernel]\nt = 0.05\n[run]\np_list = inf\nseed = 1\n";
  EXPECT_EQ(cli("check-duality --config " + (dir / "cd.ini").string() + " --out " + (dir / "o2").string()), 2);
}
