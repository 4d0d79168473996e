#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "swarm_opt/cli.hpp"
#include "swarm_opt/paper_scenarios.hpp"

using namespace swarm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::current_path() / "scratch_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "swarm-opt");
  testing::internal::CaptureStdout();
  testing::internal::CaptureStderr();
  const int code = cli_main(args);
  const std::string out = testing::internal::GetCapturedStdout();
  return {code, out, testing::internal::GetCapturedStderr()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Cli, InitExamplesThenRun) {
  const fs::path dir = scratch("run");
  ASSERT_EQ(cli({"init-examples", (dir / "ex").string()}).code, 0);
  const Result r = cli({"run", (dir / "ex" / "paper_A.scn").string(), "--horizon", "300", "--out", (dir / "a").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("300 steps"), std::string::npos);
  for (const char* f : {"trajectory.csv", "metrics.csv", "summary.json", "plots/consensus_spread.svg",
                        "plots/optimality_gap.svg", "plots/y_ratio_spread.svg", "plots/state_envelope.svg"})
    EXPECT_TRUE(fs::exists(dir / "a" / f)) << f;
  const auto summary = nlohmann::json::parse(slurp(dir / "a" / "summary.json"));
  EXPECT_EQ(summary["steps"], 300);
  for (const char* key : {"final_consensus_spread", "final_optimality_gap", "final_y_ratio_spread",
                          "max_state_envelope", "psi_max_row_sum_err", "replay_max_residual", "wall_time"})
    EXPECT_TRUE(summary.contains(key)) << key;
  EXPECT_LT(summary["replay_max_residual"].get<double>(), 1e-9);
}

TEST(Cli, NoPlotsAndAlgorithmB) {
  const fs::path dir = scratch("b");
  save_scenario_file(paper_file(Algorithm::B), dir / "b.scn");
  const Result r = cli({"run", (dir / "b.scn").string(), "--horizon", "100", "--out", (dir / "out").string(), "--no-plots"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_FALSE(fs::exists(dir / "out" / "plots"));
  const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  EXPECT_TRUE(summary["replay_max_residual"].is_null());

  const Result v = cli({"verify", (dir / "out" / "trajectory.csv").string(), (dir / "b.scn").string()});
  EXPECT_EQ(v.code, 0) << v.out;
  EXPECT_NE(v.out.find("SKIP replay"), std::string::npos);
  EXPECT_NE(v.out.find("PASS position feasibility"), std::string::npos) << v.out;
}

TEST(Cli, DeterministicOutputs) {
  const fs::path dir = scratch("det");
  save_scenario_file(paper_file(Algorithm::A), dir / "a.scn");
  ASSERT_EQ(cli({"run", (dir / "a.scn").string(), "--horizon", "1000", "--out", (dir / "1").string()}).code, 0);
  ASSERT_EQ(cli({"run", (dir / "a.scn").string(), "--horizon", "1000", "--out", (dir / "2").string()}).code, 0);
  EXPECT_EQ(slurp(dir / "1" / "trajectory.csv"), slurp(dir / "2" / "trajectory.csv"));
  EXPECT_EQ(slurp(dir / "1" / "metrics.csv"), slurp(dir / "2" / "metrics.csv"));
  EXPECT_EQ(slurp(dir / "1" / "plots" / "optimality_gap.svg"), slurp(dir / "2" / "plots" / "optimality_gap.svg"));
}

TEST(Cli, VerifyDetectsEditedRow) {
  const fs::path dir = scratch("verify");
  save_scenario_file(paper_file(Algorithm::A), dir / "a.scn");
  ASSERT_EQ(cli({"run", (dir / "a.scn").string(), "--horizon", "200", "--out", dir.string(), "--no-plots"}).code, 0);
  const Result ok = cli({"verify", (dir / "trajectory.csv").string(), (dir / "a.scn").string()});
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_EQ(ok.out.find("FAIL"), std::string::npos);

  // Edit v_1 of agent 3 at step 120.
  std::istringstream in(slurp(dir / "trajectory.csv"));
  std::ostringstream edited;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("120,3,", 0) == 0) {
      std::vector<std::string> cells;
      std::stringstream ls(line);
      for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
      cells[4] = "0.25";
      line.clear();
      for (std::size_t i = 0; i < cells.size(); ++i) line += (i ? "," : "") + cells[i];
    }
    edited << line << '\n';
  }
  std::ofstream(dir / "edited.csv", std::ios::binary) << edited.str();
  const Result bad = cli({"verify", (dir / "edited.csv").string(), (dir / "a.scn").string()});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("FAIL replay residual < 1e-9 at step 119"), std::string::npos) << bad.out;
}

TEST(Cli, ValidationFailureExitsOne) {
  const fs::path dir = scratch("broken");
  ScenarioFile f = paper_file(Algorithm::A);
  f.scenario.agents[0].initial.p = 6.0;
  save_scenario_file(f, dir / "broken.scn");
  const Result r = cli({"run", (dir / "broken.scn").string(), "--out", dir.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("Assumption 3 violated"), std::string::npos) << r.err;

  std::ofstream(dir / "garbage.scn") << "{ \"format_version\": \"1\",\n  oops }";
  const Result g = cli({"run", (dir / "garbage.scn").string()});
  EXPECT_EQ(g.code, 1);
  EXPECT_NE(g.err.find("garbage.scn:2:"), std::string::npos) << g.err;

  EXPECT_EQ(cli({"run", (dir / "nothing.scn").string()}).code, 1);
  EXPECT_EQ(cli({"verify", (dir / "nothing.csv").string(), (dir / "broken.scn").string()}).code, 1);
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
  EXPECT_EQ(cli({}).code, 1);
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  const fs::path dir = scratch("env");
  save_scenario_file(paper_file(Algorithm::A), dir / "a.scn");
  ::setenv("SWARM_OPT_OUT", (dir / "from_env").string().c_str(), 1);
  EXPECT_EQ(default_out_dir(), dir / "from_env");
  const Result r = cli({"run", (dir / "a.scn").string(), "--horizon", "5", "--no-plots"});
  ::unsetenv("SWARM_OPT_OUT");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "from_env" / "trajectory.csv"));
  EXPECT_EQ(default_out_dir(), fs::path("swarm_out"));
}

TEST(Cli, SweepIsolatesOutputs) {
  const fs::path dir = scratch("sweep");
  save_scenario_file(paper_file(Algorithm::A), dir / "a.scn");
  save_scenario_file(paper_file(Algorithm::B), dir / "b.scn");
  fs::create_directories(dir / "other");
  save_scenario_file(paper_file(Algorithm::A), dir / "other" / "a.scn");
  const Result r = cli({"sweep", (dir / "a.scn").string(), (dir / "b.scn").string(), (dir / "other" / "a.scn").string(),
                        "--horizon", "200", "--out", (dir / "out").string(), "-j", "3", "--no-plots"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "out" / "a" / "trajectory.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "b" / "trajectory.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "a_2" / "trajectory.csv"));
  EXPECT_EQ(slurp(dir / "out" / "a" / "trajectory.csv"), slurp(dir / "out" / "a_2" / "trajectory.csv"));

  // A sequential run writes the same bytes as the concurrent one.
  ASSERT_EQ(cli({"run", (dir / "a.scn").string(), "--horizon", "200", "--out", (dir / "seq").string(), "--no-plots"}).code, 0);
  EXPECT_EQ(slurp(dir / "seq" / "trajectory.csv"), slurp(dir / "out" / "a" / "trajectory.csv"));
}
