#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

namespace fs = std::filesystem;

struct Run {
  int code = -1;
  std::string output;
};

std::string env(const char* name) {
  const char* value = std::getenv(name);
  return value ? value : "";
}

Run run(const std::string& args) {
  const std::string command = env("MWLAB_BIN") + " " + args + " 2>&1";
  Run result;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return result;
  char buf[4096];
  while (std::fgets(buf, sizeof(buf), pipe)) result.output += buf;
  const int status = pclose(pipe);
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string config(const std::string& name) { return env("MWLAB_EXAMPLES") + "/" + name; }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mwlab_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    if (env("MWLAB_BIN").empty()) GTEST_SKIP() << "MWLAB_BIN not set";
  }
};

TEST_F(Cli, CheckPrintsStationaryLaw) {
  const auto r = run("check --config " + config("reference3.json"));
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("period = 1"), std::string::npos);
  EXPECT_NE(r.output.find("pi = 0.333"), std::string::npos);
}

TEST_F(Cli, CheckFlagsPeriodicChain) {
  const auto r = run("check --config " + config("alternating.json"));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("periodic = true"), std::string::npos);
}

TEST_F(Cli, InvalidChainsExitWithInputError) {
  const auto dir = scratch("invalid");
  std::ofstream(dir / "bad.json") << R"({"chain": [[0.5, 0.6], [0.5, 0.5]], "observable": [1, -1]})";
  std::ofstream(dir / "reducible.json") << R"({"chain": [[1, 0], [0, 1]], "observable": [1, -1]})";
  auto r = run("check --config " + (dir / "bad.json").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("NotStochastic"), std::string::npos);
  r = run("check --config " + (dir / "reducible.json").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("Reducible"), std::string::npos);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("check").code, 2);
  EXPECT_EQ(run("check --config /nonexistent.json").code, 2);
}

TEST_F(Cli, StochasticCommandsNeedSeed) {
  const auto dir = scratch("seedless");
  std::ofstream(dir / "c.json") << R"({"chain": [[0.5, 0.5], [0.5, 0.5]], "observable": [1, -1]})";
  const auto r = run("simulate --config " + (dir / "c.json").string() + " --out " + dir.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("seed"), std::string::npos);
}

TEST_F(Cli, DecomposeWritesArtifacts) {
  const auto dir = scratch("decompose");
  const auto r = run("decompose --config " + config("reference3.json") + " --out " + dir.string());
  EXPECT_EQ(r.code, 0) << r.output;
  for (const char* name : {"h.txt", "H.txt", "D.txt", "Lambda.txt", "growth.txt", "growth_report.txt",
                           "exponents.txt", "resolvent_scan.txt", "decompose_summary.txt",
                           "manifest_decompose.txt"})
    EXPECT_TRUE(fs::exists(dir / name)) << name;
  EXPECT_NE(slurp(dir / "decompose_summary.txt").find("diffusion_rank = 2"), std::string::npos);
  const auto report = run("report --config " + config("reference3.json") + " --out " + dir.string());
  EXPECT_EQ(report.code, 0);
  EXPECT_NE(report.output.find("## decompose_summary.txt"), std::string::npos);
}

TEST_F(Cli, DegenerateChainRunsSupDecayInsteadOfKs) {
  const auto dir = scratch("zero");
  const auto r = run("verify --config " + config("zero.json") + " --out " + dir.string());
  EXPECT_EQ(r.code, 0) << r.output;
  const auto summary = slurp(dir / "verify_summary.txt");
  EXPECT_NE(summary.find("degenerate_path_decay[start=0].result = PASS"), std::string::npos);
  EXPECT_NE(summary.find("D has rank 0"), std::string::npos);
  EXPECT_EQ(summary.find("marginal_gof"), std::string::npos);
}

TEST_F(Cli, SeedFlagOverridesConfig) {
  const auto dir = scratch("seed");
  const auto r = run("simulate --config " + config("iid.json") + " --seed 424242 --out " + dir.string());
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(slurp(dir / "manifest_simulate.txt").find("seed = 424242"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "trace_start0.txt"));
}

TEST_F(Cli, OracleWritesDistributions) {
  const auto dir = scratch("oracle");
  const auto r = run("oracle --config " + config("reference3.json") + " --out " + dir.string());
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(fs::exists(dir / "distribution_start0.txt"));
  EXPECT_TRUE(fs::exists(dir / "cov_Sn.txt"));
  EXPECT_NE(r.output.find("start0.total_probability = 1"), std::string::npos);
}

TEST_F(Cli, ReportOnEmptyDirectoryFails) {
  const auto dir = scratch("empty");
  EXPECT_EQ(run("report --config " + config("iid.json") + " --out " + dir.string()).code, 2);
}

}  // namespace
