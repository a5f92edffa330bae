#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = MANYQ_CLI_PATH;
const std::string kConfigs = MANYQ_CONFIG_DIR;

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Last data line of a CSV as a vector of cells.
std::vector<std::string> last_row(const fs::path& p) {
  std::ifstream in(p);
  std::string line, last;
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  std::vector<std::string> cells;
  std::stringstream ss(last);
  for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
  return cells;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("manyq-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ::unsetenv("MANYQ_OUT_DIR");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string out(const std::string& sub = "a") const { return (dir_ / sub).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, FluidErlangExample) {
  ASSERT_EQ(run("fluid --config " + kConfigs + "/erlang_fluid.json --out " + out()), 0);
  const auto row = last_row(fs::path(out()) / "fluid_trajectory.csv");
  ASSERT_EQ(row.size(), 8u);
  EXPECT_NEAR(std::stod(row[0]), 10.0, 1e-9);
  EXPECT_NEAR(std::stod(row[2]), 0.25, 1e-3);  // Q
  EXPECT_NEAR(std::stod(row[1]), 1.25, 1e-3);  // X
  EXPECT_TRUE(fs::exists(fs::path(out()) / "fluid_snapshots.csv"));
  EXPECT_EQ(slurp(fs::path(out()) / "fluid_trajectory.csv").rfind("# config_hash=", 0), 0u);
}

TEST_F(Cli, FluidAlphaVariant) {
  ASSERT_EQ(run("fluid --config " + kConfigs + "/erlang_alpha_fluid.json --out " + out()), 0);
  const auto row = last_row(fs::path(out()) / "fluid_trajectory.csv");
  EXPECT_NEAR(std::stod(row[2]), 1.0 / 12.0, 1e-3);
}

TEST_F(Cli, InvariantMMM) {
  ASSERT_EQ(run("invariant --config " + kConfigs + "/mm_m_invariant.json --out " + out()), 0);
  const std::string j = slurp(fs::path(out()) / "invariant.json");
  EXPECT_NE(j.find("\"x_star\": 2.0"), std::string::npos) << j;
  EXPECT_NE(j.find("\"unique\": true"), std::string::npos);
  EXPECT_NE(j.find("\"config_hash\""), std::string::npos);
}

TEST_F(Cli, InvariantFlatPatienceIsNotUnique) {
  ASSERT_EQ(run("invariant --config " + kConfigs + "/flat_patience_invariant.json --out " + out()), 0);
  const std::string j = slurp(fs::path(out()) / "invariant.json");
  EXPECT_NE(j.find("\"unique\": false"), std::string::npos) << j;
  EXPECT_EQ(j.find("x_star"), std::string::npos);
}

TEST_F(Cli, SimulateWithAuditExitsZero) {
  for (const char* cfg : {"mm2_simulate.json", "gi_g_n_g_simulate.json"}) {
    for (int seed : {1, 2, 3}) {
      EXPECT_EQ(run(std::string("simulate --config ") + kConfigs + "/" + cfg + " --seed " + std::to_string(seed) +
                    " --out " + out()),
                0)
          << cfg << " seed " << seed;
    }
  }
  EXPECT_TRUE(fs::exists(fs::path(out()) / "trajectory.csv"));
  EXPECT_TRUE(fs::exists(fs::path(out()) / "summary.json"));
}

TEST_F(Cli, RerunsAreByteIdentical) {
  for (const std::string sub : {"simulate", "stationary"}) {
    const std::string cfg = sub == "simulate" ? "/mm2_simulate.json" : "/mmn_m_stationary.json";
    ASSERT_EQ(run(sub + " --config " + kConfigs + cfg + " --seed 9 --out " + out("x")), 0);
    ASSERT_EQ(run(sub + " --config " + kConfigs + cfg + " --seed 9 --threads 2 --out " + out("y")), 0);
    for (const auto& e : fs::directory_iterator(out("x"))) {
      EXPECT_EQ(slurp(e.path()), slurp(fs::path(out("y")) / e.path().filename())) << e.path();
    }
    fs::remove_all(out("x"));
    fs::remove_all(out("y"));
  }
}

TEST_F(Cli, SeedIsEmbedded) {
  ASSERT_EQ(run("simulate --config " + kConfigs + "/mm2_simulate.json --seed 4242 --out " + out()), 0);
  EXPECT_NE(slurp(fs::path(out()) / "trajectory.csv").find("seed=4242"), std::string::npos);
  EXPECT_NE(slurp(fs::path(out()) / "summary.json").find("\"seed\": 4242"), std::string::npos);
}

TEST_F(Cli, EnvironmentOverridesConfigDir) {
  const std::string env = out("env");
  const std::string cmd = "MANYQ_OUT_DIR=" + env + " " + kCli + " interchange --quiet > /dev/null 2>&1";
  ASSERT_EQ(WEXITSTATUS(std::system(cmd.c_str())), 0);
  EXPECT_TRUE(fs::exists(fs::path(env) / "interchange.csv"));
}

TEST_F(Cli, ExitCodes) {
  const fs::path bad = dir_ / "bad.json";
  std::ofstream(bad) << R"({"servers": 2, "patience": {"kind": "exponential", "rate": 1}, "no_abandonment": true})";
  EXPECT_EQ(run("simulate --config " + bad.string() + " --out " + out()), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("simulate"), 2);  // --config is required
  EXPECT_EQ(run("fluid --config " + kConfigs + "/mm2_simulate.json --out " + out()), 2);  // no fluid section
  // unwritable output directory
  EXPECT_EQ(run("invariant --config " + kConfigs + "/mm_m_invariant.json --out /proc/manyq-nope"), 3);
  // event cap
  const fs::path capped = dir_ / "capped.json";
  std::ofstream(capped) << R"({"servers": 2, "arrival": {"rate": 1}, "no_abandonment": true,
                               "run": {"horizon": 1000, "max_events": 10}})";
  EXPECT_EQ(run("simulate --config " + capped.string() + " --out " + out()), 3);
}
