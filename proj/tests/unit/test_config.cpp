#include <gtest/gtest.h>

#include <cstdlib>

#include "manyq/config.hpp"
#include "manyq/errors.hpp"
#include "manyq/output.hpp"

using namespace manyq;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, MinimalDefaults) {
  const ScenarioConfig c = parse_config(
      R"({"servers": 10, "arrival": {"rate": 8}, "service": {"kind": "exponential", "rate": 1}, "no_abandonment": true})");
  EXPECT_EQ(c.servers, 10);
  EXPECT_FALSE(c.patience);
  EXPECT_FALSE(c.run.warmup);  // 20% of the horizon
  EXPECT_TRUE(c.run.audit);
  EXPECT_EQ(c.run.batches, 20);
  EXPECT_EQ(FluidConfig{}.delta, 1e-3);
  EXPECT_DOUBLE_EQ(c.rate_for(10), 8.0);
  EXPECT_NEAR(c.model(10).arrival.mean(), 1.0 / 8.0, 1e-15);
}

TEST(Config, PatienceAndNoAbandonmentConflict) {
  const std::string e = error_of(
      R"({"servers": 2, "arrival": {"rate": 1}, "patience": {"kind": "exponential", "rate": 1}, "no_abandonment": true})");
  EXPECT_NE(e.find("patience"), std::string::npos) << e;
}

TEST(Config, RateScalingRule) {
  const ScenarioConfig c = parse_config(R"({"servers_list": [10, 50, 200], "arrival": {"lambda_bar": 2}})");
  EXPECT_DOUBLE_EQ(c.rate_for(10), 20.0);
  EXPECT_DOUBLE_EQ(c.rate_for(50), 100.0);
  EXPECT_DOUBLE_EQ(c.rate_for(200), 400.0);
}

TEST(Config, UnknownKeysNamed) {
  EXPECT_NE(error_of(R"({"servers": 2, "bogus": 1})").find("bogus"), std::string::npos);
  EXPECT_NE(error_of(R"({"run": {"horizon": 10, "horizn": 5}})").find("run.horizn"), std::string::npos);
  EXPECT_NE(error_of(R"({"service": {"kind": "erlang", "shape": 2, "rate": 2, "scale": 1}})").find("service.scale"),
            std::string::npos);
}

TEST(Config, FieldConstraints) {
  EXPECT_NE(error_of(R"({"arrival": {"lambda_bar": 0}})").find("arrival.lambda_bar"), std::string::npos);
  EXPECT_NE(error_of(R"({"arrival": {"lambda_bar": 1, "rate": 2}})").find("arrival"), std::string::npos);
  EXPECT_NE(error_of(R"({"fluid": {"x0": 1, "delta": 0}})").find("fluid.delta"), std::string::npos);
  EXPECT_NE(error_of(R"({"service": {"kind": "deterministic", "value": 1}})").find("deterministic"), std::string::npos);
  EXPECT_NE(error_of(R"({"service": {"kind": "piecewise", "knots": [[0, 0], [1, 0.7], [2, 0.3], [3, 1]]}})")
                .find("service"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"servers": 0})").find("servers"), std::string::npos);
  EXPECT_NE(error_of("{not json").find("JSON"), std::string::npos);
  EXPECT_NE(error_of(R"({"servers": 2, "patience": {"kind": "exponential", "rate": 1},
                         "initial": {"kind": "explicit", "service_ages": [0.1], "queue_waits": [0.2]}})")
                .find("initial"),
            std::string::npos);
}

TEST(Config, FluidSection) {
  const ScenarioConfig c = parse_config(R"({
    "arrival": {"lambda_bar": 1},
    "service": {"kind": "erlang", "shape": 2, "rate": 2},
    "no_abandonment": true,
    "fluid": {"x0": 1, "nu0": {"kind": "dirac", "at": 0, "mass": 1}, "horizon": 10}})");
  ASSERT_TRUE(c.fluid);
  EXPECT_DOUBLE_EQ(c.fluid->lambda, 1.0);
  EXPECT_DOUBLE_EQ(c.fluid->delta, 1e-3);
  EXPECT_DOUBLE_EQ(c.fluid->nu0.total_mass(), 1.0);
  // the fluid input must be admissible
  EXPECT_NE(error_of(R"({"fluid": {"x0": 1}})").find("fluid"), std::string::npos);
}

TEST(Config, MeasureKinds) {
  const ScenarioConfig c = parse_config(R"({
    "arrival": {"lambda_bar": 2},
    "patience": {"kind": "exponential", "rate": 1},
    "fluid": {"x0": 2, "nu0": {"kind": "equilibrium", "law": "service"},
              "eta0": {"kind": "density", "knots": [[0, 2], [4, 0]], "step": 0.01}}})");
  EXPECT_NEAR(c.fluid->nu0.total_mass(), 1.0, 1e-12);
  EXPECT_NEAR(c.fluid->eta0.total_mass(), 4.0, 1e-9);
}

TEST(Config, HashIgnoresFormatting) {
  const ScenarioConfig a = parse_config(R"({"servers": 3, "arrival": {"rate": 2}})");
  const ScenarioConfig b = parse_config("{\n  \"arrival\" : { \"rate\" : 2 },\n  \"servers\" : 3\n}");
  const ScenarioConfig c = parse_config(R"({"servers": 4, "arrival": {"rate": 2}})");
  EXPECT_EQ(a.hash, b.hash);
  EXPECT_NE(a.hash, c.hash);
  EXPECT_EQ(hash_hex(a.hash).size(), 16u);
}

TEST(Config, ParseDistribution) {
  const Distribution d = parse_distribution(R"({"kind": "shifted", "offset": 3, "inner": {"kind": "exponential", "rate": 1}})");
  EXPECT_NEAR(d.mean(), 4.0, 1e-12);
  EXPECT_THROW(parse_distribution(R"({"kind": "uniform", "a": 2, "b": 1})"), ConfigError);
}

TEST(Output, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678, -2.5}) EXPECT_EQ(std::stod(format_double(v)), v);
  EXPECT_EQ(format_double(1.0 / 0.0), "inf");
}

TEST(Output, DirectoryPrecedence) {
  ::unsetenv(kOutDirEnv);
  EXPECT_EQ(resolve_output_dir(std::nullopt, std::nullopt), "manyq-out");
  EXPECT_EQ(resolve_output_dir(std::nullopt, "cfg"), "cfg");
  ::setenv(kOutDirEnv, "env", 1);
  EXPECT_EQ(resolve_output_dir(std::nullopt, "cfg"), "env");
  EXPECT_EQ(resolve_output_dir("cli", "cfg"), "cli");
  ::unsetenv(kOutDirEnv);
}

TEST(Output, CsvHeader) {
  CsvTable t({"a", "b"});
  t.add_row({1.0, 0.5});
  EXPECT_EQ(t.render(0xabc, 7), "# config_hash=0000000000000abc seed=7\na,b\n1,0.5\n");
  EXPECT_THROW(t.add_row({1.0}), std::invalid_argument);
}

TEST(Output, WriteFailureNamesPath) {
  try {
    write_file("/proc/definitely/not/here.csv", "x");
    FAIL();
  } catch (const SimulationError& e) {
    EXPECT_NE(std::string(e.what()).find("/proc/definitely"), std::string::npos);
  }
}
