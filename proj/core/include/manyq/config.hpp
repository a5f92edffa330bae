#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "manyq/distribution.hpp"
#include "manyq/engine.hpp"
#include "manyq/fluid.hpp"

namespace manyq {

enum class InitialKind { empty, explicit_state, stationary };

struct RunConfig {
  double horizon = 1000.0;
  std::optional<double> warmup;  // default 20% of the horizon
  int replications = 1;
  std::uint64_t seed = 1;
  bool audit = true;
  std::uint64_t max_events = 500'000'000;
  int batches = 20;
  double snapshot_dt = 0.0;
  std::vector<double> tail_grid;
  std::vector<double> snapshot_edges;  // simulate histograms; default 50 bins on [0, 10 max(means)]
  std::size_t trajectory_stride = 1;
  /// In convergence studies, run N-server systems for horizon * N0 / N where
  /// N0 is the smallest N (keeps the event count per N roughly constant).
  bool scale_horizon = false;
  unsigned threads = 1;
};

struct FluidConfig {
  double lambda = 1.0;
  double x0 = 0.0;
  InitialMeasure nu0;
  InitialMeasure eta0;
  double horizon = 10.0;
  double delta = 1e-3;
  std::vector<double> snapshot_times;
  std::vector<double> snapshot_edges;  // default: 50 bins on [0, horizon]
};

struct InterchangeConfig {
  std::vector<int> servers_list{10, 100, 1000};
  double fluid_horizon = 10.0;
};

struct ScenarioConfig {
  std::optional<int> servers;
  std::vector<int> servers_list;
  Distribution arrival_law = Distribution::exponential(1.0);
  std::optional<double> lambda_bar;    // lambda^(N) = round(lambda_bar N)
  std::optional<double> arrival_rate;  // explicit absolute rate
  Distribution service = Distribution::exponential(1.0);
  std::optional<Distribution> patience;
  InitialKind initial_kind = InitialKind::empty;
  InitialCondition initial;
  RunConfig run;
  std::optional<FluidConfig> fluid;
  InterchangeConfig interchange;
  std::optional<std::string> output_dir;

  std::string canonical;      // canonical JSON of the input document
  std::uint64_t hash = 0;     // FNV-1a of `canonical`

  /// Absolute arrival rate for N servers.
  double rate_for(int n_servers) const;
  ModelSpec model(int n_servers) const;
  /// lambda_bar if given, else arrival_rate / N for the single N.
  double fluid_lambda() const;
};

/// Parses and validates a JSON scenario. Unknown keys are rejected; errors
/// are ConfigError naming the offending field.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

/// Distribution from its JSON text, e.g. {"kind":"erlang","shape":2,"rate":2}.
Distribution parse_distribution(const std::string& json_text);

std::string hash_hex(std::uint64_t h);

}  // namespace manyq
