#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "manyq/config.hpp"

namespace manyq {

enum class Subcommand { simulate, fluid, invariant, stationary, convergence, interchange, validate };

std::optional<Subcommand> parse_subcommand(std::string_view name);
const char* to_string(Subcommand s) noexcept;
std::vector<Subcommand> all_subcommands();

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitConfig = 2, kExitRuntime = 3 };

struct RunContext {
  std::optional<std::string> out_dir;  // --out
  std::optional<std::uint64_t> seed;   // --seed, overrides run.seed
  std::optional<unsigned> threads;     // --threads, overrides run.threads
  bool quiet = false;
  std::ostream* log = nullptr;  // progress and summaries; nullptr or quiet: silent
  std::ostream* err = nullptr;  // error messages; nullptr: std::cerr
};

struct ScenarioResult {
  int exit_code = kExitOk;
  std::filesystem::path out_dir;
  std::vector<std::filesystem::path> artifacts;
  std::string message;  // error text for nonzero exit codes
};

/// Runs one subcommand and writes its artifacts. Never throws: config
/// problems map to kExitConfig, solver and IO failures to kExitRuntime, and
/// failed identity checks or acceptance criteria to kExitValidation.
ScenarioResult run_scenario(const ScenarioConfig& config, Subcommand sub, const RunContext& ctx);

}  // namespace manyq
