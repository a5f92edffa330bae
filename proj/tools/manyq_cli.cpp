#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "manyq/config.hpp"
#include "manyq/errors.hpp"
#include "manyq/output.hpp"
#include "manyq/scenario.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  bool quiet = false;
};

void add_common(CLI::App* sub, Flags& f, bool config_required) {
  auto* c = sub->add_option("--config", f.config, "Scenario JSON file")->check(CLI::ExistingFile);
  if (config_required) c->required();
  sub->add_option("--seed", f.seed, "Root seed (overrides run.seed)");
  sub->add_option("--out", f.out, std::string("Output directory (overrides $") + manyq::kOutDirEnv + " and output.dir)");
  sub->add_option("--threads", f.threads, "Worker threads for replications")->check(CLI::Range(1u, 1024u));
  sub->add_flag("--quiet", f.quiet, "Only print errors");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"manyq: many-server queues with abandonment, their fluid limits and invariant states"};
  app.require_subcommand(1);
  app.fallthrough(false);

  Flags flags;
  const struct {
    manyq::Subcommand sub;
    const char* help;
    bool needs_config;
  } table[] = {
      {manyq::Subcommand::simulate, "Simulate the N-server system and write its trajectory", true},
      {manyq::Subcommand::fluid, "Solve the fluid equations", true},
      {manyq::Subcommand::invariant, "Compute the invariant manifold", true},
      {manyq::Subcommand::stationary, "Estimate the stationary behaviour by long runs", true},
      {manyq::Subcommand::convergence, "Stationary estimates along a list of N against the invariant state", true},
      {manyq::Subcommand::interchange, "M/M/N counterexample to the interchange of limits", false},
      {manyq::Subcommand::validate, "Run the acceptance suite", false},
  };
  for (const auto& t : table) add_common(app.add_subcommand(manyq::to_string(t.sub), t.help), flags, t.needs_config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : manyq::kExitConfig;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const auto sub = manyq::parse_subcommand(chosen->get_name());

  manyq::ScenarioConfig cfg;
  try {
    cfg = flags.config.empty() ? manyq::parse_config("{}") : manyq::load_config(flags.config);
  } catch (const manyq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return manyq::kExitConfig;
  }

  manyq::RunContext ctx;
  ctx.out_dir = flags.out;
  ctx.seed = flags.seed;
  ctx.threads = flags.threads;
  ctx.quiet = flags.quiet;
  ctx.log = &std::cout;
  ctx.err = &std::cerr;
  const manyq::ScenarioResult res = manyq::run_scenario(cfg, *sub, ctx);
  if (!flags.quiet) {
    for (const auto& p : res.artifacts) std::cout << "wrote " << p.string() << '\n';
  }
  return res.exit_code;
}
