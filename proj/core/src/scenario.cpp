#include "manyq/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include <json.hpp>

#include "manyq/errors.hpp"
#include "manyq/invariant.hpp"
#include "manyq/output.hpp"
#include "manyq/random.hpp"
#include "manyq/stationary.hpp"
#include "manyq/validation.hpp"

namespace manyq {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr std::pair<Subcommand, const char*> kNames[] = {
    {Subcommand::simulate, "simulate"},       {Subcommand::fluid, "fluid"},
    {Subcommand::invariant, "invariant"},     {Subcommand::stationary, "stationary"},
    {Subcommand::convergence, "convergence"}, {Subcommand::interchange, "interchange"},
    {Subcommand::validate, "validate"},
};

ojson finite_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

ojson stat_json(const Statistic& s) {
  return ojson{{"mean", finite_or_null(s.mean)}, {"half_width", finite_or_null(s.half_width)}, {"samples", s.samples}};
}

ojson counters_json(const Counters& c) {
  return ojson{{"E", c.E}, {"Q", c.Q}, {"R", c.R}, {"S", c.S}, {"D", c.D}, {"K", c.K}};
}

const char* regime_name(Regime r) { return r == Regime::subcritical ? "subcritical" : "critical_or_super"; }

// Shared state of one subcommand invocation.
class Emitter {
 public:
  Emitter(const ScenarioConfig& cfg, Subcommand sub, std::uint64_t seed, fs::path dir, std::ostream* log)
      : cfg_(cfg), sub_(sub), seed_(seed), dir_(std::move(dir)), log_(log) {}

  std::uint64_t seed() const noexcept { return seed_; }

  ojson header() const {
    return ojson{{"subcommand", to_string(sub_)}, {"config_hash", hash_hex(cfg_.hash)}, {"seed", seed_}};
  }

  void csv(const std::string& name, const CsvTable& t) { put(name, t.render(cfg_.hash, seed_)); }
  void json(const std::string& name, const ojson& j) { put(name, j.dump(2) + "\n"); }

  void note(const std::string& line) const {
    if (log_) *log_ << line << '\n';
  }

  std::vector<fs::path> artifacts;

 private:
  void put(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    write_file(p, content);
    artifacts.push_back(p);
  }

  const ScenarioConfig& cfg_;
  Subcommand sub_;
  std::uint64_t seed_;
  fs::path dir_;
  std::ostream* log_;
};

int single_n(const ScenarioConfig& cfg, const char* sub) {
  if (!cfg.servers) throw ConfigError(std::string("servers: '") + sub + "' needs a single 'servers' value");
  return *cfg.servers;
}

InitialCondition initial_for(const ScenarioConfig& cfg) {
  InitialCondition init;
  switch (cfg.initial_kind) {
    case InitialKind::empty:
      break;
    case InitialKind::explicit_state:
      init = cfg.initial;
      break;
    case InitialKind::stationary:
      init.stationary_arrivals = true;
      break;
  }
  return init;
}

std::vector<double> default_edges(const ScenarioConfig& cfg) {
  double m = cfg.service.mean();
  if (cfg.patience) m = std::max(m, cfg.patience->mean());
  if (!std::isfinite(m) || m <= 0.0) m = 1.0;
  return uniform_edges(0.0, 10.0 * m, 50);
}

class TrajectoryRecorder final : public Observer {
 public:
  TrajectoryRecorder(std::size_t stride, double snapshot_dt, double horizon, std::vector<double> edges)
      : table({"time", "event_kind", "X", "nu_mass", "eta_mass", "Q", "R", "S", "D", "K", "chi"}),
        snapshots({"time", "measure", "bin_lo", "bin_hi", "count"}),
        stride_(stride),
        dt_(snapshot_dt),
        horizon_(horizon),
        edges_(std::move(edges)) {}

  void initial(const SystemState& s) {
    row(s, s.clock(), "initial");
    if (dt_ > 0.0) next_ = 0.0;
  }

  void advance(const SystemState& s, double from, double to) override {
    if (!(dt_ > 0.0)) return;
    const bool last = to >= horizon_;
    while (next_ < to || (last && next_ <= horizon_)) {
      if (next_ >= from) snapshot(s, next_);
      ++k_;
      next_ = dt_ * static_cast<double>(k_);
    }
  }

  void event(const SystemState& s, const EventRecord& rec) override {
    if (count_++ % stride_ == 0) row(s, rec.time, to_string(rec.kind));
  }

  CsvTable table;
  CsvTable snapshots;

 private:
  void row(const SystemState& s, double t, const char* kind) {
    const Counters& c = s.counters();
    table.add_cells({format_double(t), kind, std::to_string(s.X()), std::to_string(s.nu().mass()),
                     std::to_string(s.eta().mass()), std::to_string(c.Q), std::to_string(c.R), std::to_string(c.S),
                     std::to_string(c.D), std::to_string(c.K), format_double(head_of_line_wait(s))});
  }

  void snapshot(const SystemState& s, double tau) {
    const auto emit = [&](const PointMeasure& m, const char* name) {
      std::vector<double> counts(edges_.size() - 1, 0.0);
      for (double key : m.keys()) {
        const double a = tau - key;
        if (a < edges_.front() || a >= edges_.back()) continue;
        const auto it = std::upper_bound(edges_.begin(), edges_.end(), a);
        counts[static_cast<std::size_t>(it - edges_.begin()) - 1] += 1.0;
      }
      for (std::size_t i = 0; i < counts.size(); ++i) {
        snapshots.add_cells({format_double(tau), name, format_double(edges_[i]), format_double(edges_[i + 1]),
                             format_double(counts[i])});
      }
    };
    emit(s.nu(), "nu");
    emit(s.eta(), "eta");
  }

  std::size_t stride_;
  double dt_;
  double horizon_;
  std::vector<double> edges_;
  std::uint64_t count_ = 0;
  std::uint64_t k_ = 0;
  double next_ = std::numeric_limits<double>::infinity();
};

int do_simulate(const ScenarioConfig& cfg, Emitter& out, unsigned /*threads*/) {
  const int n = single_n(cfg, "simulate");
  const ModelSpec model = cfg.model(n);
  const InitialCondition init = initial_for(cfg);
  const RunConfig& rc = cfg.run;
  const std::vector<double> edges = rc.snapshot_edges.empty() ? default_edges(cfg) : rc.snapshot_edges;

  ojson reps = ojson::array();
  std::uint64_t violations = 0;
  for (int r = 0; r < rc.replications; ++r) {
    const std::uint64_t rseed = replication_seed(out.seed(), static_cast<std::uint64_t>(r));
    SystemState state = init_state(model, init, rseed);
    TrajectoryRecorder rec(rc.trajectory_stride, rc.snapshot_dt, rc.horizon, edges);
    rec.initial(state);
    Observer* obs[] = {&rec};
    RunOptions ro;
    ro.audit = rc.audit;
    ro.max_events = rc.max_events;
    const RunResult res = run(state, rc.horizon, obs, ro);
    violations += res.audit_violations;

    const std::string suffix = rc.replications == 1 ? "" : "_" + std::to_string(r);
    out.csv("trajectory" + suffix + ".csv", rec.table);
    if (rc.snapshot_dt > 0.0) out.csv("snapshots" + suffix + ".csv", rec.snapshots);
    reps.push_back(ojson{{"replication", r},
                         {"replication_seed", rseed},
                         {"events", res.events},
                         {"trajectory_hash", hash_hex(res.trajectory_hash)},
                         {"audit_violations", res.audit_violations},
                         {"first_violation", res.first_violation},
                         {"final", ojson{{"time", state.clock()},
                                         {"X", state.X()},
                                         {"nu_mass", state.nu().mass()},
                                         {"eta_mass", state.eta().mass()},
                                         {"alpha_E", state.alpha_e()},
                                         {"chi", head_of_line_wait(state)},
                                         {"counters", counters_json(state.counters())}}}});
    out.note("replication " + std::to_string(r) + ": " + std::to_string(res.events) + " events, " +
             std::to_string(res.audit_violations) + " audit violations");
  }
  ojson j = out.header();
  j["servers"] = n;
  j["arrival_rate"] = cfg.rate_for(n);
  j["horizon"] = rc.horizon;
  j["audit"] = rc.audit;
  j["replications"] = reps;
  j["audit_violations"] = violations;
  out.json("summary.json", j);
  return violations == 0 ? kExitOk : kExitValidation;
}

FluidInput fluid_input(const ScenarioConfig& cfg, const FluidConfig& fc) {
  FluidInput in;
  in.lambda = fc.lambda;
  in.x0 = fc.x0;
  in.nu0 = fc.nu0;
  in.eta0 = fc.eta0;
  in.service = cfg.service;
  in.patience = cfg.patience;
  return in;
}

int do_fluid(const ScenarioConfig& cfg, Emitter& out) {
  if (!cfg.fluid) throw ConfigError("fluid: section required for the 'fluid' subcommand");
  const FluidConfig& fc = *cfg.fluid;
  const FluidTrajectory tr = solve_fluid(fluid_input(cfg, fc), fc.horizon, fc.delta);

  CsvTable t({"t", "X", "Q", "B", "K", "R", "eta_mass", "hs_nu"});
  for (std::size_t i = 0; i < tr.nodes(); ++i) {
    t.add_row({tr.t[i], tr.X[i], tr.Q[i], tr.B[i], tr.K[i], tr.R[i], tr.eta_mass[i], tr.hs_nu[i]});
  }
  out.csv("fluid_trajectory.csv", t);

  if (!fc.snapshot_times.empty()) {
    const std::vector<double> edges =
        fc.snapshot_edges.empty() ? uniform_edges(0.0, fc.horizon, 50) : fc.snapshot_edges;
    CsvTable s({"t", "measure", "bin_lo", "bin_hi", "mass"});
    for (double ts : fc.snapshot_times) {
      const auto n = std::min(static_cast<std::size_t>(std::llround(ts / tr.delta)), tr.nodes() - 1);
      const auto emit = [&](const char* name, auto cum) {
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
          // mass of (lo, hi]; the first bin also takes the atom at 0
          const double m = cum(n, edges[i + 1]) - (edges[i] <= 0.0 ? 0.0 : cum(n, edges[i]));
          s.add_cells({format_double(tr.t[n]), name, format_double(edges[i]), format_double(edges[i + 1]),
                       format_double(m)});
        }
      };
      emit("nu", [&](std::size_t k, double a) { return nu_cumulative(tr, k, a); });
      if (cfg.patience) emit("eta", [&](std::size_t k, double a) { return eta_cumulative(tr, k, a); });
    }
    out.csv("fluid_snapshots.csv", s);
  }

  const FluidDefects d = fluid_defects(tr);
  ojson j = out.header();
  j["lambda"] = fc.lambda;
  j["horizon"] = fc.horizon;
  j["delta"] = tr.delta;
  j["final"] = ojson{{"t", tr.t.back()}, {"X", tr.X.back()}, {"Q", tr.Q.back()}, {"B", tr.B.back()},
                     {"K", tr.K.back()}, {"R", tr.R.back()}, {"eta_mass", tr.eta_mass.back()},
                     {"hs_nu", tr.hs_nu.back()}};
  j["defects"] = ojson{{"non_idling", d.non_idling},
                       {"conservation", d.conservation},
                       {"queue_identity", d.queue_identity},
                       {"eta_bound", d.eta_bound},
                       {"departure_balance", d.departure_balance}};
  j["warnings"] = tr.warnings;
  out.json("fluid_summary.json", j);
  for (const auto& w : tr.warnings) out.note("warning: " + w);
  out.note("fluid: X(T)=" + format_double(tr.X.back()) + " Q(T)=" + format_double(tr.Q.back()));
  return kExitOk;
}

double invariant_lambda(const ScenarioConfig& cfg) {
  if (cfg.fluid) return cfg.fluid->lambda;
  return cfg.fluid_lambda();
}

int do_invariant(const ScenarioConfig& cfg, Emitter& out) {
  const double lambda = invariant_lambda(cfg);
  ojson j = out.header();
  j["lambda"] = lambda;
  if (!cfg.patience && lambda >= 1.0) {
    // Every x >= 1 is a fixed point: report the unbounded set.
    if (std::abs(cfg.service.mean() - 1.0) > 1e-9) {
      throw ConfigError("service: the invariant manifold assumes unit mean service time");
    }
    j["regime"] = regime_name(Regime::critical_or_super);
    j["b_l"] = 1.0;
    j["b_r"] = nullptr;
    j["unique"] = false;
    j["nu_mass"] = 1.0;
    j["eta_mass"] = nullptr;
    j["note"] = "non-unique/undefined: without abandonment every x >= 1 is invariant";
    out.json("invariant.json", j);
    out.note("invariant: non-unique, B = [1, inf)");
    return kExitOk;
  }
  const InvariantSet inv = invariant_manifold(lambda, cfg.service, cfg.patience);
  const bool unique = is_unique(inv);
  j["regime"] = regime_name(inv.regime);
  j["b_l"] = inv.b_l;
  j["b_r"] = inv.b_r;
  j["unique"] = unique;
  if (unique) j["x_star"] = 0.5 * (inv.b_l + inv.b_r);
  j["nu_mass"] = inv.nu_mass;
  j["eta_mass"] = finite_or_null(inv.eta_mass);
  out.json("invariant.json", j);
  out.note("invariant: B = [" + format_double(inv.b_l) + ", " + format_double(inv.b_r) + "]");
  return kExitOk;
}

StationaryOptions stationary_options(const RunConfig& rc, std::uint64_t seed, unsigned threads) {
  StationaryOptions o;
  o.horizon = rc.horizon;
  o.warmup = rc.warmup.value_or(-1.0);
  o.replications = rc.replications;
  o.seed = seed;
  o.batches = rc.batches;
  o.audit = rc.audit;
  o.max_events = rc.max_events;
  o.snapshot_dt = rc.snapshot_dt;
  o.tail_grid = rc.tail_grid;
  o.threads = threads;
  return o;
}

ojson estimate_json(const StationaryEstimate& e) {
  ojson tails = ojson::array();
  for (const auto& tp : e.tails) {
    tails.push_back(ojson{{"c", tp.c},
                          {"eta_tail", stat_json(tp.eta_tail)},
                          {"nu_tail", stat_json(tp.nu_tail)},
                          {"eta_residual", stat_json(tp.eta_residual)},
                          {"nu_residual", stat_json(tp.nu_residual)}});
  }
  ojson hashes = ojson::array();
  for (auto h : e.trajectory_hashes) hashes.push_back(hash_hex(h));
  return ojson{{"n_servers", e.n_servers},
               {"lambda_abs", e.lambda_abs},
               {"warmup", e.warmup},
               {"horizon", e.horizon},
               {"replications", e.replications},
               {"replication_seeds", e.replication_seeds},
               {"trajectory_hashes", hashes},
               {"x_bar", stat_json(e.x_bar)},
               {"nu_bar", stat_json(e.nu_bar)},
               {"eta_bar", stat_json(e.eta_bar)},
               {"tails", tails},
               {"events", e.events},
               {"audit_violations", e.audit_violations},
               {"first_violation", e.first_violation},
               {"states_ok", e.states_ok}};
}

int do_stationary(const ScenarioConfig& cfg, Emitter& out, unsigned threads) {
  const int n = single_n(cfg, "stationary");
  const StationaryEstimate est =
      estimate_stationary(cfg.model(n), initial_for(cfg), stationary_options(cfg.run, out.seed(), threads));

  CsvTable pmf({"k", "x_scaled", "probability"});
  for (std::size_t k = 0; k < est.x_pmf.size(); ++k) {
    pmf.add_row({static_cast<double>(k), static_cast<double>(k) / n, est.x_pmf[k]});
  }
  out.csv("x_pmf.csv", pmf);
  if (!est.tails.empty()) {
    CsvTable tails({"c", "eta_tail", "eta_tail_ci", "nu_tail", "nu_tail_ci", "eta_residual", "eta_residual_ci",
                    "nu_residual", "nu_residual_ci"});
    for (const auto& tp : est.tails) {
      tails.add_row({tp.c, tp.eta_tail.mean, tp.eta_tail.half_width, tp.nu_tail.mean, tp.nu_tail.half_width,
                     tp.eta_residual.mean, tp.eta_residual.half_width, tp.nu_residual.mean,
                     tp.nu_residual.half_width});
    }
    out.csv("tails.csv", tails);
  }
  ojson j = out.header();
  j["estimate"] = estimate_json(est);
  if (cfg.patience) {
    const double lbar = cfg.rate_for(n) / n;
    j["littles_law_deviation"] = littles_law_check(est, lbar, cfg.patience->mean());
  }
  out.json("stationary.json", j);
  out.note("stationary: X/N = " + format_double(est.x_bar.mean) + " +- " + format_double(est.x_bar.half_width));
  return est.audit_violations == 0 && est.states_ok ? kExitOk : kExitValidation;
}

int do_convergence(const ScenarioConfig& cfg, Emitter& out, unsigned threads) {
  if (cfg.servers_list.empty()) throw ConfigError("servers_list: 'convergence' needs a list of N values");
  if (!cfg.lambda_bar) throw ConfigError("arrival.lambda_bar: 'convergence' needs the rate-scaling rule");
  ScaledModel sm;
  sm.lambda_bar = *cfg.lambda_bar;
  sm.arrival_law = cfg.arrival_law;
  sm.service = cfg.service;
  sm.patience = cfg.patience;
  sm.stationary_arrivals = cfg.initial_kind == InitialKind::stationary;
  const int n0 = *std::min_element(cfg.servers_list.begin(), cfg.servers_list.end());
  const RunConfig& rc = cfg.run;
  const std::uint64_t root = out.seed();
  const auto options_for = [&](int n) {
    StationaryOptions o = stationary_options(rc, replication_seed(root, static_cast<std::uint64_t>(n)), threads);
    if (rc.scale_horizon) {
      const double f = static_cast<double>(n0) / n;
      o.horizon = rc.horizon * f;
      if (rc.warmup) o.warmup = *rc.warmup * f;
    }
    return o;
  };
  const ConvergenceReport rep = convergence_study(sm, cfg.servers_list, options_for);

  CsvTable t({"N", "lambda_abs", "estimate", "ci", "target", "distance", "eta_bar", "eta_ci", "littles_deviation",
              "events"});
  ojson rows = ojson::array();
  std::uint64_t violations = 0;
  for (const auto& r : rep.rows) {
    t.add_row({static_cast<double>(r.n_servers), r.estimate.lambda_abs, r.estimate.x_bar.mean,
               r.estimate.x_bar.half_width, r.x_target, r.x_distance, r.estimate.eta_bar.mean,
               r.estimate.eta_bar.half_width, r.littles_deviation, static_cast<double>(r.estimate.events)});
    ojson e = estimate_json(r.estimate);
    e["x_target"] = r.x_target;
    e["x_distance"] = r.x_distance;
    e["littles_deviation"] = r.littles_deviation;
    rows.push_back(e);
    violations += r.estimate.audit_violations;
    out.note("N=" + std::to_string(r.n_servers) + ": |X/N - x*| = " + format_double(r.x_distance));
  }
  out.csv("convergence.csv", t);
  ojson j = out.header();
  j["lambda_bar"] = sm.lambda_bar;
  j["invariant"] = ojson{{"regime", regime_name(rep.invariant.regime)},
                         {"b_l", rep.invariant.b_l},
                         {"b_r", rep.invariant.b_r}};
  j["monotone"] = rep.monotone;
  j["rows"] = rows;
  out.json("convergence.json", j);
  return violations == 0 ? kExitOk : kExitValidation;
}

int do_interchange(const ScenarioConfig& cfg, Emitter& out) {
  const double delta = cfg.fluid ? cfg.fluid->delta : 1e-3;
  const InterchangeReport rep = interchange_demo(cfg.interchange.servers_list, cfg.interchange.fluid_horizon, delta);
  CsvTable t({"N", "lambda_abs", "threshold", "tail_exact", "bound", "bound_holds", "mean_scaled", "w1_to_fluid"});
  ojson rows = ojson::array();
  for (const auto& r : rep.rows) {
    t.add_row({static_cast<double>(r.n_servers), r.lambda_abs, static_cast<double>(r.threshold), r.tail_exact, r.bound,
               r.tail_exact <= r.bound ? 1.0 : 0.0, r.mean_scaled, r.w1_to_fluid});
    rows.push_back(ojson{{"N", r.n_servers},
                         {"lambda_abs", r.lambda_abs},
                         {"threshold", r.threshold},
                         {"tail_exact", r.tail_exact},
                         {"bound", r.bound},
                         {"mean_scaled", r.mean_scaled},
                         {"w1_to_fluid", r.w1_to_fluid}});
  }
  out.csv("interchange.csv", t);
  ojson j = out.header();
  j["rows"] = rows;
  j["fluid_horizon"] = rep.fluid_horizon;
  j["fluid_sup_deviation"] = rep.fluid_sup_deviation;
  j["fluid_abandonment_deviation"] = rep.fluid_abandonment_deviation;
  j["bound_limit"] = rep.bound_limit;
  j["quoted_limit"] = rep.quoted_limit;
  j["w1_limit"] = rep.w1_limit;
  j["probability_gap"] = rep.probability_gap;
  j["min_w1"] = rep.min_w1;
  out.json("interchange.json", j);
  out.note("interchange: min E|X/N - 2| = " + format_double(rep.min_w1));
  return kExitOk;
}

int do_validate(Emitter& out, unsigned threads) {
  ValidationOptions vo;
  vo.seed = out.seed();
  vo.threads = threads;
  const auto results = run_acceptance(vo, [&](const CriterionResult& r) { out.note(format_result(r)); });
  ojson arr = ojson::array();
  bool all = true;
  for (const auto& r : results) {
    ojson metrics = ojson::array();
    for (const auto& m : r.metrics) {
      metrics.push_back(ojson{{"name", m.name}, {"value", finite_or_null(m.value)}, {"limit", finite_or_null(m.limit)}});
    }
    arr.push_back(ojson{{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"detail", r.detail}, {"metrics", metrics}});
    all = all && r.passed;
  }
  ojson j = out.header();
  j["passed"] = all;
  j["criteria"] = arr;
  out.json("acceptance.json", j);
  return all ? kExitOk : kExitValidation;
}

}  // namespace

std::optional<Subcommand> parse_subcommand(std::string_view name) {
  for (const auto& [s, n] : kNames) {
    if (name == n) return s;
  }
  return std::nullopt;
}

const char* to_string(Subcommand s) noexcept {
  for (const auto& [k, n] : kNames) {
    if (k == s) return n;
  }
  return "?";
}

std::vector<Subcommand> all_subcommands() {
  std::vector<Subcommand> v;
  for (const auto& [s, n] : kNames) v.push_back(s);
  return v;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, Subcommand sub, const RunContext& ctx) {
  ScenarioResult res;
  std::ostream& err = ctx.err ? *ctx.err : std::cerr;
  try {
    res.out_dir = resolve_output_dir(ctx.out_dir, cfg.output_dir);
    const std::uint64_t seed = ctx.seed.value_or(cfg.run.seed);
    const unsigned threads = std::max(1u, ctx.threads.value_or(cfg.run.threads));
    Emitter out(cfg, sub, seed, res.out_dir, ctx.quiet ? nullptr : ctx.log);
    try {
      switch (sub) {
        case Subcommand::simulate: res.exit_code = do_simulate(cfg, out, threads); break;
        case Subcommand::fluid: res.exit_code = do_fluid(cfg, out); break;
        case Subcommand::invariant: res.exit_code = do_invariant(cfg, out); break;
        case Subcommand::stationary: res.exit_code = do_stationary(cfg, out, threads); break;
        case Subcommand::convergence: res.exit_code = do_convergence(cfg, out, threads); break;
        case Subcommand::interchange: res.exit_code = do_interchange(cfg, out); break;
        case Subcommand::validate: res.exit_code = do_validate(out, threads); break;
      }
    } catch (...) {
      res.artifacts = out.artifacts;
      throw;
    }
    res.artifacts = out.artifacts;
    if (res.exit_code == kExitValidation) res.message = std::string(to_string(sub)) + ": checks failed";
  } catch (const ConfigError& e) {
    res.exit_code = kExitConfig;
    res.message = std::string("config error: ") + e.what();
  } catch (const std::invalid_argument& e) {
    res.exit_code = kExitConfig;
    res.message = std::string("invalid scenario: ") + e.what();
  } catch (const std::exception& e) {
    res.exit_code = kExitRuntime;
    res.message = std::string("runtime error: ") + e.what();
  }
  if (!res.message.empty()) err << res.message << '\n';
  return res;
}

}  // namespace manyq
