#include "manyq/validation.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "manyq/config.hpp"
#include "manyq/engine.hpp"
#include "manyq/fluid.hpp"
#include "manyq/invariant.hpp"
#include "manyq/mmn.hpp"
#include "manyq/output.hpp"
#include "manyq/point_measure.hpp"
#include "manyq/random.hpp"
#include "manyq/scenario.hpp"
#include "manyq/stationary.hpp"

namespace manyq {

namespace fs = std::filesystem;

namespace {

CriterionResult start(int id, std::string title) {
  CriterionResult r;
  r.id = id;
  r.title = std::move(title);
  r.passed = true;
  return r;
}

void judge(CriterionResult& r, std::string name, double value, const std::string& op, double limit) {
  bool ok = false;
  if (op == "<=") ok = value <= limit;
  else if (op == ">=") ok = value >= limit;
  else ok = value == limit;
  r.metrics.push_back({name, value, op, limit});
  if (!ok) {
    if (r.passed) r.detail = name + " = " + format_double(value) + " violates " + op + " " + format_double(limit);
    r.passed = false;
  }
}

void require(CriterionResult& r, bool ok, const std::string& what) {
  if (!ok) {
    if (r.passed) r.detail = what;
    r.passed = false;
  }
}

// Erlang(2, 2) service, everyone in service at age 0, no abandonment.
FluidInput erlang_example() {
  FluidInput in;
  in.lambda = 1.0;
  in.x0 = 1.0;
  in.service = Distribution::erlang(2, 2.0);
  in.nu0 = InitialMeasure::dirac(0.0, 1.0);
  return in;
}

// Same with initial ages spread over [0, 1/2] with density (1 + 2x) / (a + a^2).
FluidInput erlang_alpha_example() {
  FluidInput in = erlang_example();
  constexpr int cells = 500;
  constexpr double a = 0.5;
  std::vector<double> g(cells + 1);
  for (int i = 0; i <= cells; ++i) {
    const double x = a * i / cells;
    g[static_cast<std::size_t>(i)] = (1.0 + 2.0 * x) / (a + a * a);
  }
  in.nu0 = InitialMeasure::from_density(DensityMeasure::from_grid(std::move(g), a / cells));
  return in;
}

double erlang_q_error(const FluidTrajectory& tr) {
  double e = 0.0;
  for (std::size_t n = 0; n < tr.nodes(); ++n) {
    e = std::max(e, std::abs(tr.Q[n] - 0.25 * (1.0 - std::exp(-4.0 * tr.t[n]))));
  }
  return e;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

CriterionResult check_exact_identities(const ValidationOptions& opt) {
  CriterionResult r = start(1, "exact identities");
  struct Mix {
    const char* name;
    ModelSpec model;
    InitialCondition init;
    double rate;
  };
  std::vector<Mix> mixes;
  {
    Mix m{"M/M/20+M", {}, {}, 25.0};
    m.model.n_servers = 20;
    m.model.arrival = Distribution::exponential(25.0);
    m.model.service = Distribution::exponential(1.0);
    m.model.patience = Distribution::exponential(1.0);
    mixes.push_back(m);
  }
  {
    Mix m{"E2/E2/10+U", {}, {}, 12.0};
    m.model.n_servers = 10;
    m.model.arrival = Distribution::erlang(2, 24.0);
    m.model.service = Distribution::erlang(2, 2.0);
    m.model.patience = Distribution::uniform(0.0, 2.0);
    m.init.service_ages = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    m.init.queue_waits = {0.5, 0.2};
    m.init.extra_eta_ages = {0.7, 1.1};
    m.init.alpha_e = 0.05;
    mixes.push_back(m);
  }
  {
    Mix m{"U/PL/5+shifted", {}, {}, 6.0};
    m.model.n_servers = 5;
    m.model.arrival = Distribution::uniform(0.0, 1.0 / 3.0);
    m.model.service = Distribution::piecewise_linear({{0.0, 0.0}, {0.5, 0.3}, {2.0, 1.0}});
    m.model.patience = Distribution::shifted(0.2, Distribution::exponential(2.0));
    m.init.stationary_arrivals = true;
    mixes.push_back(m);
  }
  {
    Mix m{"M/E2/8", {}, {}, 7.0};
    m.model.n_servers = 8;
    m.model.arrival = Distribution::exponential(7.0);
    m.model.service = Distribution::erlang(2, 2.0);
    mixes.push_back(m);
  }

  constexpr int kSeeds = 5;
  constexpr double kArrivalsPerRun = 30000.0;
  std::uint64_t events = 0, violations = 0;
  int runs = 0;
  for (std::size_t i = 0; i < mixes.size(); ++i) {
    for (int s = 0; s < kSeeds; ++s) {
      const std::uint64_t seed = replication_seed(opt.seed ^ 0x1d, static_cast<std::uint64_t>(i * kSeeds + s));
      SystemState st = init_state(mixes[i].model, mixes[i].init, seed);
      RunOptions ro;
      ro.audit = true;
      const RunResult res = run(st, kArrivalsPerRun / mixes[i].rate, {}, ro);
      events += res.events;
      violations += res.audit_violations;
      if (res.audit_violations > 0) require(r, false, std::string(mixes[i].name) + ": " + res.first_violation);
      ++runs;
    }
  }
  judge(r, "events", static_cast<double>(events), ">=", 1e6);
  judge(r, "runs", runs, ">=", 20);
  judge(r, "violations", static_cast<double>(violations), "==", 0.0);
  return r;
}

CriterionResult check_erlang_fluid(const ValidationOptions&) {
  CriterionResult r = start(2, "Erlang fluid example");
  const FluidTrajectory tr = solve_fluid(erlang_example(), 10.0, 1e-3);
  double hs = 0.0;
  for (std::size_t n = 0; n < tr.nodes(); ++n) {
    hs = std::max(hs, std::abs(tr.hs_nu[n] - (1.0 - std::exp(-4.0 * tr.t[n]))));
  }
  judge(r, "sup|<h,nu> - (1 - e^-4t)|", hs, "<=", 5e-3);
  judge(r, "|Q(10) - 1/4|", std::abs(tr.Q.back() - 0.25), "<=", 1e-2);
  judge(r, "|X(10) - 5/4|", std::abs(tr.X.back() - 1.25), "<=", 1e-2);
  const FluidTrajectory ta = solve_fluid(erlang_alpha_example(), 10.0, 1e-3);
  judge(r, "alpha: |Q(10) - 1/12|", std::abs(ta.Q.back() - 1.0 / 12.0), "<=", 1e-2);
  return r;
}

CriterionResult check_renewal(const ValidationOptions&) {
  CriterionResult r = start(3, "renewal density oracle");
  const double delta = 1e-3;
  const std::vector<double> u = renewal_density(Distribution::erlang(2, 2.0), delta, 10000);
  double ue = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    ue = std::max(ue, std::abs(u[i] - (1.0 - std::exp(-4.0 * delta * static_cast<double>(i)))));
  }
  judge(r, "sup|u - (1 - e^-4t)|", ue, "<=", 1e-4);
  const FluidTrajectory tr = solve_fluid(erlang_example(), 10.0, delta);
  const std::vector<double> k = solve_K_renewal(tr);
  double kd = 0.0;
  for (std::size_t n = 0; n < tr.nodes(); ++n) kd = std::max(kd, std::abs(k[n] - tr.K[n]));
  judge(r, "sup|K_renewal - K_scheme|", kd, "<=", 5e-3);
  return r;
}

CriterionResult check_invariant_manifold(const ValidationOptions&) {
  CriterionResult r = start(4, "invariant manifold");
  const std::pair<double, double> cases[] = {{2.0, 1.0}, {1.5, 0.5}, {1.0, 1.0}};
  for (const auto& [lambda, gamma] : cases) {
    const Interval b = compute_B_lambda(Distribution::exponential(gamma), lambda, 1e-10);
    const double x = 1.0 + (lambda - 1.0) / gamma;
    std::ostringstream name;
    name << "lambda=" << lambda << " gamma=" << gamma << ": max|B - x*|";
    judge(r, name.str(), std::max(std::abs(b.lo - x), std::abs(b.hi - x)), "<=", 1e-8);
  }
  const Distribution flat = Distribution::piecewise_linear({{0.0, 0.0}, {1.0, 0.5}, {2.0, 0.5}, {3.0, 1.0}});
  const Interval b2 = compute_B_lambda(flat, 2.0, 1e-10);
  judge(r, "flat: |b_l - 5/2|", std::abs(b2.lo - 2.5), "<=", 1e-6);
  judge(r, "flat: |b_r - 7/2|", std::abs(b2.hi - 3.5), "<=", 1e-6);

  const double delta = 1e-3;
  const Distribution e1 = Distribution::exponential(1.0);
  const InvariantSet sub = invariant_manifold(0.5, e1, e1);
  judge(r, "fixed point defect, subcritical", verify_fixed_point(invariant_state(sub, 0.5), 20.0, delta).max(), "<=",
        10 * delta);
  const InvariantSet sup = invariant_manifold(2.0, e1, e1);
  judge(r, "fixed point defect, supercritical", verify_fixed_point(invariant_state(sup, 2.0), 20.0, delta).max(),
        "<=", 10 * delta);
  const Distribution er = Distribution::erlang(2, 2.0);
  const InvariantSet sue = invariant_manifold(2.0, er, er);
  judge(r, "fixed point defect, supercritical Erlang",
        verify_fixed_point(invariant_state(sue, sue.b_l), 20.0, delta).max(), "<=", 10 * delta);
  return r;
}

CriterionResult check_mmn(const ValidationOptions& opt) {
  CriterionResult r = start(5, "M/M/N stationary pmf");
  double worst = 0.0;
  const std::pair<int, double> cases[] = {{2, 1.0}, {10, 7.0}, {100, 95.0}, {1000, 999.0}};
  for (const auto& [n, lambda] : cases) {
    const auto kmax = static_cast<std::size_t>(3 * n + 1);
    const std::vector<double> p = mmn_stationary_pmf(n, lambda, kmax);
    for (std::size_t k = 0; k + 1 <= kmax; ++k) {
      const double lhs = lambda * p[k];
      const double rhs = std::min<double>(static_cast<double>(k + 1), n) * p[k + 1];
      // subnormal probabilities carry no relative precision
      if (p[k] >= 1e-300 && p[k + 1] >= 1e-300) worst = std::max(worst, std::abs(lhs - rhs) / lhs);
    }
  }
  judge(r, "detailed balance, max relative defect", worst, "<=", 1e-12);
  judge(r, "|p0(2, 1) - 1/3|", std::abs(mmn_p0(2, 1.0) - 1.0 / 3.0), "<=", 1e-15);

  ModelSpec m;
  m.n_servers = 2;
  m.arrival = Distribution::exponential(1.0);
  m.service = Distribution::exponential(1.0);
  StationaryOptions so;
  so.horizon = 5.05e6;
  so.audit = false;
  so.seed = replication_seed(opt.seed ^ 0x5, 0);
  so.max_events = 50'000'000;
  const StationaryEstimate est = estimate_stationary(m, InitialCondition{}, so);
  const std::size_t kmax = std::max(est.x_pmf.size(), mmn_truncation(2, 1.0));
  const std::vector<double> p = mmn_stationary_pmf(2, 1.0, kmax);
  double tv = 0.0;
  for (std::size_t k = 0; k <= kmax; ++k) tv += std::abs((k < est.x_pmf.size() ? est.x_pmf[k] : 0.0) - p[k]);
  tv = 0.5 * (tv + mmn_tail(2, 1.0, kmax + 1));
  judge(r, "M/M/2 events", static_cast<double>(est.events), ">=", 1e7);
  judge(r, "M/M/2 TV distance", tv, "<=", 0.01);
  return r;
}

CriterionResult check_representation(const ValidationOptions& opt) {
  CriterionResult r = start(6, "representation formula");
  ModelSpec m;
  m.n_servers = 10;
  m.arrival = Distribution::exponential(20.0);
  m.service = Distribution::exponential(1.0);
  m.patience = Distribution::exponential(1.0);
  const RepresentationReport rep =
      representation_check(m, {1.0, 2.0, 5.0}, {0.5, 1.5}, 10000, replication_seed(opt.seed ^ 0x6, 0), opt.threads);
  judge(r, "rows", static_cast<double>(rep.rows.size()), "==", 18.0);
  judge(r, "max |z|", rep.max_abs_z, "<=", 4.0);
  for (const auto& row : rep.rows) {
    if (std::abs(row.z) > 4.0) {
      std::ostringstream os;
      os << row.side << " f=" << row.f << " c=" << row.c << " t=" << row.t << " z=" << row.z;
      require(r, false, os.str());
    }
  }
  return r;
}

CriterionResult check_convergence(const ValidationOptions& opt) {
  CriterionResult r = start(7, "convergence to the invariant state");
  ScaledModel sm;
  sm.lambda_bar = 2.0;
  sm.patience = Distribution::exponential(1.0);
  const std::map<int, double> horizons{{10, 10000.0}, {50, 2000.0}, {200, 500.0}};
  const auto options_for = [&](int n) {
    StationaryOptions o;
    o.horizon = horizons.at(n);
    o.seed = replication_seed(opt.seed ^ 0x7, static_cast<std::uint64_t>(n));
    o.threads = opt.threads;
    return o;
  };
  const ConvergenceReport rep = convergence_study(sm, {10, 50, 200}, options_for);
  judge(r, "monotone up to CI overlap", rep.monotone ? 1.0 : 0.0, "==", 1.0);
  std::uint64_t violations = 0;
  for (const auto& row : rep.rows) {
    const std::string n = "N=" + std::to_string(row.n_servers);
    if (row.n_servers == 200) {
      judge(r, n + " |X/N - 2|", row.x_distance, "<=", 0.05);
    } else {
      r.metrics.push_back({n + " |X/N - 2|", row.x_distance, "", 0.0});
    }
    judge(r, n + " Little's law deviation", row.littles_deviation, "<=", 0.02);
    violations += row.estimate.audit_violations;
  }
  judge(r, "audit violations", static_cast<double>(violations), "==", 0.0);
  return r;
}

CriterionResult check_interchange(const ValidationOptions&) {
  CriterionResult r = start(8, "interchange of limits");
  const InterchangeReport rep = interchange_demo({10, 100, 1000});
  for (const auto& row : rep.rows) {
    judge(r, "N=" + std::to_string(row.n_servers) + " bound - P(X/N >= 3/2)", row.bound - row.tail_exact, ">=", 0.0);
  }
  judge(r, "fluid sup|X - 2|", rep.fluid_sup_deviation, "<=", 5e-3);
  judge(r, "fluid sup|X - 2| with patience > 3", rep.fluid_abandonment_deviation, "<=", 5e-3);
  judge(r, "min_N E|X/N - 2|", rep.min_w1, ">=", 0.4);
  r.metrics.push_back({"1 - P(X/N >= 3/2), largest N", rep.probability_gap, "", 0.0});
  r.metrics.push_back({"bound limit e^-1/2", rep.bound_limit, "", 0.0});
  r.metrics.push_back({"quoted limit e^-2", rep.quoted_limit, "", 0.0});
  return r;
}

namespace {

std::string repro_config(Subcommand s) {
  const std::string model =
      R"("service":{"kind":"erlang","shape":2,"rate":2},"patience":{"kind":"exponential","rate":1})";
  switch (s) {
    case Subcommand::simulate:
      return R"({"servers":5,"arrival":{"rate":6},)" + model + R"(,"run":{"horizon":50,"snapshot_dt":10}})";
    case Subcommand::fluid:
      return R"({"arrival":{"lambda_bar":1},"service":{"kind":"erlang","shape":2,"rate":2},"no_abandonment":true,)"
             R"("fluid":{"x0":1,"nu0":{"kind":"dirac","at":0,"mass":1},"horizon":2,"delta":0.01,"snapshot_times":[1,2]}})";
    case Subcommand::invariant:
      return R"({"arrival":{"lambda_bar":2},"patience":{"kind":"exponential","rate":1}})";
    case Subcommand::stationary:
      return R"({"servers":5,"arrival":{"rate":6},)" + model +
             R"(,"initial":{"kind":"stationary"},"run":{"horizon":200,"replications":2,"snapshot_dt":1,"tail_grid":[0.5,1],"threads":2}})";
    case Subcommand::convergence:
      return R"({"servers_list":[5,10],"arrival":{"lambda_bar":2},"patience":{"kind":"exponential","rate":1},)"
             R"("run":{"horizon":100}})";
    case Subcommand::interchange:
      return R"({"interchange":{"servers_list":[10,20],"fluid_horizon":2}})";
    case Subcommand::validate:
      break;
  }
  return "{}";
}

}  // namespace

CriterionResult check_properties(const ValidationOptions& opt) {
  CriterionResult r = start(9, "property suite");

  // Galois: quantile(q) <= x  <=>  q <= m[0, x], ties included.
  RandomStream rng(replication_seed(opt.seed ^ 0x9, 0));
  std::uint64_t galois_bad = 0, galois_checks = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto size = 1 + static_cast<std::size_t>(rng.uniform() * 40);
    const double grid = rng.uniform() < 0.5 ? 0.25 : 0.0;  // half the measures have ties
    std::vector<double> ages(size);
    for (double& a : ages) {
      a = rng.uniform() * 10.0;
      if (grid > 0.0) a = std::floor(a / grid) * grid;
    }
    PointMeasure m(ages);
    std::vector<double> xs = ages;
    for (int k = 0; k < 4; ++k) xs.push_back(rng.uniform() * 11.0);
    for (std::size_t q = 1; q <= size; ++q) {
      const double qx = m.quantile(static_cast<double>(q));
      for (double x : xs) {
        ++galois_checks;
        if ((qx <= x) != (static_cast<double>(q) <= static_cast<double>(m.count_at_most(x)))) ++galois_bad;
      }
    }
  }
  judge(r, "Galois violations", static_cast<double>(galois_bad), "==", 0.0);
  r.metrics.push_back({"Galois checks", static_cast<double>(galois_checks), "", 0.0});

  // Grid refinement against the analytic Erlang queue length.
  const double e1 = erlang_q_error(solve_fluid(erlang_example(), 10.0, 4e-3));
  const double e2 = erlang_q_error(solve_fluid(erlang_example(), 10.0, 2e-3));
  const double e3 = erlang_q_error(solve_fluid(erlang_example(), 10.0, 1e-3));
  judge(r, "refinement order 4e-3 -> 2e-3", std::log2(e1 / e2), ">=", 1.0);
  judge(r, "refinement order 2e-3 -> 1e-3", std::log2(e2 / e3), ">=", 1.0);

  // Every subcommand but validate, twice, byte for byte.
  const fs::path base = fs::temp_directory_path() / ("manyq-repro-" + hash_hex(mix64(opt.seed)));
  int mismatched = 0, compared = 0;
  for (Subcommand s : all_subcommands()) {
    if (s == Subcommand::validate) continue;
    const ScenarioConfig cfg = parse_config(repro_config(s));
    std::vector<std::vector<fs::path>> runs;
    for (const char* tag : {"a", "b"}) {
      RunContext ctx;
      ctx.out_dir = (base / tag / to_string(s)).string();
      ctx.seed = opt.seed;
      ctx.quiet = true;
      std::ostringstream err;
      ctx.err = &err;
      const ScenarioResult res = run_scenario(cfg, s, ctx);
      require(r, res.exit_code == kExitOk, std::string(to_string(s)) + ": " + err.str());
      runs.push_back(res.artifacts);
    }
    if (runs[0].size() != runs[1].size() || runs[0].empty()) {
      ++mismatched;
      require(r, false, std::string(to_string(s)) + ": artifact lists differ");
      continue;
    }
    for (std::size_t i = 0; i < runs[0].size(); ++i) {
      ++compared;
      if (slurp(runs[0][i]) != slurp(runs[1][i])) {
        ++mismatched;
        require(r, false, runs[0][i].filename().string() + " differs between reruns");
      }
    }
  }
  std::error_code ec;
  fs::remove_all(base, ec);
  judge(r, "artifacts compared", compared, ">=", 6.0);
  judge(r, "artifacts differing on rerun", mismatched, "==", 0.0);
  return r;
}

std::vector<std::pair<int, CriterionFn>> acceptance_criteria() {
  return {{1, &check_exact_identities}, {2, &check_erlang_fluid},  {3, &check_renewal},
          {4, &check_invariant_manifold}, {5, &check_mmn},          {6, &check_representation},
          {7, &check_convergence},        {8, &check_interchange}, {9, &check_properties}};
}

std::vector<CriterionResult> run_acceptance(const ValidationOptions& opt,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  static const char* const titles[] = {"",
                                       "exact identities",
                                       "Erlang fluid example",
                                       "renewal density oracle",
                                       "invariant manifold",
                                       "M/M/N stationary pmf",
                                       "representation formula",
                                       "convergence to the invariant state",
                                       "interchange of limits",
                                       "property suite"};
  std::vector<CriterionResult> out;
  for (const auto& [id, fn] : acceptance_criteria()) {
    CriterionResult r;
    try {
      r = fn(opt);
    } catch (const std::exception& e) {
      r = start(id, titles[id]);
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.title;
  for (const auto& m : r.metrics) {
    os << " | " << m.name << " = " << format_double(m.value);
    if (!m.op.empty()) os << " (" << m.op << ' ' << format_double(m.limit) << ')';
  }
  if (!r.passed && !r.detail.empty()) os << " | " << r.detail;
  return os.str();
}

}  // namespace manyq
