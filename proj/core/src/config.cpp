#include "manyq/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "manyq/errors.hpp"

namespace manyq {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

// Strict view of one JSON object: every key must be consumed.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail(sub(key), "is required");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) fail(sub(key), "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(sub(key), "must be finite");
    return d;
  }
  double number(const std::string& key, double dflt) { return has(key) ? number(key) : (seen_.insert(key), dflt); }

  double positive(const std::string& key) {
    const double d = number(key);
    if (!(d > 0.0)) fail(sub(key), "must be > 0");
    return d;
  }
  double positive(const std::string& key, double dflt) { return has(key) ? positive(key) : dflt; }
  double nonnegative(const std::string& key, double dflt) {
    if (!has(key)) return dflt;
    const double d = number(key);
    if (!(d >= 0.0)) fail(sub(key), "must be >= 0");
    return d;
  }

  long long integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(sub(key), "must be an integer");
    return v.get<long long>();
  }
  long long integer(const std::string& key, long long dflt) { return has(key) ? integer(key) : dflt; }

  std::uint64_t u64(const std::string& key, std::uint64_t dflt) {
    if (!has(key)) return dflt;
    const json& v = raw(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
    fail(sub(key), "must be a nonnegative integer");
  }

  bool boolean(const std::string& key, bool dflt) {
    if (!has(key)) return dflt;
    const json& v = raw(key);
    if (!v.is_boolean()) fail(sub(key), "must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) fail(sub(key), "must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    if (!has(key)) return {};
    const json& v = raw(key);
    if (!v.is_array()) fail(sub(key), "must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(sub(key), "must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::pair<double, double>> pairs(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) fail(sub(key), "must be an array of [x, y] pairs");
    std::vector<std::pair<double, double>> out;
    for (const auto& e : v) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
        fail(sub(key), "must be an array of [x, y] pairs");
      }
      out.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    return out;
  }

  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(sub(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Distribution distribution_from(const json& j, const std::string& path) {
  Fields f(j, path);
  const std::string kind = f.string("kind");
  try {
    Distribution d = Distribution::exponential(1.0);
    if (kind == "exponential") {
      d = Distribution::exponential(f.number("rate"));
    } else if (kind == "erlang") {
      const long long shape = f.integer("shape");
      if (shape < 1 || shape > 1000) fail(f.sub("shape"), "must be in [1, 1000]");
      d = Distribution::erlang(static_cast<int>(shape), f.number("rate"));
    } else if (kind == "uniform") {
      d = Distribution::uniform(f.number("a"), f.number("b"));
    } else if (kind == "piecewise") {
      d = Distribution::piecewise_linear(f.pairs("knots"));
    } else if (kind == "shifted") {
      const double offset = f.number("offset");
      d = Distribution::shifted(offset, distribution_from(f.raw("inner"), f.sub("inner")));
    } else if (kind == "deterministic") {
      fail(f.sub("kind"), "deterministic laws have no density and are not supported");
    } else {
      fail(f.sub("kind"), "unknown distribution kind '" + kind + "'");
    }
    f.finish();
    return d;
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

InitialMeasure measure_from(const json& j, const std::string& path, const Distribution& service,
                            const std::optional<Distribution>& patience) {
  Fields f(j, path);
  const std::string kind = f.string("kind");
  InitialMeasure m;
  try {
    if (kind == "zero") {
    } else if (kind == "dirac") {
      m = InitialMeasure::dirac(f.nonnegative("at", 0.0), f.nonnegative("mass", 1.0));
    } else if (kind == "atoms") {
      for (const auto& [x, w] : f.pairs("atoms")) {
        if (!(x >= 0.0) || !(w >= 0.0)) fail(f.sub("atoms"), "positions and masses must be >= 0");
        m.atoms.push_back({x, w});
      }
    } else if (kind == "equilibrium") {
      const json& law = f.raw("law");
      Distribution d = Distribution::exponential(1.0);
      if (law.is_string() && law.get<std::string>() == "service") {
        d = service;
      } else if (law.is_string() && law.get<std::string>() == "patience") {
        if (!patience) fail(f.sub("law"), "'patience' used without a patience law");
        d = *patience;
      } else if (law.is_object()) {
        d = distribution_from(law, f.sub("law"));
      } else {
        fail(f.sub("law"), "must be \"service\", \"patience\" or a distribution");
      }
      m = InitialMeasure::from_density(equilibrium_measure(d, f.nonnegative("scale", 1.0)));
    } else if (kind == "density") {
      // Piecewise-linear density through the knots, zero beyond the last one,
      // tabulated with the given step.
      const auto knots = f.pairs("knots");
      const double step = f.positive("step", 1e-3);
      if (knots.size() < 2 || knots.front().first != 0.0) fail(f.sub("knots"), "need >= 2 knots starting at x = 0");
      for (std::size_t i = 0; i < knots.size(); ++i) {
        if (knots[i].second < 0.0) fail(f.sub("knots"), "density values must be >= 0");
        if (i > 0 && !(knots[i].first > knots[i - 1].first)) fail(f.sub("knots"), "x values must increase");
      }
      const double end = knots.back().first;
      const auto cells = static_cast<std::size_t>(std::llround(end / step));
      if (cells < 1 || std::abs(static_cast<double>(cells) * step - end) > 1e-9 * end) {
        fail(f.sub("step"), "must divide the last knot position");
      }
      std::vector<double> grid(cells + 1);
      std::size_t k = 0;
      for (std::size_t i = 0; i <= cells; ++i) {
        const double x = i == cells ? end : step * static_cast<double>(i);
        while (k + 2 < knots.size() && x > knots[k + 1].first) ++k;
        const double w = (x - knots[k].first) / (knots[k + 1].first - knots[k].first);
        grid[i] = (1.0 - w) * knots[k].second + w * knots[k + 1].second;
      }
      m = InitialMeasure::from_density(DensityMeasure::from_grid(std::move(grid), step));
    } else {
      fail(f.sub("kind"), "unknown measure kind '" + kind + "'");
    }
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
  f.finish();
  return m;
}

std::vector<int> server_list(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "must be a nonempty array of positive integers");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer() || e.get<long long>() < 1 || e.get<long long>() > 10'000'000) {
      fail(path, "must be a nonempty array of positive integers");
    }
    out.push_back(static_cast<int>(e.get<long long>()));
  }
  return out;
}

std::vector<double> ages(Fields& f, const std::string& key) {
  std::vector<double> v = f.numbers(key);
  for (double a : v) {
    if (!(a >= 0.0) || !std::isfinite(a)) fail(f.sub(key), "ages must be finite and >= 0");
  }
  return v;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double ScenarioConfig::rate_for(int n) const {
  if (arrival_rate) return *arrival_rate;
  if (!lambda_bar) throw ConfigError("arrival: neither lambda_bar nor rate given");
  const long r = std::lround(*lambda_bar * n);
  if (r < 1) throw ConfigError("arrival.lambda_bar: round(lambda_bar * N) must be >= 1");
  return static_cast<double>(r);
}

ModelSpec ScenarioConfig::model(int n) const {
  ModelSpec m;
  m.n_servers = n;
  m.arrival = arrival_law.scaled(1.0 / (rate_for(n) * arrival_law.mean()));
  m.service = service;
  m.patience = patience;
  return m;
}

double ScenarioConfig::fluid_lambda() const {
  if (lambda_bar) return *lambda_bar;
  if (arrival_rate && servers) return *arrival_rate / *servers;
  return 1.0;
}

ScenarioConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ScenarioConfig cfg;
  cfg.canonical = doc.dump();
  cfg.hash = fnv1a(cfg.canonical);
  Fields top(doc, "");

  if (top.has("servers") && top.has("servers_list")) fail("servers", "give either servers or servers_list, not both");
  if (top.has("servers")) {
    const long long n = top.integer("servers");
    if (n < 1 || n > 10'000'000) fail("servers", "must be a positive integer");
    cfg.servers = static_cast<int>(n);
  }
  if (top.has("servers_list")) cfg.servers_list = server_list(top.raw("servers_list"), "servers_list");

  if (top.has("arrival")) {
    Fields a(top.raw("arrival"), "arrival");
    if (a.has("law")) cfg.arrival_law = distribution_from(a.raw("law"), "arrival.law");
    if (a.has("lambda_bar") == a.has("rate")) fail("arrival", "give exactly one of lambda_bar and rate");
    if (a.has("lambda_bar")) cfg.lambda_bar = a.positive("lambda_bar");
    if (a.has("rate")) cfg.arrival_rate = a.positive("rate");
    a.finish();
  }
  if (top.has("service")) cfg.service = distribution_from(top.raw("service"), "service");

  const bool has_pat = top.has("patience");
  const bool no_ab = top.boolean("no_abandonment", false);
  if (has_pat && no_ab) fail("patience", "patience and no_abandonment are mutually exclusive");
  if (top.has("no_abandonment") && !no_ab && !has_pat) fail("no_abandonment", "false requires a patience law");
  if (has_pat) cfg.patience = distribution_from(top.raw("patience"), "patience");

  if (top.has("initial")) {
    Fields in(top.raw("initial"), "initial");
    const std::string kind = in.string("kind");
    if (kind == "empty") {
      cfg.initial_kind = InitialKind::empty;
    } else if (kind == "stationary") {
      cfg.initial_kind = InitialKind::stationary;
      cfg.initial.stationary_arrivals = true;
    } else if (kind == "explicit") {
      cfg.initial_kind = InitialKind::explicit_state;
      cfg.initial.service_ages = ages(in, "service_ages");
      cfg.initial.queue_waits = ages(in, "queue_waits");
      cfg.initial.extra_eta_ages = ages(in, "extra_eta_ages");
      cfg.initial.alpha_e = in.nonnegative("alpha_e", 0.0);
    } else {
      fail("initial.kind", "must be empty, explicit or stationary");
    }
    in.finish();
  }

  if (top.has("run")) {
    Fields r(top.raw("run"), "run");
    RunConfig& rc = cfg.run;
    rc.horizon = r.positive("horizon", rc.horizon);
    if (r.has("warmup")) {
      rc.warmup = r.nonnegative("warmup", 0.0);
      if (!(*rc.warmup < rc.horizon)) fail("run.warmup", "must be < run.horizon");
    }
    const long long reps = r.integer("replications", 1);
    if (reps < 1) fail("run.replications", "must be >= 1");
    rc.replications = static_cast<int>(reps);
    rc.seed = r.u64("seed", rc.seed);
    rc.audit = r.boolean("audit", rc.audit);
    rc.max_events = r.u64("max_events", rc.max_events);
    const long long batches = r.integer("batches", rc.batches);
    if (batches < 2) fail("run.batches", "must be >= 2");
    rc.batches = static_cast<int>(batches);
    rc.snapshot_dt = r.nonnegative("snapshot_dt", 0.0);
    rc.tail_grid = r.numbers("tail_grid");
    for (double c : rc.tail_grid) {
      if (!(c >= 0.0)) fail("run.tail_grid", "values must be >= 0");
    }
    rc.snapshot_edges = r.numbers("snapshot_edges");
    if (rc.snapshot_edges.size() == 1) fail("run.snapshot_edges", "needs at least 2 edges");
    for (std::size_t i = 1; i < rc.snapshot_edges.size(); ++i) {
      if (!(rc.snapshot_edges[i] > rc.snapshot_edges[i - 1])) fail("run.snapshot_edges", "must increase");
    }
    const long long stride = r.integer("trajectory_stride", 1);
    if (stride < 1) fail("run.trajectory_stride", "must be >= 1");
    rc.trajectory_stride = static_cast<std::size_t>(stride);
    rc.scale_horizon = r.boolean("scale_horizon", false);
    const long long threads = r.integer("threads", 1);
    if (threads < 1 || threads > 1024) fail("run.threads", "must be in [1, 1024]");
    rc.threads = static_cast<unsigned>(threads);
    r.finish();
  }

  if (top.has("fluid")) {
    Fields fl(top.raw("fluid"), "fluid");
    FluidConfig fc;
    fc.lambda = fl.has("lambda") ? fl.nonnegative("lambda", 0.0) : cfg.fluid_lambda();
    fc.x0 = fl.nonnegative("x0", 0.0);
    if (!fl.has("x0")) fail("fluid.x0", "is required");
    if (fl.has("nu0")) fc.nu0 = measure_from(fl.raw("nu0"), "fluid.nu0", cfg.service, cfg.patience);
    if (fl.has("eta0")) fc.eta0 = measure_from(fl.raw("eta0"), "fluid.eta0", cfg.service, cfg.patience);
    fc.horizon = fl.positive("horizon", fc.horizon);
    fc.delta = fl.positive("delta", fc.delta);
    if (fc.delta > fc.horizon) fail("fluid.delta", "must be <= fluid.horizon");
    fc.snapshot_times = fl.numbers("snapshot_times");
    for (double t : fc.snapshot_times) {
      if (!(t >= 0.0 && t <= fc.horizon)) fail("fluid.snapshot_times", "must lie in [0, horizon]");
    }
    fc.snapshot_edges = fl.numbers("snapshot_edges");
    for (std::size_t i = 1; i < fc.snapshot_edges.size(); ++i) {
      if (!(fc.snapshot_edges[i] > fc.snapshot_edges[i - 1])) fail("fluid.snapshot_edges", "must increase");
    }
    if (fc.snapshot_edges.size() == 1) fail("fluid.snapshot_edges", "needs at least 2 edges");
    fl.finish();
    FluidInput probe;
    probe.lambda = fc.lambda;
    probe.x0 = fc.x0;
    probe.nu0 = fc.nu0;
    probe.eta0 = fc.eta0;
    probe.service = cfg.service;
    probe.patience = cfg.patience;
    try {
      validate_fluid_input(probe);
    } catch (const std::invalid_argument& e) {
      fail("fluid", e.what());
    }
    cfg.fluid = std::move(fc);
  }

  if (top.has("interchange")) {
    Fields ic(top.raw("interchange"), "interchange");
    if (ic.has("servers_list")) cfg.interchange.servers_list = server_list(ic.raw("servers_list"), "interchange.servers_list");
    for (int n : cfg.interchange.servers_list) {
      if (n < 2) fail("interchange.servers_list", "needs N >= 2");
    }
    cfg.interchange.fluid_horizon = ic.positive("fluid_horizon", cfg.interchange.fluid_horizon);
    ic.finish();
  }

  if (top.has("output")) {
    Fields o(top.raw("output"), "output");
    if (o.has("dir")) cfg.output_dir = o.string("dir");
    o.finish();
  }
  top.finish();

  if (cfg.initial_kind == InitialKind::explicit_state) {
    if (!cfg.servers) fail("initial", "an explicit initial state needs a single 'servers' value");
    try {
      init_state(cfg.model(*cfg.servers), cfg.initial, 0);
    } catch (const std::invalid_argument& e) {
      fail("initial", e.what());
    } catch (const ConfigError& e) {
      fail("initial", e.what());
    }
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

Distribution parse_distribution(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("distribution is not valid JSON: ") + e.what());
  }
  return distribution_from(j, "distribution");
}

}  // namespace manyq
