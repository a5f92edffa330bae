#include "manyq/stationary.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "manyq/mmn.hpp"

namespace manyq {

namespace {

// Runs body(i) for i in [0, count) on up to `threads` workers. Results are
// written by index, so the outcome does not depend on scheduling.
template <class Body>
void parallel_for(int count, unsigned threads, Body body) {
  const unsigned workers = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max(count, 1))));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(count, 0)));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Means of `groups` consecutive runs of samples.
std::vector<double> group_means(const std::vector<double>& v, int groups) {
  if (v.empty()) return {};
  const auto g = static_cast<std::size_t>(std::max(1, groups));
  if (v.size() < g) return v;
  std::vector<double> out;
  out.reserve(g);
  for (std::size_t i = 0; i < g; ++i) {
    const std::size_t lo = i * v.size() / g;
    const std::size_t hi = (i + 1) * v.size() / g;
    out.push_back(std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(lo), v.begin() + static_cast<std::ptrdiff_t>(hi), 0.0) /
                  static_cast<double>(hi - lo));
  }
  return out;
}

struct SnapshotSeries {
  std::vector<double> eta_tail, nu_tail, eta_first, nu_first;
};

class StationaryCollector final : public Observer {
 public:
  StationaryCollector(const ModelSpec& model, const StationaryOptions& opt)
      : model_(model),
        n_(static_cast<double>(model.n_servers)),
        warmup_(opt.effective_warmup()),
        horizon_(opt.horizon),
        batch_len_((opt.horizon - opt.effective_warmup()) / opt.batches),
        bx_(static_cast<std::size_t>(opt.batches), 0.0),
        bnu_(bx_),
        beta_(bx_),
        grid_(opt.tail_grid),
        series_(grid_.size()),
        snap_dt_(opt.snapshot_dt) {
    const double cmax = grid_.empty() ? 0.0 : *std::max_element(grid_.begin(), grid_.end());
    last_snap_ = horizon_ - cmax;
    next_snap_ = warmup_;
  }

  void advance(const SystemState& s, double from, double to) override {
    const double a = std::max(from, warmup_);
    const double b = std::min(to, horizon_);
    if (b > a) {
      const auto x = static_cast<double>(s.X());
      const auto nu = static_cast<double>(s.nu().mass());
      const auto eta = static_cast<double>(s.eta().mass());
      double lo = a;
      while (lo < b) {
        auto i = static_cast<std::size_t>((lo - warmup_) / batch_len_);
        i = std::min(i, bx_.size() - 1);
        const double end = i + 1 == bx_.size() ? b : std::min(b, warmup_ + batch_len_ * static_cast<double>(i + 1));
        const double dt = end - lo;
        bx_[i] += x * dt;
        bnu_[i] += nu * dt;
        beta_[i] += eta * dt;
        lo = end <= lo ? b : end;
      }
      const auto k = static_cast<std::size_t>(s.X());
      if (pmf_.size() <= k) pmf_.resize(k + 1, 0.0);
      pmf_[k] += b - a;
    }
    if (snap_dt_ > 0.0 && !grid_.empty()) {
      while (next_snap_ < to && next_snap_ <= last_snap_) {
        if (next_snap_ >= from) snapshot(s, next_snap_);
        next_snap_ += snap_dt_;
      }
    }
  }

  void event(const SystemState& s, const EventRecord& rec) override {
    const auto nu = static_cast<std::int64_t>(s.nu().mass());
    if (nu > s.n_servers() || s.X() < nu) states_ok_ = false;
    if (rec.time > warmup_ && rec.time <= horizon_) {
      if (rec.kind == EventKind::arrival) arrivals_.push_back(rec.time);
      if (rec.any_entry) entries_.push_back(rec.time);
    }
  }

  struct Output {
    std::vector<double> bx, bnu, beta, pmf;
    std::vector<std::vector<double>> eta_tail, nu_tail, eta_res, nu_res;
    bool states_ok = true;
  };

  Output finish() const {
    Output o;
    for (std::size_t i = 0; i < bx_.size(); ++i) {
      const double lo = warmup_ + batch_len_ * static_cast<double>(i);
      const double hi = i + 1 == bx_.size() ? horizon_ : lo + batch_len_;
      const double len = (hi - lo) * n_;
      o.bx.push_back(bx_[i] / len);
      o.bnu.push_back(bnu_[i] / len);
      o.beta.push_back(beta_[i] / len);
    }
    o.pmf = pmf_;
    o.states_ok = states_ok_;
    const std::size_t nc = grid_.size();
    o.eta_tail.resize(nc);
    o.nu_tail.resize(nc);
    o.eta_res.resize(nc);
    o.nu_res.resize(nc);
    for (std::size_t j = 0; j < nc; ++j) {
      const double c = grid_[j];
      const SnapshotSeries& ser = series_[j];
      o.eta_tail[j] = ser.eta_tail;
      o.nu_tail[j] = ser.nu_tail;
      for (std::size_t k = 0; k < snap_times_.size(); ++k) {
        const double tau = snap_times_[k];
        if (model_.patience) {
          const double second = window_sum(arrivals_, tau, c, *model_.patience);
          o.eta_res[j].push_back(ser.eta_tail[k] - ser.eta_first[k] - second / n_);
        }
        const double second_nu = window_sum(entries_, tau, c, model_.service);
        o.nu_res[j].push_back(ser.nu_tail[k] - ser.nu_first[k] - second_nu / n_);
      }
    }
    return o;
  }

 private:
  // sum over s in (tau, tau + c] of S(2c - (s - tau)).
  static double window_sum(const std::vector<double>& log, double tau, double c, const Distribution& law) {
    auto it = std::upper_bound(log.begin(), log.end(), tau);
    double sum = 0.0;
    for (; it != log.end() && *it <= tau + c; ++it) sum += law.survival(2.0 * c - (*it - tau));
    return sum;
  }

  static double survival_ratio_sum(const PointMeasure& m, double tau, double shift, const Distribution& law) {
    double sum = 0.0;
    for (double key : m.keys()) {
      const double age = tau - key;
      const double s0 = law.survival(age);
      if (s0 > 0.0) sum += law.survival(age + shift) / s0;
    }
    return sum;
  }

  void snapshot(const SystemState& s, double tau) {
    snap_times_.push_back(tau);
    for (std::size_t j = 0; j < grid_.size(); ++j) {
      const double c = grid_[j];
      SnapshotSeries& ser = series_[j];
      // atoms with age tau - key >= c, i.e. key <= tau - c
      const auto count_old = [&](const PointMeasure& m) {
        const auto keys = m.keys();
        return static_cast<double>(std::upper_bound(keys.begin(), keys.end(), tau - c) - keys.begin());
      };
      ser.eta_tail.push_back(count_old(s.eta()) / n_);
      ser.nu_tail.push_back(count_old(s.nu()) / n_);
      ser.eta_first.push_back(model_.patience ? survival_ratio_sum(s.eta(), tau, 2.0 * c, *model_.patience) / n_ : 0.0);
      ser.nu_first.push_back(survival_ratio_sum(s.nu(), tau, 2.0 * c, model_.service) / n_);
    }
  }

  const ModelSpec& model_;
  double n_;
  double warmup_, horizon_, batch_len_;
  std::vector<double> bx_, bnu_, beta_, pmf_;
  std::vector<double> grid_;
  std::vector<SnapshotSeries> series_;
  std::vector<double> snap_times_;
  std::vector<double> arrivals_, entries_;
  double snap_dt_;
  double next_snap_ = 0.0;
  double last_snap_ = 0.0;
  bool states_ok_ = true;
};

}  // namespace

long ScaledModel::arrival_rate(int n_servers) const {
  const long r = std::lround(lambda_bar * n_servers);
  if (r < 1) throw std::invalid_argument("round(lambda_bar * N) must be at least 1");
  return r;
}

ModelSpec ScaledModel::model(int n_servers) const {
  ModelSpec m;
  m.n_servers = n_servers;
  const double rate = static_cast<double>(arrival_rate(n_servers));
  m.arrival = arrival_law.scaled(1.0 / (rate * arrival_law.mean()));
  m.service = service;
  m.patience = patience;
  return m;
}

Statistic summarize(const std::vector<double>& v) {
  Statistic s;
  s.samples = v.size();
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 2) return s;
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  const boost::math::students_t dist(static_cast<double>(v.size() - 1));
  s.half_width = boost::math::quantile(dist, 0.975) * sd / std::sqrt(static_cast<double>(v.size()));
  return s;
}

StationaryEstimate estimate_stationary(const ModelSpec& model, const InitialCondition& initial,
                                       const StationaryOptions& opt) {
  if (opt.replications < 1) throw std::invalid_argument("need at least one replication");
  if (opt.batches < 2) throw std::invalid_argument("batch means need at least 2 batches");
  const double warmup = opt.effective_warmup();
  if (!(warmup >= 0.0) || !(warmup < opt.horizon)) throw std::invalid_argument("warmup must lie in [0, horizon)");
  for (double c : opt.tail_grid) {
    if (!(c >= 0.0) || !(c < opt.horizon - warmup)) throw std::invalid_argument("tail grid values must lie in [0, horizon - warmup)");
  }

  const auto reps = static_cast<std::size_t>(opt.replications);
  std::vector<StationaryCollector::Output> outs(reps);
  std::vector<RunResult> results(reps);
  StationaryEstimate est;
  est.n_servers = model.n_servers;
  est.lambda_abs = 1.0 / model.arrival.mean();
  est.warmup = warmup;
  est.horizon = opt.horizon;
  est.replications = opt.replications;
  for (std::size_t r = 0; r < reps; ++r) est.replication_seeds.push_back(replication_seed(opt.seed, r));

  parallel_for(opt.replications, opt.threads, [&](int i) {
    const auto r = static_cast<std::size_t>(i);
    SystemState state = init_state(model, initial, est.replication_seeds[r]);
    StationaryCollector collector(model, opt);
    Observer* obs[] = {&collector};
    RunOptions ro;
    ro.audit = opt.audit;
    ro.max_events = opt.max_events;
    results[r] = run(state, opt.horizon, obs, ro);
    outs[r] = collector.finish();
  });

  std::vector<double> bx, bnu, beta;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto& o = outs[r];
    bx.insert(bx.end(), o.bx.begin(), o.bx.end());
    bnu.insert(bnu.end(), o.bnu.begin(), o.bnu.end());
    beta.insert(beta.end(), o.beta.begin(), o.beta.end());
    if (est.x_pmf.size() < o.pmf.size()) est.x_pmf.resize(o.pmf.size(), 0.0);
    for (std::size_t k = 0; k < o.pmf.size(); ++k) est.x_pmf[k] += o.pmf[k];
    est.states_ok = est.states_ok && o.states_ok;
    est.events += results[r].events;
    if (results[r].audit_violations > 0 && est.audit_violations == 0) est.first_violation = results[r].first_violation;
    est.audit_violations += results[r].audit_violations;
    est.trajectory_hashes.push_back(results[r].trajectory_hash);
  }
  est.x_bar = summarize(bx);
  est.nu_bar = summarize(bnu);
  est.eta_bar = summarize(beta);
  const double total = std::accumulate(est.x_pmf.begin(), est.x_pmf.end(), 0.0);
  if (total > 0.0) {
    for (double& p : est.x_pmf) p /= total;
  }

  for (std::size_t j = 0; j < opt.tail_grid.size(); ++j) {
    if (!(opt.snapshot_dt > 0.0)) break;
    TailPoint tp;
    tp.c = opt.tail_grid[j];
    std::vector<double> et, nt, er, nr;
    for (const auto& o : outs) {
      for (double v : group_means(o.eta_tail[j], opt.batches)) et.push_back(v);
      for (double v : group_means(o.nu_tail[j], opt.batches)) nt.push_back(v);
      for (double v : group_means(o.eta_res[j], opt.batches)) er.push_back(v);
      for (double v : group_means(o.nu_res[j], opt.batches)) nr.push_back(v);
    }
    tp.eta_tail = summarize(et);
    tp.nu_tail = summarize(nt);
    tp.eta_residual = summarize(er);
    tp.nu_residual = summarize(nr);
    est.tails.push_back(tp);
  }
  return est;
}

double littles_law_check(const StationaryEstimate& est, double lambda_bar, double theta_r) {
  const double target = lambda_bar * theta_r;
  return std::abs(est.eta_bar.mean - target) / target;
}

namespace {

double mean_measure_formula(const InitialMeasure& m0, const std::function<double(double)>& driver, const Distribution& law,
                            const std::function<double(double)>& f, double t, std::size_t steps) {
  if (!(t >= 0.0)) throw std::invalid_argument("time must be >= 0");
  double init = 0.0;
  for (const Atom& a : m0.atoms) {
    const double s0 = law.survival(a.position);
    if (s0 > 0.0) init += a.mass * f(a.position + t) * law.survival(a.position + t) / s0;
  }
  if (m0.density && m0.density->total_mass() > 0.0) {
    const DensityMeasure& d = *m0.density;
    double x_max = d.support_end();
    if (!std::isfinite(x_max)) x_max = d.quantile(d.total_mass() * (1.0 - 1e-13));
    const double h = x_max / static_cast<double>(steps);
    for (std::size_t i = 0; i < steps; ++i) {
      const double x = h * (static_cast<double>(i) + 0.5);
      const double s0 = law.survival(x);
      if (s0 > 0.0) init += h * d.density(x) * f(x + t) * law.survival(x + t) / s0;
    }
  }
  if (t == 0.0) return init;
  const double h = t / static_cast<double>(steps);
  double conv = 0.0;
  double prev = driver(0.0);
  for (std::size_t i = 0; i < steps; ++i) {
    const double s_hi = h * static_cast<double>(i + 1);
    const double cur = driver(s_hi);
    const double age = t - (s_hi - 0.5 * h);
    conv += f(age) * law.survival(age) * (cur - prev);
    prev = cur;
  }
  return init + conv;
}

}  // namespace

double mean_eta_formula(const InitialMeasure& eta0, const std::function<double(double)>& e, const Distribution& patience,
                        const std::function<double(double)>& f, double t, std::size_t steps) {
  return mean_measure_formula(eta0, e, patience, f, t, steps);
}

double mean_nu_formula(const InitialMeasure& nu0, const std::function<double(double)>& k, const Distribution& service,
                       const std::function<double(double)>& f, double t, std::size_t steps) {
  return mean_measure_formula(nu0, k, service, f, t, steps);
}

namespace {

class EntryLog final : public Observer {
 public:
  void event(const SystemState&, const EventRecord& rec) override {
    if (rec.any_entry) entries.push_back(rec.time);
  }
  std::vector<double> entries;
};

}  // namespace

RepresentationReport representation_check(const ModelSpec& model, const std::vector<double>& times_in,
                                          const std::vector<double>& cutoffs, int replications, std::uint64_t seed,
                                          unsigned threads) {
  if (!std::holds_alternative<ExponentialLaw>(model.arrival.kind())) {
    throw std::invalid_argument("representation check needs Poisson arrivals");
  }
  if (!model.patience) throw std::invalid_argument("representation check needs a patience law");
  if (replications < 2) throw std::invalid_argument("representation check needs at least 2 replications");
  std::vector<double> times = times_in;
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  if (times.empty() || !(times.front() > 0.0)) throw std::invalid_argument("representation times must be positive");

  // f index 0 is f = 1, then one indicator per cutoff.
  const std::size_t nf = 1 + cutoffs.size();
  const std::size_t nt = times.size();
  const auto reps = static_cast<std::size_t>(replications);
  auto idx = [&](std::size_t r, std::size_t ti, std::size_t fi) { return (r * nt + ti) * nf + fi; };
  std::vector<double> eta_v(reps * nt * nf), nu_v(eta_v.size()), y_v(eta_v.size());

  parallel_for(replications, threads, [&](int i) {
    const auto r = static_cast<std::size_t>(i);
    SystemState state = init_state(model, InitialCondition{}, replication_seed(seed, r));
    EntryLog log;
    Observer* obs[] = {&log};
    RunOptions ro;
    ro.audit = false;
    for (std::size_t ti = 0; ti < nt; ++ti) {
      const double t = times[ti];
      run(state, t, obs, ro);
      for (std::size_t fi = 0; fi < nf; ++fi) {
        const double c = fi == 0 ? 0.0 : cutoffs[fi - 1];
        eta_v[idx(r, ti, fi)] = static_cast<double>(state.eta().tail_mass(c));
        nu_v[idx(r, ti, fi)] = static_cast<double>(state.nu().tail_mass(c));
        double y = 0.0;
        for (double s : log.entries) {
          const double age = t - s;
          if (age >= c) y += model.service.survival(age);
        }
        y_v[idx(r, ti, fi)] = y;
      }
    }
  });

  const double lambda = 1.0 / model.arrival.mean();
  RepresentationReport rep;
  for (std::size_t ti = 0; ti < nt; ++ti) {
    for (std::size_t fi = 0; fi < nf; ++fi) {
      const double t = times[ti];
      const double c = fi == 0 ? 0.0 : cutoffs[fi - 1];
      const std::string label = fi == 0 ? "1" : "1[c,inf)";
      const auto f = [c](double x) { return x >= c ? 1.0 : 0.0; };
      std::vector<double> ev(reps), dv(reps), yv(reps), nv(reps);
      for (std::size_t r = 0; r < reps; ++r) {
        ev[r] = eta_v[idx(r, ti, fi)];
        nv[r] = nu_v[idx(r, ti, fi)];
        yv[r] = y_v[idx(r, ti, fi)];
        dv[r] = nv[r] - yv[r];
      }
      const auto zscore = [&](const std::vector<double>& v, double target) {
        const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(reps);
        double ss = 0.0;
        for (double x : v) ss += (x - m) * (x - m);
        const double se = std::sqrt(ss / static_cast<double>(reps - 1) / static_cast<double>(reps));
        if (se == 0.0) return m == target ? 0.0 : std::numeric_limits<double>::infinity();
        return (m - target) / se;
      };
      RepresentationRow row;
      row.side = "eta";
      row.f = label;
      row.c = c;
      row.t = t;
      row.empirical = std::accumulate(ev.begin(), ev.end(), 0.0) / static_cast<double>(reps);
      row.predicted = mean_eta_formula(InitialMeasure::zero(), [lambda](double s) { return lambda * s; }, *model.patience,
                                       f, t);
      // The midpoint rule is exact to ~1e-9 here; treat an identically zero
      // empirical mean against a zero target as exact agreement.
      row.z = zscore(ev, row.predicted);
      if (row.predicted < 1e-12 && row.empirical == 0.0) row.z = 0.0;
      rep.rows.push_back(row);

      RepresentationRow nrow;
      nrow.side = "nu";
      nrow.f = label;
      nrow.c = c;
      nrow.t = t;
      nrow.empirical = std::accumulate(nv.begin(), nv.end(), 0.0) / static_cast<double>(reps);
      nrow.predicted = std::accumulate(yv.begin(), yv.end(), 0.0) / static_cast<double>(reps);
      nrow.z = zscore(dv, 0.0);
      rep.rows.push_back(nrow);
    }
  }
  for (const auto& row : rep.rows) rep.max_abs_z = std::max(rep.max_abs_z, std::abs(row.z));
  return rep;
}

ConvergenceReport convergence_study(const ScaledModel& scaled, const std::vector<int>& n_list,
                                    const std::function<StationaryOptions(int)>& options_for) {
  ConvergenceReport rep;
  rep.invariant = invariant_manifold(scaled.lambda_bar, scaled.service, scaled.patience);
  if (!is_unique(rep.invariant)) {
    throw std::invalid_argument("invariant manifold is not a single point; the stationary limit is not identified "
                                "(see the interchange study)");
  }
  const double x_target = rep.invariant.regime == Regime::subcritical ? rep.invariant.lambda
                                                                       : 0.5 * (rep.invariant.b_l + rep.invariant.b_r);
  for (int n : n_list) {
    ConvergenceRow row;
    row.n_servers = n;
    InitialCondition init;
    init.stationary_arrivals = scaled.stationary_arrivals;
    row.estimate = estimate_stationary(scaled.model(n), init, options_for(n));
    row.x_target = x_target;
    row.x_distance = std::abs(row.estimate.x_bar.mean - x_target);
    if (scaled.patience) {
      row.littles_deviation =
          littles_law_check(row.estimate, static_cast<double>(scaled.arrival_rate(n)) / n, scaled.patience->mean());
    }
    rep.rows.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rep.rows.size(); ++j) {
      const auto& a = rep.rows[i];
      const auto& b = rep.rows[j];
      if (b.n_servers > a.n_servers &&
          b.x_distance > a.x_distance + a.estimate.x_bar.half_width + b.estimate.x_bar.half_width) {
        rep.monotone = false;
      }
    }
  }
  return rep;
}

InterchangeReport interchange_demo(const std::vector<int>& n_list, double fluid_horizon, double delta) {
  InterchangeReport rep;
  rep.fluid_horizon = fluid_horizon;
  rep.bound_limit = std::exp(-0.5);
  rep.quoted_limit = std::exp(-2.0);
  rep.w1_limit = 2.0 / std::exp(1.0);
  rep.min_w1 = std::numeric_limits<double>::infinity();
  int n_max = 0;
  for (int n : n_list) {
    if (n < 2) throw std::invalid_argument("interchange study needs N >= 2");
    InterchangeRow row;
    row.n_servers = n;
    row.lambda_abs = n - 1.0;
    row.threshold = static_cast<std::size_t>(std::ceil(1.5 * n));
    row.tail_exact = mmn_tail(n, row.lambda_abs, row.threshold);
    row.bound = std::pow((n - 1.0) / n, n / 2.0);
    row.mean_scaled = mmn_mean(n, row.lambda_abs) / n;
    row.w1_to_fluid = mmn_scaled_abs_deviation(n, row.lambda_abs, 2.0);
    rep.min_w1 = std::min(rep.min_w1, row.w1_to_fluid);
    if (n >= n_max) {
      n_max = n;
      rep.probability_gap = 1.0 - row.tail_exact;
    }
    rep.rows.push_back(row);
  }

  FluidInput in;
  in.lambda = 1.0;
  in.x0 = 2.0;
  in.service = Distribution::exponential(1.0);
  in.nu0 = InitialMeasure::from_density(equilibrium_measure(in.service, 1.0));
  const FluidTrajectory tr = solve_fluid(in, fluid_horizon, delta);
  for (double x : tr.X) rep.fluid_sup_deviation = std::max(rep.fluid_sup_deviation, std::abs(x - 2.0));

  FluidInput ab = in;
  ab.patience = Distribution::shifted(3.0, Distribution::exponential(1.0));
  ab.eta0 = InitialMeasure::dirac(0.0, 1.0);
  const FluidTrajectory tra = solve_fluid(ab, 3.0, delta);
  for (double x : tra.X) rep.fluid_abandonment_deviation = std::max(rep.fluid_abandonment_deviation, std::abs(x - 2.0));
  return rep;
}

}  // namespace manyq
