#include "manyq/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "manyq/errors.hpp"

namespace manyq {

namespace {

constexpr std::size_t kConversionNodes = 4000;

// Trapezoidal cumulative of samples on a uniform grid.
std::vector<double> trapezoid_cumulative(const std::vector<double>& f, double step) {
  std::vector<double> c(f.size(), 0.0);
  for (std::size_t i = 1; i < f.size(); ++i) c[i] = c[i - 1] + 0.5 * step * (f[i - 1] + f[i]);
  return c;
}

double interp(const std::vector<double>& c, double step, double a) {
  if (a <= 0.0) return 0.0;
  const double pos = a / step;
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= c.size()) return c.back();
  const double w = pos - static_cast<double>(i);
  return c[i] + w * (c[i + 1] - c[i]);
}

// Puts an initial measure in the form TransportedMeasure expects for `law`:
// atoms sorted and positive, an equilibrium density of a different law
// tabulated on a grid.
InitialMeasure normalized(const InitialMeasure& m, const Distribution& law) {
  InitialMeasure out;
  for (const Atom& a : m.atoms) {
    if (!(a.position >= 0.0) || !std::isfinite(a.position) || !(a.mass >= 0.0) || !std::isfinite(a.mass)) {
      throw std::invalid_argument("initial atoms need finite nonnegative position and mass");
    }
    if (a.mass > 0.0) out.atoms.push_back(a);
  }
  std::sort(out.atoms.begin(), out.atoms.end(), [](const Atom& a, const Atom& b) { return a.position < b.position; });
  if (m.density) {
    const DensityMeasure& d = *m.density;
    if (d.is_analytic()) {
      if (d.scale() == 0.0) return out;
      if (*d.law() == law) {
        out.density = d;
        return out;
      }
      const Distribution& own = *d.law();
      double x_max = own.support_end();
      if (!std::isfinite(x_max)) x_max = own.inverse_survival(1e-13);
      const double step = x_max / static_cast<double>(kConversionNodes);
      std::vector<double> grid(kConversionNodes + 1);
      for (std::size_t i = 0; i <= kConversionNodes; ++i) grid[i] = d.density(step * static_cast<double>(i));
      out.density = DensityMeasure::from_grid(std::move(grid), step);
    } else {
      out.density = d;
    }
  }
  return out;
}

}  // namespace

double InitialMeasure::total_mass() const {
  double m = density ? density->total_mass() : 0.0;
  for (const Atom& a : atoms) m += a.mass;
  return m;
}

double InitialMeasure::cumulative(double x) const {
  if (x < 0.0) return 0.0;
  double m = density ? density->cumulative(x) : 0.0;
  for (const Atom& a : atoms) {
    if (a.position <= x) m += a.mass;
  }
  return m;
}

TransportedMeasure::TransportedMeasure(const InitialMeasure& raw, const Distribution& law, double t)
    : t_(t), law_(law) {
  if (!(t >= 0.0)) throw std::invalid_argument("transport time must be >= 0");
  const InitialMeasure m = normalized(raw, law);
  for (const Atom& a : m.atoms) {
    const double s0 = law.survival(a.position);
    if (!(s0 > 0.0)) continue;
    atom_x_.push_back(a.position);
    atom_w_.push_back(a.mass * law.survival(a.position + t) / s0);
    atom_hw_.push_back(a.mass * law.density(a.position + t) / s0);
  }
  if (!m.density) return;
  const DensityMeasure& d = *m.density;
  if (d.is_analytic()) {
    kind_ = ContKind::analytic;
    scale_ = d.scale();
    return;
  }
  kind_ = ContKind::grid;
  step_ = d.grid_step();
  const auto& q = d.grid_density();
  std::vector<double> w(q.size()), hw(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double x = step_ * static_cast<double>(i);
    const double s0 = law.survival(x);
    if (!(s0 > 0.0) || q[i] == 0.0) {
      w[i] = hw[i] = 0.0;
      continue;
    }
    w[i] = q[i] * law.survival(x + t) / s0;
    hw[i] = q[i] * law.density(x + t) / s0;
  }
  cum_ = trapezoid_cumulative(w, step_);
  hcum_ = trapezoid_cumulative(hw, step_);
}

double TransportedMeasure::cont_cum(double a) const {
  switch (kind_) {
    case ContKind::none: return 0.0;
    case ContKind::analytic:
      if (a <= 0.0) return 0.0;
      return scale_ * (law_.integrated_survival(a + t_) - law_.integrated_survival(t_));
    case ContKind::grid: return interp(cum_, step_, a);
  }
  return 0.0;
}

double TransportedMeasure::cont_hcum(double a) const {
  switch (kind_) {
    case ContKind::none: return 0.0;
    case ContKind::analytic:
      if (a <= 0.0) return 0.0;
      return scale_ * (law_.survival(t_) - law_.survival(a + t_));
    case ContKind::grid: return interp(hcum_, step_, a);
  }
  return 0.0;
}

double TransportedMeasure::cont_inverse(double q) const {
  if (q <= 0.0) return 0.0;
  switch (kind_) {
    case ContKind::none: return 0.0;
    case ContKind::analytic: {
      const double target = q / scale_ + law_.integrated_survival(t_);
      return std::max(0.0, law_.integrated_survival_inverse(target) - t_);
    }
    case ContKind::grid: {
      const double qq = std::min(q, cum_.back());
      const auto it = std::lower_bound(cum_.begin(), cum_.end(), qq);
      const auto i = static_cast<std::size_t>(std::distance(cum_.begin(), it));
      if (i == 0) return 0.0;
      const double lo = cum_[i - 1];
      const double hi = cum_[i];
      return step_ * (static_cast<double>(i - 1) + (qq - lo) / (hi - lo));
    }
  }
  return 0.0;
}

double TransportedMeasure::mass() const {
  double m = 0.0;
  for (double w : atom_w_) m += w;
  switch (kind_) {
    case ContKind::none: break;
    case ContKind::analytic: m += scale_ * (law_.mean() - law_.integrated_survival(t_)); break;
    case ContKind::grid: m += cum_.back(); break;
  }
  return m;
}

double TransportedMeasure::hazard_mass() const {
  double m = 0.0;
  for (double w : atom_hw_) m += w;
  switch (kind_) {
    case ContKind::none: break;
    case ContKind::analytic: m += scale_ * law_.survival(t_); break;
    case ContKind::grid: m += hcum_.back(); break;
  }
  return m;
}

double TransportedMeasure::cumulative(double a) const {
  if (a < 0.0) return 0.0;
  double m = cont_cum(a);
  for (std::size_t i = 0; i < atom_x_.size() && atom_x_[i] <= a; ++i) m += atom_w_[i];
  return m;
}

double TransportedMeasure::quantile(double q) const {
  if (q <= 0.0) return 0.0;
  double before = 0.0;
  for (std::size_t i = 0; i < atom_x_.size(); ++i) {
    const double c = cont_cum(atom_x_[i]) + before;
    if (q <= c) return cont_inverse(q - before);
    if (q <= c + atom_w_[i]) return atom_x_[i];
    before += atom_w_[i];
  }
  const double total = mass();
  if (q > total * (1.0 + 1e-9) + 1e-12) throw std::domain_error("quantile level exceeds transported mass");
  return cont_inverse(q - before);
}

double TransportedMeasure::hazard_up_to_level(double q) const {
  if (q <= 0.0) return 0.0;
  double before = 0.0;
  double hbefore = 0.0;
  for (std::size_t i = 0; i < atom_x_.size(); ++i) {
    if (atom_w_[i] <= 0.0) continue;
    const double c = cont_cum(atom_x_[i]) + before;
    if (q <= c) return cont_hcum(cont_inverse(q - before)) + hbefore;
    if (q <= c + atom_w_[i]) {
      return cont_hcum(atom_x_[i]) + hbefore + (atom_hw_[i] / atom_w_[i]) * (q - c);
    }
    before += atom_w_[i];
    hbefore += atom_hw_[i];
  }
  const double total = mass();
  if (q > total * (1.0 + 1e-9) + 1e-12) throw std::domain_error("queue level exceeds transported mass");
  if (q >= total) return hazard_mass();
  return cont_hcum(cont_inverse(q - before)) + hbefore;
}

EtaProfile::EtaProfile(const InitialMeasure& eta0, double lambda, const Distribution& patience, double t)
    : t_(t),
      lambda_(lambda),
      patience_(patience),
      new_mass_(lambda * patience.integrated_survival(t)),
      init_(eta0, patience, t) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("arrival rate must be >= 0");
}

double EtaProfile::total_mass() const { return new_mass_ + init_.mass(); }

double EtaProfile::cumulative(double x) const {
  if (x < 0.0) return 0.0;
  if (x < t_) return lambda_ * patience_.integrated_survival(x);
  return new_mass_ + init_.cumulative(x - t_);
}

double EtaProfile::quantile(double q) const {
  if (q <= 0.0) return 0.0;
  if (q <= new_mass_) return patience_.integrated_survival_inverse(q / lambda_);
  return t_ + init_.quantile(q - new_mass_);
}

double EtaProfile::reneging_rate(double q) const {
  if (q <= 0.0) return 0.0;
  if (q <= new_mass_) return lambda_ * patience_.cdf(patience_.integrated_survival_inverse(q / lambda_));
  return lambda_ * patience_.cdf(t_) + init_.hazard_up_to_level(q - new_mass_);
}

EtaProfile eta_evolve(const InitialMeasure& eta0, double lambda, const Distribution& patience, double t) {
  return EtaProfile(eta0, lambda, patience, t);
}

double reneging_rate(double x, const EtaProfile& eta) {
  const double q = std::max(x - 1.0, 0.0);
  if (q > eta.total_mass() * (1.0 + 1e-9) + 1e-12) throw std::domain_error("fluid queue exceeds potential-queue mass");
  return eta.reneging_rate(std::min(q, eta.total_mass()));
}

double reneging_rate(double x, const DensityMeasure& eta, const Distribution& patience) {
  const double q = std::max(x - 1.0, 0.0);
  if (q == 0.0) return 0.0;
  if (q > eta.total_mass() * (1.0 + 1e-9) + 1e-12) throw std::domain_error("fluid queue exceeds potential-queue mass");
  const double chi = eta.quantile(std::min(q, eta.total_mass()));
  if (eta.is_analytic() && *eta.law() == patience) return eta.scale() * patience.cdf(chi);
  // x-space: int_0^chi h^r(x) eta(dx) = int_0^chi g^r(x) d(x) / (1 - G^r(x)) dx, trapezoidal.
  const std::size_t n = std::max<std::size_t>(2000, eta.is_analytic() ? 0 : eta.grid_density().size());
  const double h = chi / static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = h * static_cast<double>(i);
    const double s = patience.survival(x);
    const double f = s > 0.0 ? patience.density(x) * eta.density(x) / s : 0.0;
    sum += (i == 0 || i == n) ? 0.5 * f : f;
  }
  return sum * h;
}

void validate_fluid_input(const FluidInput& in, double tol) {
  if (!(in.lambda >= 0.0) || !std::isfinite(in.lambda)) throw std::invalid_argument("fluid arrival rate must be finite and >= 0");
  if (!(in.x0 >= 0.0) || !std::isfinite(in.x0)) throw std::invalid_argument("initial fluid content must be finite and >= 0");
  const double b0 = in.nu0.total_mass();
  if (std::abs(1.0 - b0 - std::max(1.0 - in.x0, 0.0)) > tol) {
    std::ostringstream os;
    os << "initial service measure violates non-idling: 1 - <1,nu0> = " << 1.0 - b0 << " but [1 - X(0)]^+ = "
       << std::max(1.0 - in.x0, 0.0);
    throw std::invalid_argument(os.str());
  }
  if (in.patience && std::max(in.x0 - 1.0, 0.0) > in.eta0.total_mass() + tol) {
    throw std::invalid_argument("initial fluid queue exceeds the mass of the initial potential-queue measure");
  }
  if (!in.patience && (!in.eta0.atoms.empty() || in.eta0.density)) {
    if (in.eta0.total_mass() > 0.0) throw std::invalid_argument("initial potential-queue measure given without abandonment");
  }
}

FluidTrajectory solve_fluid(const FluidInput& in, double horizon, double delta) {
  validate_fluid_input(in);
  if (!(delta > 0.0) || !(horizon >= delta)) throw std::invalid_argument("fluid solver needs 0 < delta <= horizon");
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / delta - 1e-9));

  FluidTrajectory tr;
  tr.delta = delta;
  tr.input = in;
  const Distribution& service = in.service;
  const InitialMeasure nu0 = normalized(in.nu0, service);
  const bool abandon = in.patience.has_value();

  if (abandon) {
    const Distribution& pat = *in.patience;
    const double limit = std::min(horizon, pat.support_end());
    bool clamped = false;
    double worst = 0.0;
    for (double x = 0.0; x < limit; x += delta) {
      if (pat.cdf(x) >= 1.0) break;
      const HazardValue h = pat.hazard_checked(x);
      clamped = clamped || h.clamped;
      worst = std::max(worst, h.value);
    }
    if (worst * delta > 0.1) {
      std::ostringstream os;
      os << "patience hazard reaches " << worst << " within the horizon; delta*hazard = " << worst * delta
         << " > 0.1, consider a smaller delta";
      tr.warnings.push_back(os.str());
    }
    if (clamped) tr.warnings.push_back("patience survival clamped while evaluating the hazard near the support end");
  }

  std::vector<double> ss(steps + 1), gs(steps + 1), mnu(steps + 1), hnu(steps + 1);
  for (std::size_t m = 0; m <= steps; ++m) {
    const double age = delta * static_cast<double>(m) + 0.5 * delta;
    ss[m] = service.survival(age);
    gs[m] = service.density(age);
    const TransportedMeasure tm(nu0, service, delta * static_cast<double>(m));
    mnu[m] = tm.mass();
    hnu[m] = tm.hazard_mass();
  }

  for (auto* v : {&tr.t, &tr.X, &tr.Q, &tr.B, &tr.K, &tr.R, &tr.D, &tr.eta_mass, &tr.hs_nu}) v->reserve(steps + 1);
  tr.entries.reserve(steps);

  double q = std::max(in.x0 - 1.0, 0.0);
  double b = nu0.total_mass();
  double k = 0.0, r_cum = 0.0, d_cum = 0.0;
  const double eta0_mass = in.eta0.total_mass();
  std::optional<EtaProfile> eta;
  if (abandon) eta.emplace(in.eta0, in.lambda, *in.patience, 0.0);

  auto push = [&](double t, double x, double hs, double em) {
    tr.t.push_back(t);
    tr.X.push_back(x);
    tr.Q.push_back(q);
    tr.B.push_back(b);
    tr.K.push_back(k);
    tr.R.push_back(r_cum);
    tr.D.push_back(d_cum);
    tr.hs_nu.push_back(hs);
    tr.eta_mass.push_back(em);
  };
  push(0.0, in.x0, hnu[0], abandon ? eta->total_mass() : eta0_mass);

  const double lam_step = in.lambda * delta;
  for (std::size_t n = 0; n < steps; ++n) {
    const double t1 = delta * static_cast<double>(n + 1);
    double b_aged = mnu[n + 1];
    double hs = hnu[n + 1];
    for (std::size_t j = 0; j < n; ++j) {
      b_aged += tr.entries[j] * ss[n - j];
      hs += tr.entries[j] * gs[n - j];
    }
    const double cap = std::max(0.0, (1.0 - b_aged) / ss[0]);
    const double avail = q + lam_step;

    double reneged = 0.0;
    if (abandon) {
      const double rho0 = eta->reneging_rate(std::min(q, eta->total_mass()));
      const double r_pred = std::min(delta * rho0, avail);
      const double e_pred = std::min(cap, avail - r_pred);
      const double q_pred = std::max(0.0, avail - e_pred - r_pred);
      eta.emplace(in.eta0, in.lambda, *in.patience, t1);
      const double rho1 = eta->reneging_rate(std::min(q_pred, eta->total_mass()));
      reneged = std::min(0.5 * delta * (rho0 + rho1), avail);
    }
    const double e = std::min(cap, avail - reneged);
    tr.entries.push_back(e);
    hs += e * gs[0];
    const double b_next = b_aged + e * ss[0];
    d_cum += b + e - b_next;
    b = b_next;
    q = std::max(0.0, avail - e - reneged);
    k += e;
    r_cum += reneged;
    const double em = abandon ? eta->total_mass() : eta0_mass + in.lambda * t1;
    if (!std::isfinite(b) || !std::isfinite(q) || !std::isfinite(hs) || !std::isfinite(em)) {
      std::ostringstream os;
      os << "fluid solver produced a non-finite value at node " << n + 1 << " (t=" << t1 << ")";
      throw SimulationError(os.str());
    }
    push(t1, b + q, hs, em);
  }
  return tr;
}

double nu_cumulative(const FluidTrajectory& tr, std::size_t n, double a) {
  if (n >= tr.nodes()) throw std::out_of_range("fluid node index out of range");
  if (a < 0.0) return 0.0;
  const double t = tr.t[n];
  const Distribution& service = tr.input.service;
  double m = a >= t ? TransportedMeasure(tr.input.nu0, service, t).cumulative(a - t) : 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double age = t - (tr.t[j] + 0.5 * tr.delta);
    if (age <= a) m += tr.entries[j] * service.survival(age);
  }
  return m;
}

double eta_cumulative(const FluidTrajectory& tr, std::size_t n, double a) {
  if (n >= tr.nodes()) throw std::out_of_range("fluid node index out of range");
  if (a < 0.0) return 0.0;
  const double t = tr.t[n];
  if (tr.input.patience) return EtaProfile(tr.input.eta0, tr.input.lambda, *tr.input.patience, t).cumulative(a);
  return tr.input.lambda * std::min(a, t) + tr.input.eta0.cumulative(a - t);
}

double FluidDefects::max() const {
  return std::max({non_idling, conservation, queue_identity, eta_bound, departure_balance});
}

FluidDefects fluid_defects(const FluidTrajectory& tr) {
  FluidDefects d;
  const double lambda = tr.input.lambda;
  const double q0 = tr.Q.front();
  const double x0 = tr.X.front();
  double integral = 0.0;
  for (std::size_t n = 0; n < tr.nodes(); ++n) {
    if (n > 0) integral += 0.5 * (tr.t[n] - tr.t[n - 1]) * (tr.hs_nu[n - 1] + tr.hs_nu[n]);
    const double t = tr.t[n];
    d.non_idling = std::max(d.non_idling, std::abs(1.0 - tr.B[n] - std::max(1.0 - tr.X[n], 0.0)));
    d.conservation = std::max(d.conservation, std::abs(q0 + lambda * t - tr.Q[n] - tr.K[n] - tr.R[n]));
    d.queue_identity = std::max(d.queue_identity, std::abs(tr.Q[n] - std::max(tr.X[n] - 1.0, 0.0)));
    if (tr.input.patience) d.eta_bound = std::max(d.eta_bound, tr.Q[n] - tr.eta_mass[n]);
    d.departure_balance = std::max(d.departure_balance, std::abs(tr.X[n] - x0 - lambda * t + integral + tr.R[n]));
  }
  return d;
}

std::vector<double> renewal_density(const Distribution& service, double delta, std::size_t steps) {
  if (!(delta > 0.0)) throw std::invalid_argument("renewal grid step must be positive");
  std::vector<double> g(steps + 1), u(steps + 1);
  for (std::size_t n = 0; n <= steps; ++n) g[n] = service.density(delta * static_cast<double>(n));
  const double denom = 1.0 - 0.5 * delta * g[0];
  if (!(denom > 0.0)) throw std::invalid_argument("renewal grid step too coarse for the service density at 0");
  u[0] = g[0];
  for (std::size_t n = 1; n <= steps; ++n) {
    double conv = 0.5 * g[n] * u[0];
    for (std::size_t j = 1; j < n; ++j) conv += g[n - j] * u[j];
    u[n] = (g[n] + delta * conv) / denom;
  }
  return u;
}

std::vector<double> solve_K_renewal(const FluidTrajectory& tr) {
  const std::size_t n_nodes = tr.nodes();
  const double delta = tr.delta;
  const Distribution& service = tr.input.service;
  const InitialMeasure nu0 = normalized(tr.input.nu0, service);
  std::vector<double> phi(n_nodes);
  for (std::size_t n = 0; n < n_nodes; ++n) {
    phi[n] = tr.B[n] - TransportedMeasure(nu0, service, tr.t[n]).mass();
  }
  const std::vector<double> u = renewal_density(service, delta, n_nodes - 1);
  std::vector<double> k(n_nodes);
  for (std::size_t n = 0; n < n_nodes; ++n) {
    double conv = 0.0;
    if (n > 0) {
      conv = 0.5 * (phi[n] * u[0] + phi[0] * u[n]);
      for (std::size_t i = 1; i < n; ++i) conv += phi[n - i] * u[i];
    }
    k[n] = phi[n] + delta * conv;
  }
  return k;
}

}  // namespace manyq
