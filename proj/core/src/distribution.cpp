#include "manyq/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace manyq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSurvivalClamp = 1e-12;
constexpr double kBisectionTol = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
  }
}

// Terms t_n = (rx)^n / n!, n < k, and their sum.
struct ErlangTerms {
  double last;  // t_{k-1}
  double sum;   // sum_{n<k} t_n
};

ErlangTerms erlang_terms(int shape, double rx) {
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n < shape; ++n) {
    term *= rx / n;
    sum += term;
  }
  return {term, sum};
}

double erlang_survival(const ErlangLaw& e, double x) {
  const double rx = e.rate * x;
  return std::exp(-rx) * erlang_terms(e.shape, rx).sum;
}

double erlang_density(const ErlangLaw& e, double x) {
  if (x == 0.0) return e.shape == 1 ? e.rate : 0.0;
  const double rx = e.rate * x;
  return e.rate * std::exp((e.shape - 1) * std::log(rx) - rx - std::lgamma(static_cast<double>(e.shape)));
}

double erlang_integrated_survival(const ErlangLaw& e, double x) {
  // int_0^x e^{-ry} (ry)^n / n! dy = (1/r) P(Poisson(rx) >= n + 1)
  const double rx = e.rate * x;
  const double w = std::exp(-rx);
  double term = 1.0;
  double partial = 0.0;
  double total = 0.0;
  for (int n = 0; n < e.shape; ++n) {
    if (n > 0) term *= rx / n;
    partial += term;
    total += std::max(0.0, 1.0 - w * partial);
  }
  return total / e.rate;
}

struct PiecewiseSegment {
  std::size_t index;  // segment [x_i, x_{i+1}]
  bool beyond;        // x at or past last knot
};

PiecewiseSegment locate(const PiecewiseLinearLaw& p, double x) {
  if (x >= p.x.back()) return {p.x.size() - 1, true};
  auto it = std::upper_bound(p.x.begin(), p.x.end(), x);
  return {static_cast<std::size_t>(std::distance(p.x.begin(), it)) - 1, false};
}

double piecewise_cdf(const PiecewiseLinearLaw& p, double x) {
  if (x <= 0.0) return 0.0;
  auto seg = locate(p, x);
  if (seg.beyond) return 1.0;
  const std::size_t i = seg.index;
  const double w = (x - p.x[i]) / (p.x[i + 1] - p.x[i]);
  return std::min(1.0, p.cdf[i] + w * (p.cdf[i + 1] - p.cdf[i]));
}

double piecewise_density(const PiecewiseLinearLaw& p, double x) {
  if (x < 0.0) return 0.0;
  auto seg = locate(p, x);
  if (seg.beyond) return 0.0;
  const std::size_t i = seg.index;
  return (p.cdf[i + 1] - p.cdf[i]) / (p.x[i + 1] - p.x[i]);
}

double piecewise_integrated_survival(const PiecewiseLinearLaw& p, double x) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < p.x.size(); ++i) {
    const double a = p.x[i];
    if (x <= a) break;
    const double b = std::min(x, p.x[i + 1]);
    const double sa = 1.0 - p.cdf[i];
    const double sb = 1.0 - piecewise_cdf(p, b);
    total += 0.5 * (sa + sb) * (b - a);
  }
  return total;
}

double piecewise_second_moment(const PiecewiseLinearLaw& p) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < p.x.size(); ++i) {
    const double a = p.x[i];
    const double b = p.x[i + 1];
    const double slope = (p.cdf[i + 1] - p.cdf[i]) / (b - a);
    total += slope * (b * b * b - a * a * a) / 3.0;
  }
  return total;
}

double piecewise_support_end(const PiecewiseLinearLaw& p) {
  for (std::size_t i = 0; i < p.cdf.size(); ++i) {
    if (p.cdf[i] >= 1.0) return p.x[i];
  }
  return p.x.back();
}

double uniform_integrated_survival(const UniformLaw& u, double x) {
  if (x <= u.lo) return x;
  const double w = u.hi - u.lo;
  const double d = std::min(x, u.hi) - u.lo;
  return u.lo + d - d * d / (2.0 * w);
}

}  // namespace

Distribution::Distribution(Kind kind) : kind_(std::move(kind)) {
  std::visit(Overloaded{
                 [this](const ExponentialLaw& e) {
                   mean_ = 1.0 / e.rate;
                   support_end_ = kInf;
                 },
                 [this](const ErlangLaw& e) {
                   mean_ = e.shape / e.rate;
                   support_end_ = kInf;
                 },
                 [this](const UniformLaw& u) {
                   mean_ = 0.5 * (u.lo + u.hi);
                   support_end_ = u.hi;
                 },
                 [this](const PiecewiseLinearLaw& p) {
                   support_end_ = piecewise_support_end(p);
                   mean_ = piecewise_integrated_survival(p, support_end_);
                 },
                 [this](const ShiftedLaw& s) {
                   mean_ = s.offset + s.inner->mean();
                   support_end_ = s.offset + s.inner->support_end();
                 },
                 [this](const EquilibriumLaw& e) {
                   mean_ = e.base->second_moment() / (2.0 * e.base->mean());
                   support_end_ = e.base->support_end();
                 },
             },
             kind_);
}

Distribution Distribution::exponential(double rate) {
  require_positive(rate, "exponential rate");
  return Distribution(ExponentialLaw{rate});
}

Distribution Distribution::erlang(int shape, double rate) {
  if (shape < 1) throw std::invalid_argument("erlang shape must be a positive integer");
  require_positive(rate, "erlang rate");
  return Distribution(ErlangLaw{shape, rate});
}

Distribution Distribution::uniform(double lo, double hi) {
  if (!(lo >= 0.0) || !(hi > lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("uniform law needs 0 <= a < b < inf");
  }
  return Distribution(UniformLaw{lo, hi});
}

Distribution Distribution::piecewise_linear(std::vector<std::pair<double, double>> knots) {
  if (knots.size() < 2) throw std::invalid_argument("piecewise cdf needs at least two knots");
  if (knots.front().first != 0.0) throw std::invalid_argument("piecewise cdf must start at x = 0");
  if (knots.front().second != 0.0) throw std::invalid_argument("piecewise cdf must start at cdf(0) = 0");
  PiecewiseLinearLaw law;
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const auto [x, c] = knots[i];
    if (!std::isfinite(x) || !(c >= 0.0) || c > 1.0 + 1e-12) {
      throw std::invalid_argument("piecewise cdf knot out of range");
    }
    if (i > 0) {
      if (!(x > knots[i - 1].first)) {
        throw std::invalid_argument("piecewise cdf knots must have strictly increasing x (atoms are not supported)");
      }
      if (c < knots[i - 1].second) throw std::invalid_argument("piecewise cdf decreases");
    }
    law.x.push_back(x);
    law.cdf.push_back(std::min(c, 1.0));
  }
  if (std::abs(law.cdf.back() - 1.0) > 1e-12) throw std::invalid_argument("piecewise cdf must reach 1");
  law.cdf.back() = 1.0;
  return Distribution(std::move(law));
}

Distribution Distribution::shifted(double offset, Distribution inner) {
  if (!(offset >= 0.0) || !std::isfinite(offset)) throw std::invalid_argument("shift must be finite and nonnegative");
  return Distribution(ShiftedLaw{offset, std::make_shared<const Distribution>(std::move(inner))});
}

Distribution equilibrium_interarrival(const Distribution& d) {
  if (!std::isfinite(d.mean())) throw std::invalid_argument("equilibrium law needs a finite mean");
  if (const auto* e = std::get_if<ExponentialLaw>(&d.kind())) return Distribution::exponential(e->rate);
  return Distribution(EquilibriumLaw{std::make_shared<const Distribution>(d)});
}

double Distribution::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  return std::visit(Overloaded{
                        [x](const ExponentialLaw& e) { return -std::expm1(-e.rate * x); },
                        [x](const ErlangLaw& e) { return 1.0 - erlang_survival(e, x); },
                        [x](const UniformLaw& u) {
                          if (x <= u.lo) return 0.0;
                          if (x >= u.hi) return 1.0;
                          return (x - u.lo) / (u.hi - u.lo);
                        },
                        [x](const PiecewiseLinearLaw& p) { return piecewise_cdf(p, x); },
                        [x](const ShiftedLaw& s) { return x <= s.offset ? 0.0 : s.inner->cdf(x - s.offset); },
                        [x](const EquilibriumLaw& e) {
                          return std::min(1.0, e.base->integrated_survival(x) / e.base->mean());
                        },
                    },
                    kind_);
}

double Distribution::survival(double x) const {
  if (x <= 0.0) return 1.0;
  return std::visit(Overloaded{
                        [x](const ExponentialLaw& e) { return std::exp(-e.rate * x); },
                        [x](const ErlangLaw& e) { return erlang_survival(e, x); },
                        [this, x](const UniformLaw&) { return 1.0 - cdf(x); },
                        [this, x](const PiecewiseLinearLaw&) { return 1.0 - cdf(x); },
                        [x](const ShiftedLaw& s) { return x <= s.offset ? 1.0 : s.inner->survival(x - s.offset); },
                        [x](const EquilibriumLaw& e) {
                          const double m = e.base->mean();
                          return std::max(0.0, (m - e.base->integrated_survival(x)) / m);
                        },
                    },
                    kind_);
}

double Distribution::density(double x) const {
  if (x < 0.0) return 0.0;
  return std::visit(Overloaded{
                        [x](const ExponentialLaw& e) { return e.rate * std::exp(-e.rate * x); },
                        [x](const ErlangLaw& e) { return erlang_density(e, x); },
                        [x](const UniformLaw& u) { return (x >= u.lo && x < u.hi) ? 1.0 / (u.hi - u.lo) : 0.0; },
                        [x](const PiecewiseLinearLaw& p) { return piecewise_density(p, x); },
                        [x](const ShiftedLaw& s) { return x < s.offset ? 0.0 : s.inner->density(x - s.offset); },
                        [x](const EquilibriumLaw& e) { return e.base->survival(x) / e.base->mean(); },
                    },
                    kind_);
}

HazardValue Distribution::hazard_checked(double x) const {
  if (x < 0.0) x = 0.0;
  if (cdf(x) >= 1.0) throw std::domain_error("hazard evaluated beyond the support end");
  return std::visit(Overloaded{
                        [](const ExponentialLaw& e) { return HazardValue{e.rate, false}; },
                        [x](const ErlangLaw& e) {
                          if (x == 0.0) return HazardValue{e.shape == 1 ? e.rate : 0.0, false};
                          const auto t = erlang_terms(e.shape, e.rate * x);
                          return HazardValue{e.rate * t.last / t.sum, false};
                        },
                        [x](const UniformLaw& u) {
                          return HazardValue{x < u.lo ? 0.0 : 1.0 / (u.hi - x), false};
                        },
                        [x](const PiecewiseLinearLaw& p) {
                          const double s = 1.0 - piecewise_cdf(p, x);
                          const bool clamped = s < kSurvivalClamp;
                          return HazardValue{piecewise_density(p, x) / std::max(s, kSurvivalClamp), clamped};
                        },
                        [x](const ShiftedLaw& s) {
                          if (x < s.offset) return HazardValue{0.0, false};
                          return s.inner->hazard_checked(x - s.offset);
                        },
                        [x](const EquilibriumLaw& e) {
                          const double m = e.base->mean();
                          const double tail = m - e.base->integrated_survival(x);
                          const bool clamped = tail < kSurvivalClamp * m;
                          return HazardValue{e.base->survival(x) / std::max(tail, kSurvivalClamp * m), clamped};
                        },
                    },
                    kind_);
}

double Distribution::hazard(double x) const { return hazard_checked(x).value; }

double Distribution::second_moment() const {
  return std::visit(Overloaded{
                        [](const ExponentialLaw& e) { return 2.0 / (e.rate * e.rate); },
                        [](const ErlangLaw& e) { return e.shape * (e.shape + 1.0) / (e.rate * e.rate); },
                        [](const UniformLaw& u) { return (u.lo * u.lo + u.lo * u.hi + u.hi * u.hi) / 3.0; },
                        [](const PiecewiseLinearLaw& p) { return piecewise_second_moment(p); },
                        [](const ShiftedLaw& s) {
                          return s.offset * s.offset + 2.0 * s.offset * s.inner->mean() + s.inner->second_moment();
                        },
                        [](const EquilibriumLaw&) -> double {
                          throw std::logic_error("second moment of an equilibrium law is not available");
                        },
                    },
                    kind_);
}

double Distribution::integrated_survival(double x) const {
  if (x <= 0.0) return 0.0;
  return std::visit(Overloaded{
                        [x](const ExponentialLaw& e) { return -std::expm1(-e.rate * x) / e.rate; },
                        [x](const ErlangLaw& e) { return erlang_integrated_survival(e, x); },
                        [x](const UniformLaw& u) { return uniform_integrated_survival(u, x); },
                        [x](const PiecewiseLinearLaw& p) { return piecewise_integrated_survival(p, x); },
                        [x](const ShiftedLaw& s) {
                          return x <= s.offset ? x : s.offset + s.inner->integrated_survival(x - s.offset);
                        },
                        [this, x](const EquilibriumLaw&) {
                          const double upper = std::min(x, support_end_);
                          auto f = [this](double y) { return survival(y); };
                          double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, upper, 15, 1e-13);
                          return std::min(value, mean_);
                        },
                    },
                    kind_);
}

double Distribution::integrated_survival_inverse(double y) const {
  if (y <= 0.0) return 0.0;
  if (y >= mean_) return support_end_;
  if (const auto* e = std::get_if<ExponentialLaw>(&kind_)) return -std::log1p(-e->rate * y) / e->rate;
  if (const auto* u = std::get_if<UniformLaw>(&kind_)) {
    if (y <= u->lo) return y;
    // lo + d - d^2/(2w) = y, smaller root in d.
    const double w = u->hi - u->lo;
    const double r = y - u->lo;
    return u->lo + w - std::sqrt(std::max(0.0, w * w - 2.0 * w * r));
  }
  double lo = 0.0;
  double hi = std::isfinite(support_end_) ? support_end_ : std::max(1.0, 2.0 * y);
  while (integrated_survival(hi) < y) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (integrated_survival(mid) >= y) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double Distribution::inverse_survival(double s) const {
  if (s >= 1.0) return 0.0;
  if (s <= 0.0) return support_end_;
  if (const auto* e = std::get_if<ExponentialLaw>(&kind_)) return -std::log(s) / e->rate;
  if (const auto* u = std::get_if<UniformLaw>(&kind_)) return u->lo + (1.0 - s) * (u->hi - u->lo);
  if (const auto* sh = std::get_if<ShiftedLaw>(&kind_)) return sh->offset + sh->inner->inverse_survival(s);
  double lo = 0.0;
  double hi = std::isfinite(support_end_) ? support_end_ : std::max(1.0, 4.0 * mean_);
  while (survival(hi) > s) hi *= 2.0;
  for (int it = 0; it < 400 && hi - lo > kBisectionTol * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (survival(mid) <= s) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double Distribution::quantile(double p) const {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return support_end_;
  if (const auto* e = std::get_if<ExponentialLaw>(&kind_)) return -std::log1p(-p) / e->rate;
  return inverse_survival(1.0 - p);
}

double Distribution::sample(RandomStream& rng) const { return quantile(rng.uniform()); }

double Distribution::sample_residual(double age, RandomStream& rng) const {
  if (age <= 0.0) return sample(rng);
  if (std::holds_alternative<ExponentialLaw>(kind_)) return sample(rng);
  const double s_age = survival(age);
  if (!(s_age > 0.0)) throw std::domain_error("residual requested at an age beyond the support");
  const double s = s_age * (1.0 - rng.uniform());
  return std::max(0.0, inverse_survival(s) - age);
}

Distribution Distribution::scaled(double factor) const {
  require_positive(factor, "scale factor");
  return std::visit(Overloaded{
                        [factor](const ExponentialLaw& e) { return exponential(e.rate / factor); },
                        [factor](const ErlangLaw& e) { return erlang(e.shape, e.rate / factor); },
                        [factor](const UniformLaw& u) { return uniform(u.lo * factor, u.hi * factor); },
                        [factor](const PiecewiseLinearLaw& p) {
                          std::vector<std::pair<double, double>> knots;
                          for (std::size_t i = 0; i < p.x.size(); ++i) knots.emplace_back(p.x[i] * factor, p.cdf[i]);
                          return piecewise_linear(std::move(knots));
                        },
                        [factor](const ShiftedLaw& s) { return shifted(s.offset * factor, s.inner->scaled(factor)); },
                        [factor](const EquilibriumLaw& e) { return equilibrium_interarrival(e.base->scaled(factor)); },
                    },
                    kind_);
}

std::string Distribution::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(Overloaded{
                 [&os](const ExponentialLaw& e) { os << "exponential(rate=" << e.rate << ")"; },
                 [&os](const ErlangLaw& e) { os << "erlang(shape=" << e.shape << ",rate=" << e.rate << ")"; },
                 [&os](const UniformLaw& u) { os << "uniform(" << u.lo << "," << u.hi << ")"; },
                 [&os](const PiecewiseLinearLaw& p) {
                   os << "piecewise[";
                   for (std::size_t i = 0; i < p.x.size(); ++i) os << (i ? ";" : "") << p.x[i] << ":" << p.cdf[i];
                   os << "]";
                 },
                 [&os](const ShiftedLaw& s) { os << "shifted(" << s.offset << "," << s.inner->describe() << ")"; },
                 [&os](const EquilibriumLaw& e) { os << "equilibrium(" << e.base->describe() << ")"; },
             },
             kind_);
  return os.str();
}

bool operator==(const Distribution& a, const Distribution& b) {
  if (a.kind_.index() != b.kind_.index()) return false;
  return std::visit(Overloaded{
                        [&b](const ExponentialLaw& e) { return e.rate == std::get<ExponentialLaw>(b.kind_).rate; },
                        [&b](const ErlangLaw& e) {
                          const auto& o = std::get<ErlangLaw>(b.kind_);
                          return e.shape == o.shape && e.rate == o.rate;
                        },
                        [&b](const UniformLaw& u) {
                          const auto& o = std::get<UniformLaw>(b.kind_);
                          return u.lo == o.lo && u.hi == o.hi;
                        },
                        [&b](const PiecewiseLinearLaw& p) {
                          const auto& o = std::get<PiecewiseLinearLaw>(b.kind_);
                          return p.x == o.x && p.cdf == o.cdf;
                        },
                        [&b](const ShiftedLaw& s) {
                          const auto& o = std::get<ShiftedLaw>(b.kind_);
                          return s.offset == o.offset && *s.inner == *o.inner;
                        },
                        [&b](const EquilibriumLaw& e) { return *e.base == *std::get<EquilibriumLaw>(b.kind_).base; },
                    },
                    a.kind_);
}

}  // namespace manyq
