#include "manyq/engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "manyq/errors.hpp"

namespace manyq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_ages(const std::vector<double>& ages, const char* what) {
  for (double a : ages) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw std::invalid_argument(std::string(what) + " must be finite and >= 0");
  }
}

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t v) noexcept {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffU;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

const char* to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::service_completion: return "service_completion";
    case EventKind::patience_expiry: return "patience_expiry";
    case EventKind::arrival: return "arrival";
  }
  return "unknown";
}

bool PendingEventLater::operator()(const PendingEvent& a, const PendingEvent& b) const noexcept {
  return std::tie(a.time, a.kind, a.customer) > std::tie(b.time, b.kind, b.customer);
}

SystemState::SystemState(ModelSpec model, std::uint64_t seed)
    : model_(std::move(model)),
      arrivals_rng_(stream_seed(seed, StreamId::arrivals)),
      services_rng_(stream_seed(seed, StreamId::services)),
      patience_rng_(stream_seed(seed, StreamId::patiences)) {}

std::optional<double> SystemState::next_event_time() const {
  if (events_.empty()) return std::nullopt;
  return events_.top().time;
}

const Customer* SystemState::customer(std::int64_t id) const {
  auto it = customers_.find(id);
  return it == customers_.end() ? nullptr : &it->second;
}

void SystemState::drop_stale_head() {
  while (!waiting_.empty()) {
    auto it = customers_.find(waiting_.front());
    if (it != customers_.end() && it->second.status == CustomerStatus::waiting) return;
    waiting_.pop_front();
  }
}

const Customer* SystemState::head_of_line() const {
  const_cast<SystemState*>(this)->drop_stale_head();
  if (waiting_.empty()) return nullptr;
  return customer(waiting_.front());
}

void SystemState::advance_to(double t) {
  if (t < clock_) throw std::invalid_argument("clock cannot move backwards");
  if (!events_.empty() && events_.top().time < t) throw std::logic_error("advance_to would skip a pending event");
  clock_ = t;
  nu_.advance_to(t);
  eta_.advance_to(t);
}

void SystemState::start_service(Customer& c) {
  c.status = CustomerStatus::in_service;
  c.service_start = clock_;
  nu_.add_key(clock_);
  ++counters_.K;
  schedule({clock_ + c.service_req, EventKind::service_completion, c.id});
}

void SystemState::maybe_release(std::int64_t id) {
  auto it = customers_.find(id);
  if (it == customers_.end()) return;
  const Customer& c = it->second;
  const bool done = c.status == CustomerStatus::departed || c.status == CustomerStatus::reneged;
  if (done && !c.eta_alive) customers_.erase(it);
}

SystemState init_state(const ModelSpec& model, const InitialCondition& initial, std::uint64_t seed) {
  if (model.n_servers < 1) throw std::invalid_argument("n_servers must be >= 1");
  check_ages(initial.service_ages, "service ages");
  check_ages(initial.queue_waits, "queue waits");
  check_ages(initial.extra_eta_ages, "potential waiting times");
  const auto n = static_cast<std::size_t>(model.n_servers);
  if (initial.service_ages.size() > n) throw std::invalid_argument("more customers in service than servers");
  if (!initial.queue_waits.empty() && initial.service_ages.size() != n) {
    throw std::invalid_argument("initial condition violates non-idling: customers wait while a server is free");
  }
  if (!initial.queue_waits.empty() && !initial.extra_eta_ages.empty()) {
    const double oldest_wait = *std::max_element(initial.queue_waits.begin(), initial.queue_waits.end());
    const double youngest_extra = *std::min_element(initial.extra_eta_ages.begin(), initial.extra_eta_ages.end());
    if (!(youngest_extra > oldest_wait)) {
      throw std::invalid_argument("potential waiting times of non-queued customers must exceed every queued wait (FCFS)");
    }
  }
  if (!initial.extra_eta_ages.empty() && !model.patience) {
    throw std::invalid_argument("extra potential waiting times need a patience law");
  }
  if (model.patience) {
    for (double w : initial.queue_waits) {
      if (!(model.patience->survival(w) > 0.0)) throw std::invalid_argument("queue wait beyond the patience support");
    }
    for (double w : initial.extra_eta_ages) {
      if (!(model.patience->survival(w) > 0.0)) throw std::invalid_argument("potential waiting time beyond the patience support");
    }
  }
  for (double a : initial.service_ages) {
    if (!(model.service.survival(a) > 0.0)) throw std::invalid_argument("service age beyond the service support");
  }
  if (!(initial.alpha_e >= 0.0) || !std::isfinite(initial.alpha_e)) throw std::invalid_argument("alpha_E must be >= 0");

  SystemState s(model, seed);
  RandomStream init_rng(stream_seed(seed, StreamId::initial));

  enum class Role { service, queue, eta_only };
  struct Entry {
    double age;
    Role role;
  };
  std::vector<Entry> entries;
  for (double a : initial.service_ages) entries.push_back({a, Role::service});
  for (double w : initial.queue_waits) entries.push_back({w, Role::queue});
  for (double w : initial.extra_eta_ages) entries.push_back({w, Role::eta_only});
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.age > b.age; });

  std::int64_t id = 1 - static_cast<std::int64_t>(entries.size());
  for (const Entry& e : entries) {
    Customer c;
    c.id = id++;
    c.arrival_time = -e.age;
    c.patience = kInf;
    switch (e.role) {
      case Role::service:
        c.status = CustomerStatus::in_service;
        c.service_start = -e.age;
        c.service_req = e.age + model.service.sample_residual(e.age, init_rng);
        s.nu_.add_key(c.service_start);
        s.schedule({c.service_start + c.service_req, EventKind::service_completion, c.id});
        ++s.X_;
        break;
      case Role::queue:
        c.status = CustomerStatus::waiting;
        c.service_req = model.service.sample(init_rng);
        s.eta_.add_key(c.arrival_time);
        s.waiting_.push_back(c.id);
        ++s.counters_.Q;
        ++s.X_;
        break;
      case Role::eta_only:
        c.status = CustomerStatus::departed;
        s.eta_.add_key(c.arrival_time);
        break;
    }
    if (e.role != Role::service && model.patience) {
      c.patience = e.age + model.patience->sample_residual(e.age, init_rng);
      c.eta_alive = true;
      s.schedule({c.arrival_time + c.patience, EventKind::patience_expiry, c.id});
    }
    s.customers_.emplace(c.id, c);
  }
  s.initial_queue_ = s.counters_.Q;
  s.initial_X_ = s.X_;

  double alpha = initial.alpha_e;
  if (initial.stationary_arrivals) alpha = equilibrium_interarrival(model.arrival).sample(s.arrivals_rng_);
  s.last_arrival_ = -alpha;
  s.schedule({model.arrival.sample_residual(alpha, s.arrivals_rng_), EventKind::arrival, s.next_id_});
  return s;
}

EventRecord step(SystemState& s) {
  if (s.events_.empty()) throw std::logic_error("step called with no pending event");
  const PendingEvent ev = s.events_.top();
  s.events_.pop();
  s.clock_ = ev.time;
  s.nu_.advance_to(ev.time);
  s.eta_.advance_to(ev.time);

  EventRecord rec;
  rec.time = ev.time;
  rec.kind = ev.kind;
  rec.customer = ev.customer;

  const auto n = static_cast<std::size_t>(s.model_.n_servers);
  switch (ev.kind) {
    case EventKind::arrival: {
      Customer c;
      c.id = s.next_id_++;
      c.arrival_time = s.clock_;
      c.service_req = s.model_.service.sample(s.services_rng_);
      c.patience = kInf;
      ++s.counters_.E;
      ++s.X_;
      s.last_arrival_ = s.clock_;
      s.eta_.add_key(c.arrival_time);
      if (s.model_.patience) {
        c.patience = s.model_.patience->sample(s.patience_rng_);
        c.eta_alive = true;
        s.schedule({c.arrival_time + c.patience, EventKind::patience_expiry, c.id});
      }
      auto [it, inserted] = s.customers_.emplace(c.id, c);
      (void)inserted;
      if (s.nu_.mass() < n) {
        s.start_service(it->second);
        rec.entered_service = c.id;
        rec.any_entry = true;
      } else {
        s.waiting_.push_back(c.id);
        ++s.counters_.Q;
      }
      s.schedule({s.clock_ + s.model_.arrival.sample(s.arrivals_rng_), EventKind::arrival, s.next_id_});
      break;
    }
    case EventKind::service_completion: {
      auto it = s.customers_.find(ev.customer);
      if (it == s.customers_.end()) throw std::logic_error("service completion for an unknown customer");
      Customer& c = it->second;
      s.nu_.remove_key(c.service_start);
      c.status = CustomerStatus::departed;
      ++s.counters_.D;
      --s.X_;
      s.maybe_release(ev.customer);
      if (s.counters_.Q > 0) {
        s.drop_stale_head();
        auto head = s.customers_.find(s.waiting_.front());
        s.waiting_.pop_front();
        --s.counters_.Q;
        s.start_service(head->second);
        rec.entered_service = head->first;
        rec.any_entry = true;
      }
      break;
    }
    case EventKind::patience_expiry: {
      auto it = s.customers_.find(ev.customer);
      if (it == s.customers_.end()) throw std::logic_error("patience expiry for an unknown customer");
      Customer& c = it->second;
      s.eta_.remove_key(c.arrival_time);
      c.eta_alive = false;
      ++s.counters_.S;
      if (c.status == CustomerStatus::waiting) {
        c.status = CustomerStatus::reneged;
        ++s.counters_.R;
        --s.counters_.Q;
        --s.X_;
        rec.was_in_queue = true;
      }
      s.maybe_release(ev.customer);
      break;
    }
  }

  rec.X = s.X_;
  rec.nu_mass = static_cast<std::int64_t>(s.nu_.mass());
  rec.eta_mass = static_cast<std::int64_t>(s.eta_.mass());
  rec.counters = s.counters_;
  return rec;
}

double head_of_line_wait(const SystemState& state) {
  const auto q = state.counters().Q;
  if (q <= 0) return 0.0;
  return state.eta().quantile(static_cast<double>(q));
}

AuditReport audit(const SystemState& s) {
  AuditReport r;
  const std::int64_t n = s.n_servers();
  const auto nu = static_cast<std::int64_t>(s.nu().mass());
  const Counters& c = s.counters();
  r.non_idling = (n - nu) - std::max<std::int64_t>(n - s.X(), 0);
  r.mass_balance = s.initial_queue() + c.E - (c.Q + c.R + c.K);
  r.bookkeeping = s.X() - nu - c.Q;
  r.population = s.X() - (s.initial_X() + c.E - c.D - c.R);
  r.capacity_ok = nu <= n;
  if (c.Q > 0) {
    if (static_cast<std::size_t>(c.Q) > s.eta().mass()) {
      r.queue_quantile = c.Q - static_cast<std::int64_t>(s.eta().mass());
      r.head_matches = false;
    } else {
      const double chi = head_of_line_wait(s);
      r.queue_quantile = c.Q - static_cast<std::int64_t>(s.eta().count_at_most(chi));
      const Customer* head = s.head_of_line();
      r.head_matches = head != nullptr && (s.clock() - head->arrival_time) == chi;
    }
  }
  return r;
}

std::string AuditReport::describe() const {
  std::ostringstream os;
  os << "non_idling=" << non_idling << " mass_balance=" << mass_balance << " bookkeeping=" << bookkeeping
     << " population=" << population << " queue_quantile=" << queue_quantile
     << " head_matches=" << (head_matches ? "true" : "false") << " capacity_ok=" << (capacity_ok ? "true" : "false");
  return os.str();
}

RunResult run(SystemState& state, double horizon, std::span<Observer* const> observers, const RunOptions& options) {
  if (!(horizon > state.clock())) throw std::invalid_argument("horizon must lie after the current clock");
  RunResult result;
  result.trajectory_hash = 0xcbf29ce484222325ULL;
  while (true) {
    const auto next = state.next_event_time();
    if (!next || *next > horizon) break;
    for (Observer* o : observers) o->advance(state, state.clock(), *next);
    const EventRecord rec = step(state);
    ++result.events;
    result.trajectory_hash = fnv1a(result.trajectory_hash, std::bit_cast<std::uint64_t>(rec.time));
    result.trajectory_hash = fnv1a(result.trajectory_hash, static_cast<std::uint64_t>(rec.kind));
    result.trajectory_hash = fnv1a(result.trajectory_hash, static_cast<std::uint64_t>(rec.customer));
    if (options.audit) {
      const AuditReport rep = audit(state);
      if (!rep.ok()) {
        if (result.audit_violations == 0) {
          std::ostringstream os;
          os << "t=" << rec.time << " " << to_string(rec.kind) << " customer " << rec.customer << ": " << rep.describe();
          result.first_violation = os.str();
        }
        ++result.audit_violations;
      }
    }
    for (Observer* o : observers) o->event(state, rec);
    if (result.events > options.max_events) {
      std::ostringstream os;
      os << "event cap of " << options.max_events << " exceeded at t=" << state.clock()
         << " (X=" << state.X() << ", pending=" << state.pending_events() << ")";
      throw SimulationError(os.str());
    }
  }
  for (Observer* o : observers) o->advance(state, state.clock(), horizon);
  state.advance_to(horizon);
  return result;
}

}  // namespace manyq
