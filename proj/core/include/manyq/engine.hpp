#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "manyq/distribution.hpp"
#include "manyq/point_measure.hpp"
#include "manyq/random.hpp"

namespace manyq {

/// Initial content of the system at time 0.
///
/// `service_ages` are elapsed service times of customers in service;
/// `queue_waits` are waiting times of queued customers; `extra_eta_ages` are
/// potential waiting times of customers that are no longer (or never were
/// known to be) queued but whose patience has not run out. The latter must be
/// older than every queued customer so the FCFS order stays consistent.
struct InitialCondition {
  std::vector<double> service_ages;
  std::vector<double> queue_waits;
  std::vector<double> extra_eta_ages;
  double alpha_e = 0.0;              // time since the last arrival
  bool stationary_arrivals = false;  // draw (alpha_E, first arrival) from the stationary renewal law
};

struct ModelSpec {
  int n_servers = 1;
  Distribution arrival = Distribution::exponential(1.0);
  Distribution service = Distribution::exponential(1.0);
  std::optional<Distribution> patience;  // nullopt: no abandonment
};

enum class EventKind : std::uint8_t { service_completion = 0, patience_expiry = 1, arrival = 2 };

const char* to_string(EventKind kind) noexcept;

enum class CustomerStatus : std::uint8_t { waiting, in_service, departed, reneged };

struct Customer {
  std::int64_t id = 0;
  double arrival_time = 0.0;
  double patience = 0.0;      // r; +inf without abandonment
  double service_req = 0.0;   // v
  double service_start = 0.0;
  CustomerStatus status = CustomerStatus::waiting;
  bool eta_alive = false;     // patience clock still running (eta atom will be removed by an event)
};

/// Cumulative counters. Q is the current queue length, the rest count events
/// since time 0.
struct Counters {
  std::int64_t E = 0;  // arrivals
  std::int64_t Q = 0;  // customers waiting
  std::int64_t R = 0;  // reneged from queue
  std::int64_t S = 0;  // potential waiting times that reached the patience
  std::int64_t D = 0;  // service completions
  std::int64_t K = 0;  // entries into service
};

struct EventRecord {
  double time = 0.0;
  EventKind kind = EventKind::arrival;
  std::int64_t customer = 0;
  bool was_in_queue = false;          // patience expiry of a waiting customer
  std::int64_t entered_service = -1;  // id of customer that started service, if any
  bool any_entry = false;
  std::int64_t X = 0;
  std::int64_t nu_mass = 0;
  std::int64_t eta_mass = 0;
  Counters counters;
};

struct PendingEvent {
  double time;
  EventKind kind;
  std::int64_t customer;
};

/// Earliest time first; ties by kind (service_completion < patience_expiry <
/// arrival) then customer id.
struct PendingEventLater {
  bool operator()(const PendingEvent& a, const PendingEvent& b) const noexcept;
};

/// State descriptor (alpha_E, X, nu, eta) of one replication plus the
/// per-customer records, pending events and private random streams.
class SystemState {
 public:
  double clock() const noexcept { return clock_; }
  double alpha_e() const noexcept { return clock_ - last_arrival_; }
  std::int64_t X() const noexcept { return X_; }
  int n_servers() const noexcept { return model_.n_servers; }
  const PointMeasure& nu() const noexcept { return nu_; }
  const PointMeasure& eta() const noexcept { return eta_; }
  const Counters& counters() const noexcept { return counters_; }
  std::int64_t initial_queue() const noexcept { return initial_queue_; }
  std::int64_t initial_X() const noexcept { return initial_X_; }
  const ModelSpec& model() const noexcept { return model_; }
  bool abandonment() const noexcept { return model_.patience.has_value(); }

  std::size_t pending_events() const noexcept { return events_.size(); }
  std::optional<double> next_event_time() const;
  const Customer* customer(std::int64_t id) const;
  /// Customer at the head of the FCFS queue, if any.
  const Customer* head_of_line() const;
  std::size_t live_customers() const noexcept { return customers_.size(); }

  /// Advance the clock without an event (no event may be pending before t).
  void advance_to(double t);

 private:
  friend SystemState init_state(const ModelSpec&, const InitialCondition&, std::uint64_t);
  friend EventRecord step(SystemState&);

  SystemState(ModelSpec model, std::uint64_t seed);

  void schedule(PendingEvent e) { events_.push(e); }
  void start_service(Customer& c);
  void drop_stale_head();
  void maybe_release(std::int64_t id);

  ModelSpec model_;
  double clock_ = 0.0;
  double last_arrival_ = 0.0;
  std::int64_t X_ = 0;
  std::int64_t initial_queue_ = 0;
  std::int64_t initial_X_ = 0;
  std::int64_t next_id_ = 1;
  PointMeasure nu_;
  PointMeasure eta_;
  Counters counters_;
  std::unordered_map<std::int64_t, Customer> customers_;
  mutable std::deque<std::int64_t> waiting_;  // arrival order; may hold stale ids
  std::priority_queue<PendingEvent, std::vector<PendingEvent>, PendingEventLater> events_;
  RandomStream arrivals_rng_;
  RandomStream services_rng_;
  RandomStream patience_rng_;
};

/// Builds the time-0 state. Initial customers get ids -E0+1 .. 0, oldest
/// first. Residual service and patience clocks are drawn from the laws
/// conditioned on the given ages; the first arrival from F(alpha + .)/(1 - F(alpha)),
/// with alpha itself drawn from the equilibrium law when stationary arrivals
/// are requested.
SystemState init_state(const ModelSpec& model, const InitialCondition& initial, std::uint64_t seed);

/// Processes the next pending event. Throws std::logic_error if none is pending.
EventRecord step(SystemState& state);

/// Waiting time of the head-of-line customer, quantile(eta, Q); 0 if Q = 0.
double head_of_line_wait(const SystemState& state);

struct AuditReport {
  std::int64_t non_idling = 0;     // (N - <1,nu>) - [N - X]^+
  std::int64_t mass_balance = 0;   // Q(0) + E - (Q + R + K)
  std::int64_t bookkeeping = 0;    // X - <1,nu> - Q
  std::int64_t population = 0;     // X - (X(0) + E - D - R)
  std::int64_t queue_quantile = 0; // Q - eta[0, chi]
  bool head_matches = true;        // chi equals the FCFS head's waiting time
  bool capacity_ok = true;         // <1,nu> <= N

  bool ok() const noexcept {
    return non_idling == 0 && mass_balance == 0 && bookkeeping == 0 && population == 0 && queue_quantile == 0 &&
           head_matches && capacity_ok;
  }
  std::string describe() const;
};

AuditReport audit(const SystemState& state);

/// Receives the state between events. `advance` covers [from, to) during
/// which X, <1,nu>, <1,eta> and the counters are constant.
class Observer {
 public:
  virtual ~Observer() = default;
  virtual void advance(const SystemState& /*state*/, double /*from*/, double /*to*/) {}
  virtual void event(const SystemState& /*state*/, const EventRecord& /*record*/) {}
};

struct RunOptions {
  bool audit = true;
  std::uint64_t max_events = 500'000'000;
};

struct RunResult {
  std::uint64_t events = 0;
  std::uint64_t audit_violations = 0;
  std::string first_violation;
  std::uint64_t trajectory_hash = 0;  // FNV-1a over (time, kind, customer) of every event
};

/// Steps until the next event lies beyond `horizon`, then advances the clock
/// to `horizon`. Throws SimulationError when max_events is exceeded.
RunResult run(SystemState& state, double horizon, std::span<Observer* const> observers, const RunOptions& options = {});

}  // namespace manyq
