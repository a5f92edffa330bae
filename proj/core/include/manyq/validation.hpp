#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace manyq {

struct Metric {
  std::string name;
  double value = 0.0;
  std::string op = "<=";  // "<=", ">=" or "==": how value was judged against limit
  double limit = 0.0;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::vector<Metric> metrics;
  std::string detail;  // first failure, or a short summary
};

struct ValidationOptions {
  std::uint64_t seed = 20240601;
  unsigned threads = 1;
};

CriterionResult check_exact_identities(const ValidationOptions& opt);
CriterionResult check_erlang_fluid(const ValidationOptions& opt);
CriterionResult check_renewal(const ValidationOptions& opt);
CriterionResult check_invariant_manifold(const ValidationOptions& opt);
CriterionResult check_mmn(const ValidationOptions& opt);
CriterionResult check_representation(const ValidationOptions& opt);
CriterionResult check_convergence(const ValidationOptions& opt);
CriterionResult check_interchange(const ValidationOptions& opt);
CriterionResult check_properties(const ValidationOptions& opt);

using CriterionFn = CriterionResult (*)(const ValidationOptions&);
/// The nine criteria in order.
std::vector<std::pair<int, CriterionFn>> acceptance_criteria();

/// Runs every criterion, calling `on_result` after each. Exceptions inside a
/// criterion count as a failure with the message as detail.
std::vector<CriterionResult> run_acceptance(const ValidationOptions& opt,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

/// "PASS [3] title: metric=value (limit) ..." on one line.
std::string format_result(const CriterionResult& r);

}  // namespace manyq
