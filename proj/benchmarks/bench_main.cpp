#include <benchmark/benchmark.h>

#include "manyq/distribution.hpp"
#include "manyq/engine.hpp"
#include "manyq/fluid.hpp"
#include "manyq/invariant.hpp"
#include "manyq/mmn.hpp"

using namespace manyq;

namespace {

ModelSpec mm_m(int n, double rate) {
  ModelSpec m;
  m.n_servers = n;
  m.arrival = Distribution::exponential(rate);
  m.service = Distribution::exponential(1.0);
  m.patience = Distribution::exponential(1.0);
  return m;
}

void BM_EngineStep(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  SystemState s = init_state(mm_m(n, 1.2 * n), InitialCondition{}, 7);
  for (auto _ : st) benchmark::DoNotOptimize(step(s));
  st.SetItemsProcessed(st.iterations());
}
BENCHMARK(BM_EngineStep)->Arg(10)->Arg(100)->Arg(1000);

void BM_FluidErlang(benchmark::State& st) {
  FluidInput in;
  in.lambda = 1.0;
  in.x0 = 1.0;
  in.nu0 = InitialMeasure::dirac(0.0, 1.0);
  in.eta0 = InitialMeasure::dirac(0.0, 1.0);
  in.service = Distribution::erlang(2, 2.0);
  in.patience = Distribution::erlang(2, 2.0);
  const double delta = 1.0 / static_cast<double>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(solve_fluid(in, 10.0, delta));
}
BENCHMARK(BM_FluidErlang)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_RenewalDensity(benchmark::State& st) {
  const auto steps = static_cast<std::size_t>(st.range(0));
  const Distribution g = Distribution::erlang(2, 2.0);
  for (auto _ : st) benchmark::DoNotOptimize(renewal_density(g, 10.0 / static_cast<double>(steps), steps));
}
BENCHMARK(BM_RenewalDensity)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_MmnPmf(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(mmn_stationary_pmf(n, n - 1.0, mmn_truncation(n, n - 1.0)));
}
BENCHMARK(BM_MmnPmf)->Arg(100)->Arg(1000);

void BM_BLambda(benchmark::State& st) {
  const Distribution patience = Distribution::uniform(0.0, 2.0);
  for (auto _ : st) benchmark::DoNotOptimize(compute_B_lambda(patience, 1.5, 1e-10));
}
BENCHMARK(BM_BLambda);

}  // namespace

BENCHMARK_MAIN();
