#include <benchmark/benchmark.h>

#include "creditband/experiment_config.hpp"
#include "creditband/optimizer.hpp"
#include "creditband/sim.hpp"

using namespace creditband;

namespace {

HorizonProblem week_problem(std::size_t days) {
  ExperimentConfig config = default_experiment_config();
  config.days = days;
  config.learning_days = days - 1;
  const auto models = generate_models(config, load_app_profiles(config));
  HorizonProblem p;
  p.horizon = config.horizon();
  p.models = models;
  p.budgets.assign(config.ledger.n, config.ledger.total() / static_cast<double>(config.ledger.n));
  p.cap = config.ledger.cap;
  p.rate_per_credit = config.ledger.rate_per_credit();
  return p;
}

void BM_SolveGlobal(benchmark::State& state) {
  const HorizonProblem p = week_problem(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto sol = solve_global(p);
    benchmark::DoNotOptimize(sol.plan.objective);
  }
  state.counters["periods"] = static_cast<double>(p.horizon);
}
BENCHMARK(BM_SolveGlobal)->Arg(1)->Arg(7)->Unit(benchmark::kMillisecond);

void BM_SolveGateway(benchmark::State& state) {
  HorizonProblem full = week_problem(2);
  HorizonProblem p;
  p.horizon = 12;
  p.models = {full.models[0]};
  p.budgets = {10.0};
  p.cap = 32.0;
  p.rate_per_credit = full.rate_per_credit;
  p.inflow_forecast.assign(p.horizon, 8.0);
  for (auto _ : state) {
    auto plan = solve_gateway(p);
    benchmark::DoNotOptimize(plan.objective);
  }
}
BENCHMARK(BM_SolveGateway)->Unit(benchmark::kMicrosecond);

void BM_SolvePriorities(benchmark::State& state) {
  const auto params = default_app_params();
  double x = 0.5;
  for (auto _ : state) {
    auto split = solve_priorities(params, x);
    benchmark::DoNotOptimize(split.mu);
    x = x < 5.0 ? x + 0.01 : 0.5;
  }
}
BENCHMARK(BM_SolvePriorities);

}  // namespace
