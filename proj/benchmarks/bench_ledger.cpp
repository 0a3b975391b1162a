#include <benchmark/benchmark.h>

#include <random>

#include "creditband/ledger.hpp"

using namespace creditband;

namespace {

void BM_RedistributeAndCap(benchmark::State& state) {
  LedgerConfig config;
  config.n = static_cast<std::size_t>(state.range(0));
  config.cap = 2.0 * config.total() / static_cast<double>(config.n);
  CreditLedger ledger = CreditLedger::uniform(config);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(config.n);
  for (auto _ : state) {
    for (std::size_t i = 0; i < config.n; ++i) x[i] = u(rng) * ledger.budgets[i];
    ledger = apply_cap(redistribute(ledger, x));
    benchmark::DoNotOptimize(ledger.budgets.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RedistributeAndCap)->Arg(2)->Arg(16)->Arg(256);

void BM_CapReflowCascade(benchmark::State& state) {
  // One gateway far above the cap spills over several rounds.
  LedgerConfig config;
  config.n = static_cast<std::size_t>(state.range(0));
  config.cap = 1.2 * config.total() / static_cast<double>(config.n);
  CreditLedger ledger = CreditLedger::uniform(config);
  const double moved = 0.5 * config.total();
  for (std::size_t i = 1; i < config.n; ++i) ledger.budgets[i] -= moved / static_cast<double>(config.n - 1);
  ledger.budgets[0] += moved;
  for (auto _ : state) {
    auto r = apply_cap_traced(ledger);
    benchmark::DoNotOptimize(r.iterations);
  }
}
BENCHMARK(BM_CapReflowCascade)->Arg(16)->Arg(256);

}  // namespace
