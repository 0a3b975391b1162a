#include <benchmark/benchmark.h>

#include "creditband/ratelimit.hpp"

using namespace creditband;

namespace {

void BM_FluidSimulate(benchmark::State& state) {
  for (auto _ : state) {
    auto run = fluid_simulate(FluidFlowState::start(8.0, 0.06, 4.0), 1e-3, 5.0, 0.01, 100);
    benchmark::DoNotOptimize(run.final.F);
  }
}
BENCHMARK(BM_FluidSimulate)->Unit(benchmark::kMicrosecond);

void BM_ScheduleReads(benchmark::State& state) {
  std::vector<ConnectionSpec> conns(static_cast<std::size_t>(state.range(0)));
  for (std::size_t c = 0; c < conns.size(); ++c) conns[c].alpha = 1.0 / static_cast<double>(1 + c % 4);
  for (auto _ : state) {
    auto r = schedule_reads(conns, 2.0, 20.0);
    benchmark::DoNotOptimize(r.reads);
  }
}
BENCHMARK(BM_ScheduleReads)->Arg(2)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace
