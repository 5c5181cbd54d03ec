#include "hpcpred/sched.hpp"
#include "hpcpred/synth.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace hpcpred;

void BM_EasySimulation(benchmark::State& state) {
    const auto jobs = sched::to_sim_jobs(synth::random_jobs(static_cast<std::size_t>(state.range(0)), 256, 5));
    for (auto _ : state) {
        benchmark::DoNotOptimize(sched::run_simulation(jobs, 256));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EasySimulation)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

} // namespace
