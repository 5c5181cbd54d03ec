#include "hpcpred/wait_predictor.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace hpcpred::qwait;

JobState random_state(std::mt19937_64& rng) {
    JobState s;
    for (auto& f : s.features) {
        f = static_cast<double>(rng() % 1000);
    }
    s.features[0] = static_cast<double>(1 << (rng() % 7));
    return s;
}

void BM_WaitPredict(benchmark::State& state) {
    std::mt19937_64 rng(4);
    WaitPredictorConfig cfg;
    cfg.weightStride = 1000;
    WaitPredictor p(cfg);
    for (int i = 0; i < state.range(0); ++i) {
        const auto s = random_state(rng);
        p.add_history({i, s, 10.0 * s.features[2] + static_cast<double>(rng() % 500)});
    }
    const auto target = random_state(rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(p.predict(target));
    }
}
BENCHMARK(BM_WaitPredict)->Arg(500)->Arg(4000)->Unit(benchmark::kMicrosecond);

} // namespace
