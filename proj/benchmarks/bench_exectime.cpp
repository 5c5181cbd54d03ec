#include "hpcpred/exectime.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace hpcpred::exectime;

std::vector<TimeRange> random_ranges(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 10000.0);
    std::vector<TimeRange> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = u(rng);
        out.push_back({lo, lo + u(rng) / 20.0});
    }
    return out;
}

void BM_MergeRanges(benchmark::State& state) {
    const auto ranges = random_ranges(static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(merge_ranges(ranges, 0.5));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MergeRanges)->RangeMultiplier(4)->Range(16, 4096)->Complexity(benchmark::oNLogN);

void BM_Lnds(benchmark::State& state) {
    std::mt19937_64 rng(2);
    std::vector<LoadPoint> pts;
    for (int i = 0; i < state.range(0); ++i) {
        pts.push_back({0.05 * i, 100.0 + static_cast<double>(rng() % 200)});
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(longest_nondecreasing_subsequence(pts, 50.0));
    }
}
BENCHMARK(BM_Lnds)->Arg(20)->Arg(200);

void BM_PredictRangeset(benchmark::State& state) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ExecSample> history;
    for (int i = 0; i < state.range(0); ++i) {
        ExecSample s;
        s.job.submitTime = i;
        s.job.runTime = static_cast<hpcpred::Seconds>(100 + rng() % 5000);
        s.actualLoad = u(rng);
        history.push_back(s);
    }
    std::vector<LoadFunction> functions(10);
    for (auto& f : functions) {
        f.slope = 500.0 * u(rng);
        f.intercept = 100.0 * u(rng);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(predict_rangeset(history, functions, 0.6));
    }
}
BENCHMARK(BM_PredictRangeset)->Arg(50)->Arg(1000);

} // namespace
