#include "hpcpred/error.hpp"
#include "hpcpred/exectime.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

namespace hpcpred::exectime {
namespace {

ExecSample sample(double exec, double load, std::int64_t user = 1, std::int64_t size = 4, Seconds submit = 0) {
    ExecSample s;
    s.job.jobId = submit + 1;
    s.job.submitTime = submit;
    s.job.runTime = static_cast<Seconds>(exec);
    s.job.userId = user;
    s.job.reqSize = size;
    s.actualLoad = load;
    return s;
}

TEST(LoadFunctions, RecoversExactLinearTuple) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ExecSample> v;
    for (int i = 0; i < 400; ++i) {
        const double load = u(rng);
        auto s = sample(0, load);
        s.job.runTime = 0;
        v.push_back(s);
    }
    // Runtimes are whole seconds, so keep the load exact and the runtime
    // rounded; the fit absorbs the rounding.
    for (auto& s : v) {
        s.job.runTime = static_cast<Seconds>(std::lround(100.0 + 200.0 * s.actualLoad));
    }
    const auto built = build_load_functions(v);
    ASSERT_EQ(built.functions.size(), 1u);
    EXPECT_NEAR(built.functions[0].slope, 200.0, 10.0);
    EXPECT_NEAR(built.functions[0].intercept, 100.0, 5.0);
}

TEST(LoadFunctions, TooFewJobsExcluded) {
    std::vector<ExecSample> v;
    for (int i = 0; i < 5; ++i) {
        v.push_back(sample(100 + 40 * i, 0.2 * i));
    }
    const auto built = build_load_functions(v);
    EXPECT_TRUE(built.functions.empty());
    ASSERT_EQ(built.skipped.size(), 1u);
}

TEST(LoadFunctions, NarrowLoadSpreadExcluded) {
    std::vector<ExecSample> v;
    for (int i = 0; i < 30; ++i) {
        v.push_back(sample(100 + i, 0.4 + 0.2 * i / 29.0));
    }
    const auto built = build_load_functions(v);
    EXPECT_TRUE(built.functions.empty());
    ASSERT_EQ(built.skipped.size(), 1u);
    EXPECT_EQ(built.skipped[0].second, "load spread below minimum");
}

TEST(Lnds, SinglePoint) {
    const std::vector<LoadPoint> p{{0.1, 100}};
    EXPECT_EQ(longest_nondecreasing_subsequence(p, 50), (std::vector<std::size_t>{0}));
}

TEST(Lnds, SkipsSteepStep) {
    const std::vector<LoadPoint> p{{0.1, 100}, {0.2, 140}, {0.3, 300}, {0.4, 150}};
    EXPECT_EQ(longest_nondecreasing_subsequence(p, 50), (std::vector<std::size_t>{0, 1, 3}));
}

TEST(Lnds, TieBreaksOnSmallerSpan) {
    // Both {0,1} and {0,2} have length 2; the second ends lower.
    const std::vector<LoadPoint> p{{0.1, 100}, {0.2, 140}, {0.3, 120}};
    EXPECT_EQ(longest_nondecreasing_subsequence(p, 50), (std::vector<std::size_t>{0, 2}));
}

TEST(Lnds, ZeroRuntimeOnlyChainsToZero) {
    const std::vector<LoadPoint> p{{0.1, 0}, {0.2, 0}, {0.3, 5}};
    EXPECT_EQ(longest_nondecreasing_subsequence(p, 50), (std::vector<std::size_t>{0, 1}));
}

TEST(FitLine, ClosedForm) {
    const std::vector<LoadPoint> p{{0, 1}, {1, 3}, {2, 5}};
    const auto [slope, intercept] = fit_line(p);
    EXPECT_DOUBLE_EQ(slope, 2.0);
    EXPECT_DOUBLE_EQ(intercept, 1.0);
    const std::vector<LoadPoint> flat{{0.5, 10}, {0.5, 20}};
    EXPECT_DOUBLE_EQ(fit_line(flat).first, 0.0);
    EXPECT_DOUBLE_EQ(fit_line(flat).second, 15.0);
}

TEST(RelevantHistory, StopsAtTenWhenCovered) {
    std::vector<double> e{200};
    for (int i = 0; i < 10; ++i) {
        e.push_back(100 + 95.0 * i / 9.0);
    }
    EXPECT_EQ(relevant_history_length(e), 10u);
}

TEST(RelevantHistory, ExtendsUntilNinetyPercent) {
    std::vector<double> e{200, 150};
    for (int i = 0; i < 10; ++i) {
        e.push_back(100 + 20.0 * i / 9.0);
    }
    EXPECT_EQ(relevant_history_length(e), 12u);
}

TEST(RelevantHistory, ShortHistoryIsKept) {
    const std::vector<double> e{5, 6, 7, 8};
    EXPECT_EQ(relevant_history_length(e), 4u);
    std::vector<ExecSample> h;
    for (double x : e) {
        h.push_back(sample(x, 0.1));
    }
    EXPECT_EQ(select_relevant_history(h).size(), 4u);
}

TEST(PredictRanges, ShiftedFunction) {
    const LoadFunction g{{}, 200, 100};
    const std::vector<LoadFunction> fs{g};
    const std::vector<ExecSample> h{sample(250, 0.5)};
    const auto r = predict_ranges(h, fs, 0.7);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_NEAR(r[0].lo, 290.0, 1e-9);
    EXPECT_NEAR(r[0].hi, 290.0, 1e-9);
}

TEST(PredictRanges, TwoFunctionsSpanned) {
    // At load 0 the job ran 250; the functions predict +30 and +50 at 0.1.
    const std::vector<LoadFunction> fs{{{}, 300, 0}, {{}, 500, 0}};
    const std::vector<ExecSample> h{sample(250, 0.0)};
    const auto r = predict_ranges(h, fs, 0.1);
    EXPECT_NEAR(r[0].lo, 280.0, 1e-9);
    EXPECT_NEAR(r[0].hi, 300.0, 1e-9);
}

TEST(PredictRanges, NoFunctionsUsesOwnExec) {
    const std::vector<ExecSample> h{sample(40, 0.3), sample(70, 0.9)};
    const auto r = predict_ranges(h, {}, 0.5);
    EXPECT_EQ(r[0], (TimeRange{40, 40}));
    EXPECT_EQ(r[1], (TimeRange{70, 70}));
}

TEST(PredictRanges, MonotoneInPredictedLoad) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<LoadFunction> fs;
        for (int k = 0; k < 3; ++k) {
            fs.push_back({{}, 500 * u(rng), 50 + 100 * u(rng)});
        }
        std::vector<ExecSample> h;
        for (int k = 0; k < 5; ++k) {
            h.push_back(sample(std::round(50 + 500 * u(rng)), u(rng)));
        }
        const double a = u(rng);
        const double b = a + (1.0 - a) * u(rng);
        const auto lo = predict_ranges(h, fs, a, 1e9);
        const auto hi = predict_ranges(h, fs, b, 1e9);
        for (std::size_t i = 0; i < h.size(); ++i) {
            EXPECT_LE(lo[i].lo, hi[i].lo + 1e-9);
            EXPECT_LE(lo[i].hi, hi[i].hi + 1e-9);
        }
    }
}

TEST(CompactRange, Example) {
    EXPECT_EQ(compact_range({100, 200}), (TimeRange{135, 165}));
    EXPECT_EQ(compact_range({280, 300}), (TimeRange{280, 300}));
}

TEST(CompactRange, KeepsMidpointNeverWidens) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1000.0);
    for (int i = 0; i < 1000; ++i) {
        double a = u(rng);
        double b = u(rng);
        const TimeRange r{std::min(a, b), std::max(a, b)};
        const auto c = compact_range(r);
        EXPECT_NEAR(c.midpoint(), r.midpoint(), 1e-9);
        EXPECT_LE(c.length(), r.length() + 1e-12);
        EXPECT_LE(c.length(), 0.2 * r.midpoint() + 1e-9);
    }
}

TEST(MergeRanges, Examples) {
    EXPECT_EQ(merge_ranges({{10, 20}}), (std::vector<TimeRange>{{10, 20}}));
    EXPECT_EQ(merge_ranges({{15, 25}, {10, 20}}), (std::vector<TimeRange>{{10, 25}}));
    EXPECT_EQ(merge_ranges({{10, 20}, {21, 30}}), (std::vector<TimeRange>{{10, 20}, {21, 30}}));
    // 2 of 10 overlap: cut at the earlier range's end.
    EXPECT_EQ(merge_ranges({{10, 20}, {18, 28}}), (std::vector<TimeRange>{{10, 20}, {20, 28}}));
    EXPECT_TRUE(merge_ranges({}).empty());
}

TEST(MergeRanges, DisjointSortedIdempotent) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<TimeRange> in;
        const std::size_t n = rng() % 30;
        for (std::size_t i = 0; i < n; ++i) {
            const double lo = u(rng);
            in.push_back({lo, lo + u(rng) / 5.0});
        }
        const auto out = merge_ranges(in);
        for (std::size_t i = 1; i < out.size(); ++i) {
            EXPECT_LE(out[i - 1].hi, out[i].lo);
        }
        EXPECT_EQ(merge_ranges(out), out);
        // Every input point is still covered.
        for (const auto& r : in) {
            for (double v : {r.lo, r.hi}) {
                EXPECT_TRUE(std::any_of(out.begin(), out.end(), [v](const TimeRange& o) { return o.contains(v); }));
            }
        }
    }
}

TEST(AssignProbabilities, Examples) {
    const std::vector<double> h{10, 12, 30};
    const std::vector<TimeRange> two{{9, 13}, {28, 32}};
    auto rs = assign_probabilities(two, h);
    ASSERT_EQ(rs.ranges.size(), 2u);
    EXPECT_NEAR(rs.ranges[0].probability, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(rs.ranges[1].probability, 1.0 / 3.0, 1e-12);

    const std::vector<TimeRange> three{{9, 13}, {28, 32}, {50, 60}};
    rs = assign_probabilities(three, h);
    EXPECT_NEAR(rs.ranges[0].probability, 0.6, 1e-12);
    EXPECT_NEAR(rs.ranges[1].probability, 0.3, 1e-12);
    EXPECT_NEAR(rs.ranges[2].probability, 0.1, 1e-12);

    const std::vector<TimeRange> all{{0, 100}};
    EXPECT_DOUBLE_EQ(assign_probabilities(all, h).ranges[0].probability, 1.0);
}

TEST(AssignProbabilities, KeepsTwentyFiveMostLikely) {
    std::vector<TimeRange> ranges;
    std::vector<double> h;
    for (int i = 0; i < 40; ++i) {
        ranges.push_back({i * 10.0, i * 10.0 + 5});
        for (int k = 0; k <= i % 4; ++k) {
            h.push_back(i * 10.0 + 1);
        }
    }
    const auto rs = assign_probabilities(ranges, h);
    EXPECT_EQ(rs.ranges.size(), kMaxRanges);
    EXPECT_TRUE(is_valid(rs));
}

TEST(PredictRangeset, SingleJobSingleRange) {
    const std::vector<ExecSample> h{sample(120, 0.4)};
    const std::vector<LoadFunction> fs{{{}, 100, 80}};
    const auto rs = predict_rangeset(h, fs, 0.4);
    ASSERT_EQ(rs.ranges.size(), 1u);
    EXPECT_DOUBLE_EQ(rs.ranges[0].probability, 1.0);
    EXPECT_TRUE(is_valid(rs));
}

TEST(PredictRangeset, TwoApplicationsByHand) {
    // A short and a long application alternate under one tuple.
    std::vector<ExecSample> h;
    const double execs[] = {100, 1000, 100, 1000, 100};
    for (std::size_t i = 0; i < 5; ++i) {
        h.push_back(sample(execs[i], 0.5, 1, 4, static_cast<Seconds>(i)));
    }
    const auto rs = predict_rangeset(h, {}, 0.5);
    ASSERT_EQ(rs.ranges.size(), 2u);
    EXPECT_EQ(rs.ranges[0].range, (TimeRange{100, 100}));
    EXPECT_EQ(rs.ranges[1].range, (TimeRange{1000, 1000}));
    EXPECT_NEAR(rs.ranges[0].probability, 0.6, 1e-12);
    EXPECT_NEAR(rs.ranges[1].probability, 0.4, 1e-12);
}

TEST(PredictRangeset, ColdStart) {
    EXPECT_THROW((void)predict_rangeset({}, {}, 0.5), ColdStartError);
    EXPECT_THROW((void)baseline_range({}), ColdStartError);
}

TEST(BaselineRange, MinMax) {
    EXPECT_EQ(baseline_range(std::vector<double>{100}), (TimeRange{100, 100}));
    EXPECT_EQ(baseline_range(std::vector<double>{80, 50, 200}), (TimeRange{50, 200}));
    std::mt19937_64 rng(6);
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> v(1 + rng() % 20);
        for (auto& x : v) {
            x = static_cast<double>(rng() % 10000);
        }
        double lo = v[0];
        double hi = v[0];
        for (double x : v) {
            lo = x < lo ? x : lo;
            hi = x > hi ? x : hi;
        }
        EXPECT_EQ(baseline_range(v), (TimeRange{lo, hi}));
    }
}

TEST(PointFromRangeset, Examples) {
    EXPECT_DOUBLE_EQ(point_from_rangeset({{{{10, 20}, 1.0}}}), 15.0);
    EXPECT_DOUBLE_EQ(point_from_rangeset({{{{10, 20}, 0.5}, {{30, 40}, 0.5}}}), 25.0);
    EXPECT_DOUBLE_EQ(point_from_rangeset({{{{7, 7}, 0.25}, {{7, 7}, 0.75}}}), 7.0);
}

TEST(RangesetText, RoundTrip) {
    const ResponseRangeSet rs{{{{10, 20.5}, 0.25}, {{30, 40}, 0.75}}};
    const auto text = format_rangeset(rs);
    EXPECT_EQ(text, "10:20.5:0.25|30:40:0.75");
    const auto back = parse_rangeset(text);
    ASSERT_EQ(back.ranges.size(), 2u);
    EXPECT_EQ(back.ranges[1].range, (TimeRange{30, 40}));
    EXPECT_DOUBLE_EQ(back.ranges[0].probability, 0.25);
}

TEST(LoadFunctionCsv, RoundTrip) {
    const std::vector<LoadFunction> fs{{{3, 16, 1, 2}, 200.5, 99.25, 0.05, 0.95, 12}};
    std::stringstream buf;
    write_load_functions_csv(buf, fs);
    const auto back = read_load_functions_csv(buf);
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0].key, fs[0].key);
    EXPECT_DOUBLE_EQ(back[0].slope, 200.5);
    EXPECT_DOUBLE_EQ(back[0].intercept, 99.25);
    EXPECT_EQ(back[0].points, 12u);
}

TEST(ExecHistory, GroupsByTupleAndUserSize) {
    ExecHistory h;
    auto a = sample(10, 0.1, 1, 4, 5);
    auto b = sample(20, 0.1, 1, 4, 3);
    b.job.queueId = 2;
    h.add(a);
    h.add(b);
    h.add(sample(30, 0.1, 2, 4, 1));
    EXPECT_EQ(h.size(), 3u);
    EXPECT_EQ(h.for_key(TupleKey::of(a.job)).size(), 1u);
    const auto us = h.for_user_size(1, 4);
    ASSERT_EQ(us.size(), 2u);
    EXPECT_EQ(us[0].job.submitTime, 3);
    EXPECT_TRUE(h.for_key({9, 9, 9, 9}).empty());
}

} // namespace
} // namespace hpcpred::exectime
