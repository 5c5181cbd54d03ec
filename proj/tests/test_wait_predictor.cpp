#include "adversarial.hpp"
#include "hpcpred/error.hpp"
#include "hpcpred/wait_predictor.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace hpcpred::qwait {
namespace {

using testing::feature_state;

TEST(WaitPredictor, ColdStartThrows) {
    WaitPredictor p({});
    EXPECT_THROW((void)p.predict(feature_state(1, 0)), ColdStartError);
}

TEST(WaitPredictor, EachBranchIsReachable) {
    for (const auto& c : testing::wait_branch_suite()) {
        WaitPredictor p(c.config);
        for (const auto& h : c.history) {
            p.add_history(h);
        }
        const auto got = p.predict(c.target);
        EXPECT_EQ(got.model, c.expected) << c.name;
        EXPECT_GE(got.seconds, 0.0) << c.name;
    }
}

TEST(WaitPredictor, BranchValues) {
    const auto suite = testing::wait_branch_suite();
    auto run = [](const testing::WaitBranchCase& c) {
        WaitPredictor p(c.config);
        for (const auto& h : c.history) {
            p.add_history(h);
        }
        return p.predict(c.target);
    };
    EXPECT_DOUBLE_EQ(run(suite[0]).seconds, 500.0);
    EXPECT_EQ(run(suite[0]).neighborhood, NeighborhoodCase::DenseCluster);
    // Rising law 100 + 10 q at q = 1000; the ridge penalty shrinks it slightly.
    const auto ridge = run(suite[1]);
    EXPECT_EQ(ridge.neighborhood, NeighborhoodCase::FarNeighbors);
    EXPECT_NEAR(ridge.seconds, 10100.0, 101.0);
    // The five nearest of the falling law wait 10..50.
    const auto wa = run(suite[2]);
    EXPECT_GE(wa.seconds, 10.0);
    EXPECT_LE(wa.seconds, 50.0);
}

TEST(WaitPredictor, FeatureDistanceFollowsTheOnlyCorrelatedFeature) {
    const auto c = testing::wait_branch_suite()[1];
    WaitPredictor p(c.config);
    for (const auto& h : c.history) {
        p.add_history(h);
    }
    // Only the queued size varies, so it carries all the weight and the
    // distance is its range-normalized gap.
    EXPECT_DOUBLE_EQ(p.weights().feature[2], 1.0);
    const auto d = p.distances(c.target);
    ASSERT_EQ(d.size(), c.history.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        EXPECT_NEAR(d[i], (1000.0 - static_cast<double>(i)) / 1000.0, 1e-12);
    }
}

TEST(WaitPredictor, HistoryWindowIsBounded) {
    WaitPredictorConfig cfg;
    cfg.historySize = 10;
    WaitPredictor p(cfg);
    for (int i = 0; i < 25; ++i) {
        p.add_history({i, feature_state(1, i), 100.0 * i});
    }
    EXPECT_EQ(p.history_size(), 10u);
}

JobRecord job(std::int64_t id, Seconds submit, Seconds wait, Seconds run, std::int64_t size) {
    JobRecord j;
    j.jobId = id;
    j.submitTime = submit;
    j.waitTime = wait;
    j.runTime = run;
    j.ert = run;
    j.reqSize = size;
    return j;
}

TEST(EvaluateOnline, AdmitsOnlyStartedJobs) {
    const std::vector<JobRecord> jobs{job(1, 0, 100, 10, 2), job(2, 50, 0, 10, 1), job(3, 150, 5, 10, 2)};
    const auto samples = build_wait_samples(jobs, HistogramBinning::fit(jobs, 4));
    const auto out = evaluate_online(samples, {0, 3}, {});
    // Job 1 and job 2 see no started job yet; job 3 sees both.
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].jobId, 3);
    EXPECT_DOUBLE_EQ(out[0].actual, 5.0);
    EXPECT_DOUBLE_EQ(out[0].response, 15.0);
}

TEST(EvaluateOnline, RejectsRangePastTheEnd) {
    const std::vector<JobRecord> jobs{job(1, 0, 0, 10, 1)};
    const auto samples = build_wait_samples(jobs, HistogramBinning::fit(jobs, 4));
    EXPECT_THROW((void)evaluate_online(samples, {0, 2}, {}), InvalidArgument);
}

// Every job arrives to an empty machine with the same request, so both
// modes see identical states and the SDM answers exactly.
std::vector<WaitSample> constant_wait_samples() {
    std::vector<JobRecord> jobs;
    for (int i = 0; i < 40; ++i) {
        jobs.push_back(job(i + 1, i * 100, 30, 20, 2));
    }
    return build_wait_samples(jobs, HistogramBinning::fit(jobs, 6));
}

TEST(ChooseStatisticMode, EmptyTrainingDefaults) {
    const auto samples = constant_wait_samples();
    const auto c = choose_statistic_mode(samples, {5, 5}, {});
    EXPECT_TRUE(c.defaulted);
    EXPECT_EQ(c.mode, StatisticMode::FeatureSummary);
}

TEST(ChooseStatisticMode, TieGoesToFeatureSummary) {
    const auto samples = constant_wait_samples();
    const auto c = choose_statistic_mode(samples, {10, 40}, {});
    EXPECT_FALSE(c.defaulted);
    EXPECT_DOUBLE_EQ(c.aaeDistributions, 0.0);
    EXPECT_DOUBLE_EQ(c.aaeFeatureSummary, 0.0);
    EXPECT_EQ(c.mode, StatisticMode::FeatureSummary);
}

TEST(Diagnostics, CsvRows) {
    WaitOutcome o;
    o.jobId = 7;
    o.prediction = {12.5, WaitModel::Ridge, NeighborhoodCase::ScatteredNeighbors};
    o.actual = 10;
    o.response = 40;
    std::ostringstream out;
    write_wait_diagnostics_csv(out, std::vector<WaitOutcome>{o});
    EXPECT_EQ(out.str(), "jobId,modelUsed,neighborhood,prediction,actual,response\n7,ridge,C,12.5,10,40\n");
}

} // namespace
} // namespace hpcpred::qwait
