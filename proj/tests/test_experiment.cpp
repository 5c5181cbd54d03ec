#include "hpcpred/config.hpp"
#include "hpcpred/csv.hpp"
#include "hpcpred/error.hpp"
#include "hpcpred/experiment.hpp"
#include "hpcpred/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

namespace hpcpred {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("hpcpred_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

double summary_value(const fs::path& file, const std::string& metric) {
    const auto t = csv::read_file(file.string());
    for (const auto& row : t.rows) {
        if (row.at(0) == metric) {
            return std::stod(row.at(1));
        }
    }
    throw std::runtime_error("metric " + metric + " missing from " + file.string());
}

TEST(Experiment, ToyBaselineMatchesHandSchedule) {
    const auto dir = scratch("toy");
    ExperimentConfig c;
    c.set("trace", std::string(HPCPRED_DATA_DIR) + "/toy.swf");
    c.set("output", dir.string());
    c.set("mode", "simulate-baseline");
    c.set("sim.history-fraction", "0");
    const auto lines = run_experiment(c);
    EXPECT_FALSE(lines.empty());

    const auto jobs = csv::read_file((dir / "sim_baseline_jobs.csv").string());
    ASSERT_EQ(jobs.rows.size(), 3u);
    const Seconds expectedStart[] = {0, 100, 20};
    const Seconds expectedEnd[] = {100, 150, 80};
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_DOUBLE_EQ(jobs.number(i, "jobId"), static_cast<double>(i + 1));
        EXPECT_DOUBLE_EQ(jobs.number(i, "start"), static_cast<double>(expectedStart[i]));
        EXPECT_DOUBLE_EQ(jobs.number(i, "end"), static_cast<double>(expectedEnd[i]));
    }
    const auto rejected = csv::read_file((dir / "rejections.csv").string());
    ASSERT_EQ(rejected.rows.size(), 1u);
    EXPECT_EQ(rejected.rows[0][0], "4");
    EXPECT_DOUBLE_EQ(summary_value(dir / "sim_baseline_summary.csv", "avg_response"), (100.0 + 140.0 + 60.0) / 3.0);
    fs::remove_all(dir);
}

TEST(Experiment, WaitSummaryAgreesWithPredictions) {
    const auto dir = scratch("wait");
    synth::SizeWaitParams p;
    p.jobs = 600;
    ExperimentConfig c;
    c.set("output", dir.string());
    c.set("split.history", "0:200");
    c.set("split.validation", "200:300");
    c.set("split.test", "300:600");
    const auto t = prepare_trace("size-wait", synth::size_dependent_wait_trace(p), c);
    const auto r = run_predict_wait(t, c);
    write_wait_report(dir, r);

    const auto rows = csv::read_file((dir / "wait_predictions.csv").string());
    ASSERT_EQ(rows.rows.size(), r.outcomes.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < rows.rows.size(); ++i) {
        sum += std::abs(rows.number(i, "prediction") - rows.number(i, "actual"));
    }
    EXPECT_NEAR(summary_value(dir / "wait_summary.csv", "aae"), sum / static_cast<double>(rows.rows.size()), 1e-9);
    EXPECT_TRUE(fs::exists(dir / "wait_classes.csv"));
    fs::remove_all(dir);
}

TEST(Experiment, ExecReportWritesFiles) {
    const auto dir = scratch("exec");
    synth::LinearLoadParams p;
    p.testJobs = 200;
    const auto w = synth::linear_load_workload(p);
    ExperimentConfig c;
    c.split = w.split;
    const auto t = prepare_trace("linear", w.trace, c);
    const auto r = run_predict_exec(t, c);
    write_exec_report(dir, r);
    for (const char* f : {"exec_predictions.csv", "exec_summary.csv", "load_functions.csv"}) {
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    }
    EXPECT_EQ(summary_value(dir / "exec_summary.csv", "jobs"), static_cast<double>(r.jobs.size()));
    fs::remove_all(dir);
}

TEST(Experiment, MissingTraceIsConfigError) {
    ExperimentConfig c;
    c.set("mode", "predict-wait");
    EXPECT_THROW((void)run_experiment(c), ConfigError);
}

} // namespace
} // namespace hpcpred
