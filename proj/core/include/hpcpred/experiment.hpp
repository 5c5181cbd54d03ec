#pragma once

#include "hpcpred/config.hpp"
#include "hpcpred/exectime.hpp"
#include "hpcpred/metrics.hpp"
#include "hpcpred/policy_sim.hpp"
#include "hpcpred/trace.hpp"
#include "hpcpred/wait_predictor.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace hpcpred {

/// A parsed and filtered trace with its machine size and split.
struct LoadedTrace {
    std::string name;
    TraceHeader header;
    std::size_t parsedJobs = 0;
    std::vector<JobRecord> jobs;
    std::vector<Rejection> rejected;
    std::int64_t processors = 0;
    TraceSplit split;
};

LoadedTrace load_trace(const ExperimentConfig& config);
/// Same, for jobs already in memory (the split is resolved against them).
LoadedTrace prepare_trace(std::string name, Trace trace, const ExperimentConfig& config);

struct WaitReport {
    qwait::ModeChoice mode;
    std::vector<qwait::WaitOutcome> outcomes;
    double aae = 0.0;
    double scaledAae = 0.0;
    std::array<metrics::WaitClass, metrics::kWaitClasses> classes{};
};

/// Online wait prediction over the test split, history admitted from the
/// start of the history split onward.
WaitReport run_predict_wait(const LoadedTrace& trace, const ExperimentConfig& config);

struct ExecJobResult {
    std::int64_t jobId = 0;
    double actual = 0.0;
    double predictedLoad = 0.0;
    exectime::ResponseRangeSet rangeSet;
    exectime::TimeRange baseline;
};

struct ExecReport {
    std::vector<ExecJobResult> jobs;
    metrics::SuccessCoverage rangeSet;
    metrics::SuccessCoverage baseline;
    /// Test jobs with no earlier completed job of the same tuple.
    std::size_t coldStart = 0;
    std::vector<exectime::LoadFunction> functions;
    double pointAae = 0.0;
};

/// Load functions from the validation split; a rangeSet for every test job
/// whose tuple has completed jobs before its submission.
ExecReport run_predict_exec(const LoadedTrace& trace, const ExperimentConfig& config);

struct SimReport {
    policy::PolicyRun run;
    metrics::PolicySummary summary;
    std::vector<metrics::CpuHourClass> cpuHours;
    std::vector<metrics::LoadPoint> load;
};

/// Warms the predictors on the first sim.history-fraction of the jobs and
/// simulates the rest (capped by sim.max-jobs).
SimReport run_policy_simulation(const LoadedTrace& trace, const ExperimentConfig& config, policy::Policy p);

/// Coordinate-descent sweep of the configured tune.* grids, scored by the
/// wait predictor's AAE on the validation split.
metrics::TuneResult run_tune(const LoadedTrace& trace, const ExperimentConfig& config);

void write_wait_report(const std::filesystem::path& dir, const WaitReport& r);
void write_exec_report(const std::filesystem::path& dir, const ExecReport& r);
void write_sim_report(const std::filesystem::path& dir, const SimReport& r);
void write_tune_report(const std::filesystem::path& dir, const metrics::TuneResult& r, const ExperimentConfig& base);

/// Runs config.mode and writes its CSVs under config.outputDir. Returns
/// human-readable summary lines.
std::vector<std::string> run_experiment(const ExperimentConfig& config);

/// Every mode on one trace plus table-shaped summaries:
/// table_wait.csv, table_mold.csv, table_delay.csv, table_exec.csv.
std::vector<std::string> run_report(const ExperimentConfig& config);

} // namespace hpcpred
