#pragma once

#include "hpcpred/exectime.hpp"
#include "hpcpred/policy_sim.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace hpcpred::metrics {

/// Mean |pred - actual|. Throws InvalidArgument on a length mismatch; 0 for
/// empty input.
double aae(std::span<const double> preds, std::span<const double> actuals);

/// Mean of |pred - actual| / response. Responses must be positive.
double scaled_aae(std::span<const double> preds, std::span<const double> actuals, std::span<const double> responses);

struct WaitClass {
    double lo = 0.0;
    /// Exclusive; infinity for the last class.
    double hi = 0.0;
    std::size_t count = 0;
    double aae = 0.0;
};

inline constexpr std::size_t kWaitClasses = 5;

/// AAE per actual-wait class [0,100), [100,1000), [1000,1e4), [1e4,1e5), [1e5,inf).
std::array<WaitClass, kWaitClasses> class_errors(std::span<const double> preds, std::span<const double> actuals);

struct SuccessCoverage {
    std::size_t jobs = 0;
    std::size_t successes = 0;
    double successRate = 0.0;
    /// Mean over jobs with a positive baseline length of
    /// 100 * rangeSet length / baseline length.
    double coverage = 0.0;
    std::size_t coverageJobs = 0;
    std::size_t zeroBaseline = 0;
};

SuccessCoverage success_and_coverage(std::span<const exectime::ResponseRangeSet> rangeSets,
                                     std::span<const double> actuals, std::span<const exectime::TimeRange> baselines);

/// One parameter of a coordinate-descent sweep.
struct TuneParameter {
    std::string name;
    std::vector<double> grid;
};

struct SweepRow {
    std::string parameter;
    double value = 0.0;
    double score = 0.0;
    bool chosen = false;
};

struct TuneResult {
    std::map<std::string, double> best;
    double bestScore = 0.0;
    std::vector<SweepRow> rows;
};

using Evaluator = std::function<double(const std::map<std::string, double>&)>;

/// Single pass of coordinate descent: parameters are visited in order, each
/// swept over its grid with the others held at their current values, and
/// fixed at the value with the lowest score (first on ties). Throws
/// InvalidArgument on an empty grid.
TuneResult tune(std::map<std::string, double> start, std::span<const TuneParameter> parameters,
                const Evaluator& evaluate);

/// parameter,value,aae,chosen
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

struct PolicySummary {
    std::size_t jobs = 0;
    double avgWait = 0.0;
    double avgRun = 0.0;
    double avgResponse = 0.0;
    double utilization = 0.0;
};

/// Averages in seconds; utilization over [first submit, last end].
PolicySummary summarize(std::span<const policy::JobOutcome> jobs, std::int64_t processors);

struct CpuHourClass {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    double avgResponse = 0.0;
};

/// Mean response per class of the original job's CPU hours
/// (originalReqSize * original runtime / 3600): [0,1), [1,10), [10,100),
/// [100,1000), [1000,inf). `cpuHours` is aligned with `jobs`.
std::vector<CpuHourClass> response_by_cpu_hours(std::span<const policy::JobOutcome> jobs,
                                                std::span<const double> cpuHours);

struct LoadPoint {
    Seconds from = 0;
    double load = 0.0;
};

/// Busy fraction per interval from the first submit to the last end.
std::vector<LoadPoint> load_series(std::span<const policy::JobOutcome> jobs, std::int64_t processors,
                                   Seconds interval = 1800);

} // namespace hpcpred::metrics
