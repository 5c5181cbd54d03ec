#pragma once

#include "hpcpred/trace.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hpcpred::exectime {

/// <user, request size, queue, group>.
struct TupleKey {
    std::int64_t userId = kUnknown;
    std::int64_t reqSize = 0;
    std::int64_t queueId = kUnknown;
    std::int64_t groupId = kUnknown;

    static TupleKey of(const JobRecord& j) { return {j.userId, j.reqSize, j.queueId, j.groupId}; }
    friend auto operator<=>(const TupleKey&, const TupleKey&) = default;
};

/// A finished job with the load other jobs put on the machine while it ran.
struct ExecSample {
    JobRecord job;
    double actualLoad = 0.0;

    [[nodiscard]] double exec() const { return static_cast<double>(job.runTime); }
};

/// exec(load) = intercept + slope * load, fitted for one tuple.
struct LoadFunction {
    TupleKey key;
    double slope = 0.0;
    double intercept = 0.0;
    double minLoad = 0.0;
    double maxLoad = 0.0;
    std::size_t points = 0;

    [[nodiscard]] double evaluate(double load) const { return intercept + slope * load; }
};

struct LoadFunctionParams {
    std::size_t topK = 25;
    std::size_t minJobs = 10;
    double minLoadSpread = 0.5;
    double maxGrowthPercent = 50.0;
    std::size_t loadBins = 20;
    /// Per-bin DBSCAN radius as a fraction of the bin's execution-time spread.
    double binEpsFraction = 0.15;
    std::size_t binMinPts = 2;
};

struct LoadFunctionBuild {
    std::vector<LoadFunction> functions;
    /// Tuples among the top k that produced no function, with the reason.
    std::vector<std::pair<TupleKey, std::string>> skipped;
};

LoadFunctionBuild build_load_functions(std::span<const ExecSample> validation, const LoadFunctionParams& params = {});

struct LoadPoint {
    double load = 0.0;
    double runtime = 0.0;
};

/// Longest chain i1 < i2 < ... (points sorted by load) with strictly
/// increasing loads, non-decreasing runtimes and per-step runtime growth of
/// at most maxGrowthPercent. Among longest chains the one with the smallest
/// runtime span wins, then the lexicographically smallest index sequence.
/// Returns indices into points.
std::vector<std::size_t> longest_nondecreasing_subsequence(std::span<const LoadPoint> points,
                                                           double maxGrowthPercent);

/// Least-squares line through the points; slope 0 for a single distinct load.
std::pair<double, double> fit_line(std::span<const LoadPoint> points);

/// Length of the relevant-history suffix of a chronological execution-time
/// list: starting at `initial` jobs, grow until the suffix's [min, max]
/// covers at least `overlap` of the full history's span.
std::size_t relevant_history_length(std::span<const double> execs, double overlap = 0.9, std::size_t initial = 10);

/// The relevant-history suffix itself.
std::vector<ExecSample> select_relevant_history(std::span<const ExecSample> history, double overlap = 0.9,
                                                std::size_t initial = 10);

struct TimeRange {
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] double length() const { return hi - lo; }
    [[nodiscard]] double midpoint() const { return 0.5 * (lo + hi); }
    [[nodiscard]] bool contains(double v) const { return lo <= v && v <= hi; }
    friend bool operator==(const TimeRange&, const TimeRange&) = default;
};

/// Shrinks a range symmetrically about its midpoint until its width is at
/// most `fraction` of the midpoint.
TimeRange compact_range(TimeRange r, double fraction = 0.2);

/// One range per relevant history job: each load function shifted through
/// the job's (load, exec) point and evaluated at predictedLoad, floored at 0,
/// spanned and compacted. With no functions the job's own execution time is
/// used.
std::vector<TimeRange> predict_ranges(std::span<const ExecSample> relevant, std::span<const LoadFunction> functions,
                                      double predictedLoad, double compaction = 0.2);

/// Overlap of two ranges as a fraction of the shorter one. Zero-length
/// ranges that touch the other range overlap fully.
double overlap_fraction(const TimeRange& a, const TimeRange& b);

/// Stack merge in order of lower limits: a range overlapping the stack top
/// by at least `threshold` is merged into it; a smaller overlap is cut off at
/// the top's upper limit. Output is sorted and pairwise disjoint (adjacent
/// ranges may share an endpoint).
std::vector<TimeRange> merge_ranges(std::vector<TimeRange> ranges, double threshold = 0.5);

struct WeightedRange {
    TimeRange range;
    double probability = 0.0;
};

struct ResponseRangeSet {
    std::vector<WeightedRange> ranges;

    [[nodiscard]] double total_length() const;
    [[nodiscard]] bool contains(double v) const;
    [[nodiscard]] double max_upper() const;
    /// Every range moved right by `offset` seconds.
    [[nodiscard]] ResponseRangeSet shifted(double offset) const;
};

inline constexpr std::size_t kMaxRanges = 25;

/// Disjoint, sorted, at most kMaxRanges ranges, probabilities summing to 1.
bool is_valid(const ResponseRangeSet& rs, double tolerance = 1e-9);

struct ProbabilityParams {
    std::size_t maxRanges = kMaxRanges;
    /// Total probability handed to ranges that no history job falls into.
    double newRangeMass = 0.1;
};

ResponseRangeSet assign_probabilities(std::span<const TimeRange> ranges, std::span<const double> historyExecs,
                                      const ProbabilityParams& params = {});

struct RangeSetParams {
    double relevantOverlap = 0.9;
    std::size_t relevantInitial = 10;
    double compaction = 0.2;
    double mergeThreshold = 0.5;
    ProbabilityParams probability;
};

/// Full pipeline for one target given its tuple's chronological history.
/// Throws ColdStartError when the history is empty.
ResponseRangeSet predict_rangeset(std::span<const ExecSample> keyHistory, std::span<const LoadFunction> functions,
                                  double predictedLoad, const RangeSetParams& params = {});

/// [min, max] of the history's execution times. Throws ColdStartError when empty.
TimeRange baseline_range(std::span<const double> execs);

/// Σ probability * midpoint.
double point_from_rangeset(const ResponseRangeSet& rs);

/// Chronological execution history grouped by tuple.
class ExecHistory {
public:
    void add(ExecSample sample);
    [[nodiscard]] std::span<const ExecSample> for_key(const TupleKey& key) const;
    /// Every sample of the user at this size across queues and groups, in
    /// submit order.
    [[nodiscard]] std::vector<ExecSample> for_user_size(std::int64_t userId, std::int64_t reqSize) const;
    [[nodiscard]] std::size_t size() const noexcept { return count_; }

private:
    std::map<TupleKey, std::vector<ExecSample>> byKey_;
    std::size_t count_ = 0;
};

/// "lo:hi:p|lo:hi:p|..."
std::string format_rangeset(const ResponseRangeSet& rs);
ResponseRangeSet parse_rangeset(std::string_view text);

/// userId, reqSize, queueId, groupId, slope, intercept, minLoad, maxLoad, points
void write_load_functions_csv(std::ostream& out, std::span<const LoadFunction> functions);
std::vector<LoadFunction> read_load_functions_csv(std::istream& in);

} // namespace hpcpred::exectime
