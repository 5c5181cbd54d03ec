#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hpcpred {

/// Whole seconds. Every event time in the library is integral.
using Seconds = std::int64_t;

/// SWF uses -1 for "field not recorded".
inline constexpr std::int64_t kUnknown = -1;

enum class JobStatus { Completed, Failed, Cancelled, Other };

/// One job of a Standard Workload Format trace, reduced to the fields the
/// predictors and the simulator consume.
struct JobRecord {
    std::int64_t jobId = 0;
    Seconds submitTime = 0;
    Seconds waitTime = 0;
    Seconds runTime = 0;
    std::int64_t reqSize = 1;
    /// User-estimated runtime. When the trace has no estimate this holds
    /// runTime and ertKnown is false.
    Seconds ert = 0;
    bool ertKnown = true;
    std::int64_t userId = kUnknown;
    std::int64_t groupId = kUnknown;
    std::int64_t queueId = kUnknown;
    JobStatus status = JobStatus::Completed;

    [[nodiscard]] Seconds startTime() const noexcept { return submitTime + waitTime; }
    [[nodiscard]] Seconds endTime() const noexcept { return startTime() + runTime; }
    [[nodiscard]] Seconds responseTime() const noexcept { return waitTime + runTime; }

    friend bool operator==(const JobRecord&, const JobRecord&) = default;
};

/// Header comment lines of an SWF file.
struct TraceHeader {
    std::vector<std::string> comments;
    std::optional<std::int64_t> maxProcs;
};

struct Trace {
    TraceHeader header;
    std::vector<JobRecord> jobs;
};

/// Parses SWF v2 text. Records come back stably sorted by submit time.
/// Throws ParseError carrying the offending line number.
Trace parse_swf(std::istream& in);
Trace parse_swf(const std::filesystem::path& path);

/// Writes the header comments followed by one 18-field line per job.
/// Fields that JobRecord does not carry are written as -1.
void write_swf(std::ostream& out, const Trace& trace);

/// System size: the CLI override when given, otherwise the header's MaxProcs.
/// Throws ConfigError when neither is available.
std::int64_t system_size(const TraceHeader& header, std::optional<std::int64_t> override);

struct Rejection {
    std::int64_t jobId;
    std::string reason;
};

struct FilterResult {
    std::vector<JobRecord> jobs;
    std::vector<Rejection> rejections;
};

/// Keeps completed jobs with a known request size and a non-negative runtime.
FilterResult filter_completed(std::span<const JobRecord> jobs);

void write_rejections_csv(std::ostream& out, std::span<const Rejection> rejections);

/// Half-open index interval [begin, end).
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    [[nodiscard]] std::size_t size() const noexcept { return end > begin ? end - begin : 0; }
    [[nodiscard]] bool empty() const noexcept { return size() == 0; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct TraceSplit {
    IndexRange history;
    IndexRange validation;
    IndexRange test;
};

struct SplitJobs {
    std::vector<JobRecord> history;
    std::vector<JobRecord> validation;
    std::vector<JobRecord> test;
};

/// The reference split for a 60000-job trace: history [10000, 16000),
/// validation [16000, 20000), test [20000, 60000). Shorter traces get the
/// same proportions.
TraceSplit default_split(std::size_t jobCount);

/// Throws InvalidArgument when a range is out of bounds, ranges overlap, or
/// validation/test start before the history range.
void check_split(const TraceSplit& split, std::size_t jobCount);

SplitJobs split(std::span<const JobRecord> jobs, const TraceSplit& ranges);

} // namespace hpcpred
