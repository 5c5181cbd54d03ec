#include "hpcpred/trace.hpp"

#include "hpcpred/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hpcpred {

namespace {

// SWF field positions (0-based).
enum SwfField : std::size_t {
    kJobId = 0,
    kSubmit = 1,
    kWait = 2,
    kRun = 3,
    kAllocProcs = 4,
    kReqProcs = 7,
    kReqTime = 8,
    kStatus = 10,
    kUser = 11,
    kGroup = 12,
    kQueue = 14,
    kFieldCount = 18,
};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_number(std::string_view token, std::size_t line) {
    double value = 0.0;
    const auto* begin = token.data();
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw ParseError(line, "invalid numeric field '" + std::string(token) + "'");
    }
    return value;
}

std::int64_t to_int(double v) { return static_cast<std::int64_t>(std::llround(v)); }

JobStatus status_from_swf(std::int64_t code) {
    switch (code) {
    case 1: return JobStatus::Completed;
    case 0: return JobStatus::Failed;
    case 5: return JobStatus::Cancelled;
    default: return JobStatus::Other;
    }
}

int status_to_swf(JobStatus s) {
    switch (s) {
    case JobStatus::Completed: return 1;
    case JobStatus::Failed: return 0;
    case JobStatus::Cancelled: return 5;
    case JobStatus::Other: break;
    }
    return -1;
}

// "; MaxProcs: 128" -> 128
std::optional<std::int64_t> header_max_procs(std::string_view comment) {
    auto body = trim(comment.substr(1));
    constexpr std::string_view key = "MaxProcs:";
    if (body.substr(0, key.size()) != key) {
        return std::nullopt;
    }
    auto value = trim(body.substr(key.size()));
    std::int64_t procs = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), procs);
    if (ec != std::errc{} || procs <= 0) {
        return std::nullopt;
    }
    return procs;
}

JobRecord record_from_fields(const std::array<double, kFieldCount>& f) {
    JobRecord r;
    r.jobId = to_int(f[kJobId]);
    r.submitTime = to_int(f[kSubmit]);
    r.waitTime = to_int(f[kWait]);
    r.runTime = to_int(f[kRun]);
    const auto requested = to_int(f[kReqProcs]);
    const auto allocated = to_int(f[kAllocProcs]);
    r.reqSize = requested > 0 ? requested : (allocated > 0 ? allocated : kUnknown);
    const auto estimate = to_int(f[kReqTime]);
    if (estimate >= 0) {
        r.ert = estimate;
        r.ertKnown = true;
    } else {
        r.ert = std::max<Seconds>(r.runTime, 0);
        r.ertKnown = false;
    }
    r.status = status_from_swf(to_int(f[kStatus]));
    r.userId = to_int(f[kUser]);
    r.groupId = to_int(f[kGroup]);
    r.queueId = to_int(f[kQueue]);
    return r;
}

} // namespace

Trace parse_swf(std::istream& in) {
    Trace trace;
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        auto text = trim(line);
        if (text.empty()) {
            continue;
        }
        if (text.front() == ';') {
            trace.header.comments.emplace_back(text);
            if (auto procs = header_max_procs(text)) {
                trace.header.maxProcs = procs;
            }
            continue;
        }
        std::array<double, kFieldCount> fields{};
        std::size_t count = 0;
        std::size_t pos = 0;
        while (pos < text.size()) {
            const auto start = text.find_first_not_of(" \t", pos);
            if (start == std::string_view::npos) {
                break;
            }
            auto stop = text.find_first_of(" \t", start);
            if (stop == std::string_view::npos) {
                stop = text.size();
            }
            if (count == kFieldCount) {
                throw ParseError(lineNo, "more than 18 fields");
            }
            fields[count++] = parse_number(text.substr(start, stop - start), lineNo);
            pos = stop;
        }
        if (count != kFieldCount) {
            throw ParseError(lineNo, "expected 18 fields, found " + std::to_string(count));
        }
        trace.jobs.push_back(record_from_fields(fields));
    }
    std::stable_sort(trace.jobs.begin(), trace.jobs.end(),
                     [](const JobRecord& a, const JobRecord& b) { return a.submitTime < b.submitTime; });
    return trace;
}

Trace parse_swf(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open trace file " + path.string());
    }
    return parse_swf(in);
}

void write_swf(std::ostream& out, const Trace& trace) {
    for (const auto& c : trace.header.comments) {
        out << c << '\n';
    }
    for (const auto& j : trace.jobs) {
        const Seconds ert = j.ertKnown ? j.ert : kUnknown;
        // id submit wait run alloc cpu mem req reqtime reqmem status uid gid exe queue part dep think
        out << j.jobId << ' ' << j.submitTime << ' ' << j.waitTime << ' ' << j.runTime << ' '
            << j.reqSize << " -1 -1 " << j.reqSize << ' ' << ert << " -1 " << status_to_swf(j.status)
            << ' ' << j.userId << ' ' << j.groupId << " -1 " << j.queueId << " -1 -1 -1\n";
    }
}

std::int64_t system_size(const TraceHeader& header, std::optional<std::int64_t> override) {
    if (override) {
        if (*override < 1) {
            throw ConfigError("system size override must be >= 1");
        }
        return *override;
    }
    if (header.maxProcs) {
        return *header.maxProcs;
    }
    throw ConfigError("trace header has no MaxProcs and no system size was given");
}

FilterResult filter_completed(std::span<const JobRecord> jobs) {
    FilterResult result;
    result.jobs.reserve(jobs.size());
    for (const auto& j : jobs) {
        if (j.status != JobStatus::Completed) {
            result.rejections.push_back({j.jobId, "not completed"});
        } else if (j.reqSize < 1) {
            result.rejections.push_back({j.jobId, "unknown request size"});
        } else if (j.runTime < 0) {
            result.rejections.push_back({j.jobId, "unknown runtime"});
        } else if (j.waitTime < 0) {
            result.rejections.push_back({j.jobId, "unknown wait time"});
        } else {
            result.jobs.push_back(j);
        }
    }
    return result;
}

void write_rejections_csv(std::ostream& out, std::span<const Rejection> rejections) {
    out << "jobId,reason\n";
    for (const auto& r : rejections) {
        out << r.jobId << ',' << r.reason << '\n';
    }
}

TraceSplit default_split(std::size_t jobCount) {
    constexpr std::size_t kReference = 60000;
    if (jobCount >= kReference) {
        return {{10000, 16000}, {16000, 20000}, {20000, 60000}};
    }
    auto at = [jobCount](std::size_t ref) { return ref * jobCount / kReference; };
    return {{at(10000), at(16000)}, {at(16000), at(20000)}, {at(20000), jobCount}};
}

void check_split(const TraceSplit& s, std::size_t jobCount) {
    const std::array<IndexRange, 3> ranges{s.history, s.validation, s.test};
    for (const auto& r : ranges) {
        if (r.begin > r.end || r.end > jobCount) {
            throw InvalidArgument("split range [" + std::to_string(r.begin) + ", " + std::to_string(r.end) +
                                  ") is outside the " + std::to_string(jobCount) + "-job trace");
        }
    }
    for (std::size_t a = 0; a < ranges.size(); ++a) {
        for (std::size_t b = a + 1; b < ranges.size(); ++b) {
            if (!ranges[a].empty() && !ranges[b].empty() && ranges[a].begin < ranges[b].end &&
                ranges[b].begin < ranges[a].end) {
                throw InvalidArgument("split ranges overlap");
            }
        }
    }
    if (!s.history.empty()) {
        if ((!s.validation.empty() && s.validation.begin < s.history.begin) ||
            (!s.test.empty() && s.test.begin < s.history.begin)) {
            throw InvalidArgument("validation and test ranges must start at or after the history range");
        }
    }
}

SplitJobs split(std::span<const JobRecord> jobs, const TraceSplit& ranges) {
    check_split(ranges, jobs.size());
    auto slice = [&](IndexRange r) {
        return std::vector<JobRecord>(jobs.begin() + static_cast<std::ptrdiff_t>(r.begin),
                                      jobs.begin() + static_cast<std::ptrdiff_t>(r.end));
    };
    return {slice(ranges.history), slice(ranges.validation), slice(ranges.test)};
}

} // namespace hpcpred
