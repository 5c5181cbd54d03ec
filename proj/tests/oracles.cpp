#include "oracles.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace hpcpred::oracle {

using exectime::LoadPoint;
using exectime::TimeRange;

std::vector<TimeRange> merge_ranges(std::vector<TimeRange> ranges, double threshold) {
    std::sort(ranges.begin(), ranges.end(), [](const TimeRange& a, const TimeRange& b) {
        return a.lo != b.lo ? a.lo < b.lo : a.hi < b.hi;
    });
    std::vector<TimeRange> accepted;
    for (auto r : ranges) {
        // Of the accepted ranges r touches, resolve against the one reaching
        // furthest right; the others end no later than it.
        TimeRange* reach = nullptr;
        for (auto& a : accepted) {
            if (r.lo <= a.hi && (reach == nullptr || a.hi > reach->hi)) {
                reach = &a;
            }
        }
        if (reach == nullptr) {
            accepted.push_back(r);
            continue;
        }
        if (r.hi <= reach->hi) {
            continue;
        }
        const double inter = reach->hi - r.lo;
        const double shorter = std::min(reach->hi - reach->lo, r.hi - r.lo);
        const double overlap = shorter <= 0.0 ? 1.0 : inter / shorter;
        if (overlap >= threshold) {
            reach->hi = r.hi;
        } else {
            accepted.push_back({reach->hi, r.hi});
        }
    }
    return accepted;
}

namespace {

bool valid_step(const LoadPoint& x, const LoadPoint& y, double maxGrowthPercent) {
    if (!(x.load < y.load) || y.runtime < x.runtime) {
        return false;
    }
    if (x.runtime == 0.0) {
        return y.runtime == 0.0;
    }
    return 100.0 * (y.runtime - x.runtime) / x.runtime <= maxGrowthPercent;
}

} // namespace

std::vector<std::size_t> longest_chain(std::span<const LoadPoint> points, double maxGrowthPercent) {
    const std::size_t n = points.size();
    if (n > 20) {
        throw std::invalid_argument("brute force is limited to 20 points");
    }
    std::vector<std::size_t> best;
    double bestSpan = 0.0;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::vector<std::size_t> chain;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                chain.push_back(i);
            }
        }
        bool valid = true;
        for (std::size_t k = 1; k < chain.size() && valid; ++k) {
            valid = valid_step(points[chain[k - 1]], points[chain[k]], maxGrowthPercent);
        }
        if (!valid) {
            continue;
        }
        const double span = points[chain.back()].runtime - points[chain.front()].runtime;
        const bool better = chain.size() > best.size() ||
                            (chain.size() == best.size() && (span < bestSpan || (span == bestSpan && chain < best)));
        if (better) {
            best = std::move(chain);
            bestSpan = span;
        }
    }
    return best;
}

ScheduleCheck check_schedule(std::span<const sched::SimJob> input, std::span<const sched::ScheduledJob> out,
                             std::int64_t processors) {
    ScheduleCheck c;
    std::map<std::int64_t, const sched::SimJob*> byId;
    for (const auto& j : input) {
        byId[j.jobId] = &j;
    }
    std::map<Seconds, std::int64_t> delta;
    for (const auto& s : out) {
        const auto* in = byId.at(s.jobId);
        if (s.endTime - s.startTime != std::min(in->actualRun, in->estimate)) {
            ++c.wrongRuntime;
        }
        if (s.startTime < in->submitTime) {
            ++c.startedEarly;
        }
        if (s.reservation && s.startTime > *s.reservation) {
            ++c.reservationViolations;
        }
        if (s.endTime > s.startTime) {
            delta[s.startTime] += s.reqSize;
            delta[s.endTime] -= s.reqSize;
        }
    }
    std::int64_t busy = 0;
    for (const auto& [t, d] : delta) {
        busy += d;
        if (busy > processors) {
            ++c.overcommitted;
        }
    }
    return c;
}

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path);
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace hpcpred::oracle
