#include "hpcpred/manager.hpp"

#include "hpcpred/csv.hpp"
#include "hpcpred/error.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace hpcpred::manager {

double range_gain(double lo, double hi) {
    return (hi - lo) - 0.5 * (hi * hi - lo * lo);
}

double score_rangeset(const ResponseRangeSet& normalized) {
    double gain = 0.0;
    double length = 0.0;
    for (const auto& r : normalized.ranges) {
        gain += range_gain(r.range.lo, r.range.hi);
        length += r.range.length();
    }
    if (length <= 0.0) {
        return 1.0 - exectime::point_from_rangeset(normalized);
    }
    return gain / length;
}

ResponseRangeSet normalize(const ResponseRangeSet& rs, double scale) {
    if (!(scale > 0.0)) {
        throw InvalidArgument("normalization scale must be positive");
    }
    ResponseRangeSet out = rs;
    for (auto& r : out.ranges) {
        r.range.lo /= scale;
        r.range.hi /= scale;
    }
    return out;
}

MoldDecision mold_job(std::span<const std::int64_t> candidateSizes, std::int64_t processors,
                      const MoldingInputs& inputs) {
    std::vector<std::int64_t> sizes;
    for (auto s : candidateSizes) {
        if (s >= 1 && s <= processors) {
            sizes.push_back(s);
        }
    }
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

    MoldDecision d;
    for (auto s : sizes) {
        CandidateEvaluation c;
        c.reqSize = s;
        try {
            c.qwaitPrediction = std::max(0.0, inputs.predictWait(s));
            c.response = inputs.predictExec(s).shifted(c.qwaitPrediction);
        } catch (const ColdStartError&) {
            continue;
        }
        if (c.response.ranges.empty()) {
            continue;
        }
        d.candidates.push_back(std::move(c));
    }
    if (d.candidates.empty()) {
        return d;
    }
    d.passThrough = false;

    double scale = 0.0;
    for (const auto& c : d.candidates) {
        scale = std::max(scale, c.response.max_upper());
    }
    std::vector<double> points;
    for (auto& c : d.candidates) {
        c.score = scale > 0.0 ? score_rangeset(normalize(c.response, scale)) : 1.0;
        points.push_back(exectime::point_from_rangeset(c.response));
    }
    // Candidates whose scores or points agree up to rounding are ties; sizes
    // are ascending, so keeping the earlier one prefers the smaller size.
    constexpr double kTieTolerance = 1e-12;
    for (std::size_t i = 1; i < d.candidates.size(); ++i) {
        const double ds = d.candidates[i].score - d.candidates[d.chosen].score;
        const double dp = points[i] - points[d.chosen];
        const double pointTol = kTieTolerance * std::max({1.0, std::abs(points[i]), std::abs(points[d.chosen])});
        if (ds > kTieTolerance || (std::abs(ds) <= kTieTolerance && dp < -pointTol)) {
            d.chosen = i;
        }
    }
    return d;
}

Seconds set_estimated_runtime(Seconds originalErt, std::int64_t changedSize, std::int64_t originalSize,
                              std::span<const Seconds> previousErtsAtChangedSize, Seconds maxLimit) {
    if (maxLimit <= 0) {
        throw InvalidArgument("maxLimit must be positive");
    }
    if (changedSize >= originalSize) {
        return originalErt;
    }
    std::optional<Seconds> best;
    if (!previousErtsAtChangedSize.empty()) {
        const Seconds maxPrevious =
            *std::max_element(previousErtsAtChangedSize.begin(), previousErtsAtChangedSize.end());
        if (maxPrevious > originalErt) {
            best = maxPrevious;
        }
    }
    if (maxLimit > originalErt && (!best || maxLimit < *best)) {
        best = maxLimit;
    }
    return best.value_or(maxLimit);
}

Seconds sample_actual_runtime(std::span<const Seconds> runtimesAtChangedSize, std::mt19937_64& rng) {
    if (runtimesAtChangedSize.empty()) {
        throw InvalidArgument("no runtimes to sample from");
    }
    // Multiply-shift on the high 32 bits keeps the draw identical on every
    // standard library.
    const std::uint64_t n = runtimesAtChangedSize.size();
    if (n > 0xffffffffu) {
        throw InvalidArgument("too many runtimes to sample from");
    }
    const auto index = static_cast<std::size_t>(((rng() >> 32) * n) >> 32);
    return runtimesAtChangedSize[index];
}

Seconds find_future_time(std::span<const Seconds> predictedCompletions, Seconds now, double slack) {
    std::vector<Seconds> ahead;
    for (auto c : predictedCompletions) {
        if (c > now) {
            ahead.push_back(c);
        }
    }
    if (ahead.empty()) {
        return now;
    }
    std::sort(ahead.begin(), ahead.end());
    Seconds t = ahead.front();
    for (std::size_t i = 1; i < ahead.size(); ++i) {
        const double limit = static_cast<double>(t) + slack * static_cast<double>(t - now);
        if (static_cast<double>(ahead[i]) > limit) {
            break;
        }
        t = ahead[i];
    }
    return t;
}

bool decide_delay(double currentPoint, double futurePoint, double threshold) {
    return futurePoint < (1.0 - threshold) * currentPoint;
}

void HoldQueue::open(const JobRecord& head, Seconds futureTime) {
    if (head_) {
        throw InvalidArgument("a hold episode is already open");
    }
    if (futureTime < head.submitTime) {
        throw InvalidArgument("future time precedes the head job's submission");
    }
    head_ = HeldJob{head, head.submitTime};
    futureTime_ = futureTime;
    followers_.clear();
}

void HoldQueue::add(const JobRecord& job) {
    if (!head_) {
        throw InvalidArgument("no hold episode is open");
    }
    followers_.push_back({job, job.submitTime});
}

Seconds HoldQueue::future_time() const {
    if (!head_) {
        throw InvalidArgument("no hold episode is open");
    }
    return futureTime_;
}

const HeldJob& HoldQueue::head() const {
    if (!head_) {
        throw InvalidArgument("no hold episode is open");
    }
    return *head_;
}

std::vector<Release> HoldQueue::release() {
    if (!head_) {
        return {};
    }
    std::vector<Release> out;
    out.reserve(followers_.size() + 1);
    out.push_back({head_->job, futureTime_, true});
    for (const auto& f : followers_) {
        out.push_back({f.job, futureTime_ + (f.originalSubmit - head_->originalSubmit), false});
    }
    head_.reset();
    followers_.clear();
    return out;
}

std::string_view to_string(DelayDecision d) {
    switch (d) {
    case DelayDecision::NotEvaluated: return "none";
    case DelayDecision::SubmitNow: return "submit-now";
    case DelayDecision::Delay: return "delay";
    case DelayDecision::Follower: return "follower";
    }
    return "?";
}

void write_decision_log_csv(std::ostream& out, std::span<const DecisionRecord> records) {
    out << "jobId,originalReqSize,chosenReqSize,scores,delay,futureTime\n";
    for (const auto& r : records) {
        out << r.jobId << ',' << r.originalReqSize << ',' << r.chosenReqSize << ',';
        for (std::size_t i = 0; i < r.scores.size(); ++i) {
            if (i > 0) {
                out << '|';
            }
            out << r.scores[i].first << ':' << csv::num(r.scores[i].second);
        }
        out << ',' << to_string(r.delay) << ',';
        if (r.futureTime) {
            out << *r.futureTime;
        }
        out << '\n';
    }
}

} // namespace hpcpred::manager
