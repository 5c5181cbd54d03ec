#pragma once

#include "hpcpred/exectime.hpp"
#include "hpcpred/trace.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace hpcpred::manager {

using exectime::ResponseRangeSet;

/// ∫_lo^hi (1 - t) dt.
double range_gain(double lo, double hi);

/// Total gain of a rangeSet already scaled into [0, 1], divided by its total
/// length. A rangeSet of zero total length scores 1 - (its point value).
double score_rangeset(const ResponseRangeSet& normalized);

/// Every bound divided by `scale` (> 0).
ResponseRangeSet normalize(const ResponseRangeSet& rs, double scale);

struct CandidateEvaluation {
    std::int64_t reqSize = 0;
    double qwaitPrediction = 0.0;
    ResponseRangeSet response;
    double score = 0.0;
};

/// Prediction callbacks for one molding decision. Either may throw
/// ColdStartError, which drops that candidate.
struct MoldingInputs {
    std::function<double(std::int64_t reqSize)> predictWait;
    std::function<ResponseRangeSet(std::int64_t reqSize)> predictExec;
};

struct MoldDecision {
    /// True when no candidate could be evaluated; the job keeps its size.
    bool passThrough = true;
    std::vector<CandidateEvaluation> candidates;
    std::size_t chosen = 0;

    [[nodiscard]] const CandidateEvaluation& choice() const { return candidates.at(chosen); }
};

/// Scores every distinct candidate size in [1, processors] and picks the
/// highest score; equal scores go to the lower point response, then to the
/// smaller size. Response ranges are normalized by the largest upper bound
/// among the candidates.
MoldDecision mold_job(std::span<const std::int64_t> candidateSizes, std::int64_t processors,
                      const MoldingInputs& inputs);

/// Estimated runtime after changing the request size. Shrinking picks the
/// smallest of {maxPrevious, maxLimit} above originalErt (maxLimit if neither
/// is); growing or keeping the size keeps originalErt.
Seconds set_estimated_runtime(Seconds originalErt, std::int64_t changedSize, std::int64_t originalSize,
                              std::span<const Seconds> previousErtsAtChangedSize, Seconds maxLimit);

/// Uniform draw over the history entries. Throws InvalidArgument when empty.
Seconds sample_actual_runtime(std::span<const Seconds> runtimesAtChangedSize, std::mt19937_64& rng);

/// Future submission time: the earliest predicted completion after `now`,
/// then repeatedly the next completion if it falls within slack * (t - now)
/// of the current t. Returns `now` when no completion lies ahead.
Seconds find_future_time(std::span<const Seconds> predictedCompletions, Seconds now, double slack = 0.05);

/// Delay iff futurePoint < (1 - threshold) * currentPoint.
bool decide_delay(double currentPoint, double futurePoint, double threshold = 0.3);

struct HeldJob {
    JobRecord job;
    Seconds originalSubmit = 0;
};

struct Release {
    JobRecord job;
    Seconds submitAt = 0;
    bool head = false;
};

/// Jobs held back for one delayed-submission episode: the head that
/// triggered the delay and every job arriving before its future time.
class HoldQueue {
public:
    /// Starts an episode. Throws InvalidArgument when one is already open or
    /// futureTime precedes the head's submit time.
    void open(const JobRecord& head, Seconds futureTime);
    /// Appends an arrival to the open episode, in FCFS order.
    void add(const JobRecord& job);

    [[nodiscard]] bool active() const noexcept { return head_.has_value(); }
    [[nodiscard]] Seconds future_time() const;
    [[nodiscard]] const HeldJob& head() const;
    [[nodiscard]] const std::vector<HeldJob>& followers() const noexcept { return followers_; }

    /// Closes the episode: the head at the future time, each follower offset
    /// by its original distance from the head, in queue order.
    std::vector<Release> release();

private:
    std::optional<HeldJob> head_;
    Seconds futureTime_ = 0;
    std::vector<HeldJob> followers_;
};

enum class DelayDecision { NotEvaluated, SubmitNow, Delay, Follower };
std::string_view to_string(DelayDecision d);

struct DecisionRecord {
    std::int64_t jobId = 0;
    std::int64_t originalReqSize = 0;
    std::int64_t chosenReqSize = 0;
    /// (reqSize, score) per evaluated candidate.
    std::vector<std::pair<std::int64_t, double>> scores;
    DelayDecision delay = DelayDecision::NotEvaluated;
    std::optional<Seconds> futureTime;
};

/// jobId,originalReqSize,chosenReqSize,scores,delay,futureTime
/// scores are "size:score" joined by '|'; futureTime is empty when unset.
void write_decision_log_csv(std::ostream& out, std::span<const DecisionRecord> records);

} // namespace hpcpred::manager
