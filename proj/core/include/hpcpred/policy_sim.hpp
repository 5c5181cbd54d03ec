#pragma once

#include "hpcpred/exectime.hpp"
#include "hpcpred/manager.hpp"
#include "hpcpred/sched.hpp"
#include "hpcpred/simstate.hpp"
#include "hpcpred/trace.hpp"
#include "hpcpred/wait_predictor.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace hpcpred::policy {

enum class Policy { Baseline, Mold, Delay };
std::string_view to_string(Policy p);
Policy parse_policy(std::string_view s);

struct PolicyConfig {
    Policy policy = Policy::Baseline;
    std::int64_t processors = 0;
    qwait::WaitPredictorConfig wait{};
    exectime::LoadFunctionParams loadFunctions{};
    exectime::RangeSetParams rangeSet{};
    LoadWindow loadWindow{};
    double futureSlack = 0.05;
    double delayThreshold = 0.3;
    /// Largest ert the system allows; 0 means the largest ert in the input.
    Seconds maxLimit = 0;
    std::uint64_t seed = 1;
    sched::EasyOptions scheduler{};
};

/// One simulated job. Times measured from the original submission, so hold
/// time counts as queue wait.
struct JobOutcome {
    std::int64_t jobId = 0;
    std::int64_t userId = 0;
    Seconds originalSubmit = 0;
    /// When the job reached the scheduler (later than originalSubmit if held).
    Seconds schedulerSubmit = 0;
    std::int64_t originalReqSize = 0;
    std::int64_t reqSize = 0;
    Seconds estimate = 0;
    Seconds startTime = 0;
    Seconds endTime = 0;
    bool held = false;

    [[nodiscard]] Seconds wait() const { return startTime - originalSubmit; }
    [[nodiscard]] Seconds run() const { return endTime - startTime; }
    [[nodiscard]] Seconds response() const { return endTime - originalSubmit; }
};

struct HoldEpisode {
    std::int64_t headJobId = 0;
    Seconds openedAt = 0;
    Seconds futureTime = 0;
    /// Held jobs in queue order (head first) with their release times.
    std::vector<manager::Release> releases;
};

struct PolicyRun {
    Policy policy = Policy::Baseline;
    std::int64_t processors = 0;
    /// In original submission order.
    std::vector<JobOutcome> jobs;
    std::vector<manager::DecisionRecord> decisions;
    std::vector<HoldEpisode> episodes;
    std::vector<Rejection> rejected;
};

/// Replays `policyJobs` through EASY backfilling under the chosen policy.
/// The predictors are warmed with `history`, a recorded trace segment that
/// precedes the policy jobs; during the run they only learn from simulated
/// outcomes that are already known at each decision.
PolicyRun simulate_policy(std::span<const JobRecord> history, std::span<const JobRecord> policyJobs,
                          const PolicyConfig& config);

/// jobId,userId,originalSubmit,schedulerSubmit,originalReqSize,reqSize,estimate,start,end,wait,run,response,held
void write_outcomes_csv(std::ostream& out, std::span<const JobOutcome> jobs);

} // namespace hpcpred::policy
