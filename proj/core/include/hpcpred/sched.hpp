#pragma once

#include "hpcpred/trace.hpp"

#include <algorithm>
#include <cstddef>
#include <deque>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace hpcpred::sched {

struct SimJob {
    std::int64_t jobId = 0;
    Seconds submitTime = 0;
    std::int64_t reqSize = 1;
    /// Kill time: a job never runs longer than this.
    Seconds estimate = 0;
    Seconds actualRun = 0;

    /// Run time after the kill-at-estimate rule.
    [[nodiscard]] Seconds effective_run() const { return std::min(actualRun, estimate); }
};

/// Uses ert when known, otherwise the recorded runtime.
SimJob to_sim_job(const JobRecord& j);
std::vector<SimJob> to_sim_jobs(std::span<const JobRecord> jobs);

struct ScheduledJob {
    std::int64_t jobId = 0;
    Seconds submitTime = 0;
    std::int64_t reqSize = 1;
    Seconds estimate = 0;
    Seconds startTime = 0;
    Seconds endTime = 0;
    /// Reservation given when the job first became queue head and could not
    /// start; empty if it never had to wait at the head.
    std::optional<Seconds> reservation;

    [[nodiscard]] Seconds wait() const { return startTime - submitTime; }
    [[nodiscard]] Seconds run() const { return endTime - startTime; }
    [[nodiscard]] Seconds response() const { return endTime - submitTime; }
};

/// Order of a completion and an arrival that happen in the same second.
enum class TieOrder { CompletionsFirst, ArrivalsFirst };

struct EasyOptions {
    TieOrder tieOrder = TieOrder::CompletionsFirst;
};

/// Event-driven EASY backfilling on P identical processors. Jobs are fed in
/// submit order with submit(); the clock only moves forward.
class EasyScheduler {
public:
    using Callback = std::function<void(const ScheduledJob&)>;

    explicit EasyScheduler(std::int64_t processors, EasyOptions options = {});

    /// Called when a job starts and when it completes.
    void on_start(Callback cb) { onStart_ = std::move(cb); }
    void on_finish(Callback cb) { onFinish_ = std::move(cb); }

    /// Processes every event up to and including time t.
    void advance_to(Seconds t);
    /// Enqueues a job at its submit time (advancing the clock there first).
    /// Throws InvalidArgument for a job that does not fit the machine or
    /// arrives before the current clock.
    void submit(const SimJob& job);
    /// Runs until every queued job has completed.
    void drain();

    [[nodiscard]] Seconds clock() const noexcept { return clock_; }
    [[nodiscard]] std::int64_t processors() const noexcept { return processors_; }
    [[nodiscard]] std::int64_t free_processors() const noexcept { return free_; }
    [[nodiscard]] std::int64_t max_busy() const noexcept { return maxBusy_; }
    /// Queued jobs in FCFS order.
    [[nodiscard]] std::vector<const ScheduledJob*> waiting() const;
    /// Running jobs in start order.
    [[nodiscard]] std::vector<const ScheduledJob*> running() const;
    /// Every job seen so far, in submission order.
    [[nodiscard]] const std::deque<ScheduledJob>& jobs() const noexcept { return jobs_; }

private:
    void schedule_pass();
    void start(std::size_t index);
    void complete_until(Seconds t, bool inclusive);
    [[nodiscard]] std::optional<Seconds> next_completion() const;

    std::int64_t processors_;
    EasyOptions options_;
    std::int64_t free_;
    std::int64_t maxBusy_ = 0;
    Seconds clock_ = 0;
    std::deque<ScheduledJob> jobs_;
    std::deque<Seconds> runs_;
    std::deque<std::size_t> queue_;
    std::vector<std::size_t> running_;
    Callback onStart_;
    Callback onFinish_;
};

struct SimulationResult {
    /// Accepted jobs in input order.
    std::vector<ScheduledJob> jobs;
    std::vector<Rejection> rejected;
    std::int64_t maxBusy = 0;
};

/// Jobs must be sorted by submit time. Jobs asking for more than P (or
/// fewer than one) processors are rejected, not scheduled.
SimulationResult run_simulation(std::span<const SimJob> jobs, std::int64_t processors, EasyOptions options = {});

/// 100 * Σ reqSize * run / (P * horizon).
double utilization(std::span<const ScheduledJob> jobs, std::int64_t processors, Seconds horizon);
/// Last end minus first submit.
Seconds horizon(std::span<const ScheduledJob> jobs);

/// jobId,wait,start,end,procs
void write_schedule_csv(std::ostream& out, std::span<const ScheduledJob> jobs);
/// jobId,submit,procs,estimate,runtime
std::vector<SimJob> read_sim_jobs_csv(std::istream& in);
void write_sim_jobs_csv(std::ostream& out, std::span<const SimJob> jobs);

} // namespace hpcpred::sched
