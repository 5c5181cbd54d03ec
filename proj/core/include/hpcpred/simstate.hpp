#pragma once

#include "hpcpred/trace.hpp"

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace hpcpred {

/// A job in the system at some instant together with how long it has been
/// waiting (queued jobs) or running (running jobs).
struct ActiveJob {
    JobRecord job;
    Seconds elapsed = 0;

    friend bool operator==(const ActiveJob&, const ActiveJob&) = default;
};

/// Queue and processor state at one instant.
///
/// Invariants: every waiting job has submitTime <= atTime < startTime,
/// every running job has startTime <= atTime < endTime. Both lists are in
/// trace order.
struct SystemSnapshot {
    Seconds atTime = 0;
    std::vector<ActiveJob> waiting;
    std::vector<ActiveJob> running;

    friend bool operator==(const SystemSnapshot&, const SystemSnapshot&) = default;
};

/// Chronological replay of a recorded trace.
///
/// Each call to next() processes every termination and start up to the next
/// submission and returns that submission with the state it observed. Jobs
/// submitted at the same instant see each other in trace order; a job that
/// starts (or ends) at the submit instant is already running (or gone).
class TraceReplayer {
public:
    /// Throws InvalidArgument when jobs are not sorted by submit time.
    explicit TraceReplayer(std::span<const JobRecord> jobs);

    struct Step {
        std::size_t index;
        const JobRecord* job;
        SystemSnapshot snapshot;
        /// Trace indices of jobs that started since the previous step, in
        /// start order. A started job's wait time is now known.
        std::vector<std::size_t> started;
    };

    [[nodiscard]] bool done() const noexcept { return next_ >= jobs_.size(); }
    Step next();

private:
    enum class Kind { End = 0, Start = 1 };
    struct Event {
        Seconds time;
        Kind kind;
        std::size_t index;
        bool operator>(const Event& o) const {
            if (time != o.time) return time > o.time;
            if (kind != o.kind) return kind > o.kind;
            return index > o.index;
        }
    };

    void push(Event e);
    Event pop();

    std::span<const JobRecord> jobs_;
    std::size_t next_ = 0;
    std::vector<Event> heap_;
    std::map<std::size_t, Seconds> waiting_; // index -> submit
    std::map<std::size_t, Seconds> running_; // index -> start
};

/// Snapshot at every submission, in trace order.
std::vector<SystemSnapshot> replay(std::span<const JobRecord> jobs);

/// Load over [from, from + length): CPU-seconds executed by the given jobs
/// inside the interval divided by length * processors, clamped to [0, 1].
double compute_load(std::span<const JobRecord> jobs, Seconds from, Seconds length, std::int64_t processors);

/// Load each job saw while it ran: CPU-seconds of the other jobs inside the
/// job's execution interval over runTime * processors. A zero-length job gets
/// the busy fraction at its start. Computed from a prefix sum of busy
/// processors, so it is O(n log n) for the whole trace.
std::vector<double> execution_loads(std::span<const JobRecord> jobs, std::int64_t processors);

struct LoadWindow {
    Seconds interval = 1800;
    Seconds window = 7 * 24 * 3600;
};

/// Mean load of the fixed-length intervals covering the window that ends at
/// targetSubmit. Intervals starting before the earliest submit time among
/// jobs are dropped. Throws ColdStartError when no full interval remains.
double predict_load(std::span<const JobRecord> jobs, Seconds targetSubmit, std::int64_t processors,
                    LoadWindow window = {});

/// Fixed-capacity FIFO of history entries; inserting into a full window
/// evicts the oldest entry.
template <class T>
class HistoryWindow {
public:
    explicit HistoryWindow(std::size_t capacity) : capacity_(capacity) {}

    void push(T entry) {
        if (capacity_ == 0) {
            return;
        }
        if (entries_.size() == capacity_) {
            entries_.pop_front();
        }
        entries_.push_back(std::move(entry));
    }

    [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    [[nodiscard]] const T& operator[](std::size_t i) const { return entries_[i]; }
    [[nodiscard]] auto begin() const { return entries_.begin(); }
    [[nodiscard]] auto end() const { return entries_.end(); }
    [[nodiscard]] const T& back() const { return entries_.back(); }

private:
    std::size_t capacity_;
    std::deque<T> entries_;
};

/// Incrementally fed record of executions used for load measurement while a
/// replay or a simulation advances. Running executions only count up to the
/// query time, so nothing after "now" is ever observed.
class LoadTracker {
public:
    explicit LoadTracker(std::int64_t processors, LoadWindow window = {});

    void start(std::int64_t jobId, Seconds at, std::int64_t procs);
    void finish(std::int64_t jobId, Seconds at);

    /// Week-average load seen at `now`; nullopt on cold start.
    [[nodiscard]] std::optional<double> predicted_load(Seconds now) const;

    /// Load over [from, to) caused by executions other than excludeJobId,
    /// counted up to `now`. For a zero-length interval returns the busy
    /// fraction at `from`.
    [[nodiscard]] double load_between(Seconds from, Seconds to, Seconds now,
                                      std::optional<std::int64_t> excludeJobId = std::nullopt) const;

    /// Processors busy at `now` (executions started and not finished).
    [[nodiscard]] std::int64_t busy(Seconds now) const;

    [[nodiscard]] std::int64_t processors() const noexcept { return processors_; }
    [[nodiscard]] const LoadWindow& window() const noexcept { return window_; }

private:
    struct Execution {
        std::int64_t jobId;
        Seconds start;
        std::optional<Seconds> end;
        std::int64_t procs;
    };

    std::int64_t processors_;
    LoadWindow window_;
    std::optional<Seconds> firstEvent_;
    std::vector<Execution> executions_; // in start order
    std::map<std::int64_t, std::size_t> open_;
    Seconds longest_ = 0;
};

} // namespace hpcpred
