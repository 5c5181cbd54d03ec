#include "hpcpred/simstate.hpp"

#include "hpcpred/error.hpp"

#include <algorithm>
#include <functional>

namespace hpcpred {

TraceReplayer::TraceReplayer(std::span<const JobRecord> jobs) : jobs_(jobs) {
    for (std::size_t i = 1; i < jobs_.size(); ++i) {
        if (jobs_[i].submitTime < jobs_[i - 1].submitTime) {
            throw InvalidArgument("replay input is not sorted by submit time (index " + std::to_string(i) + ")");
        }
    }
    for (const auto& j : jobs_) {
        if (j.waitTime < 0 || j.runTime < 0) {
            throw InvalidArgument("job " + std::to_string(j.jobId) + " has a negative wait or run time");
        }
    }
}

void TraceReplayer::push(Event e) {
    heap_.push_back(e);
    std::push_heap(heap_.begin(), heap_.end(), std::greater<>{});
}

TraceReplayer::Event TraceReplayer::pop() {
    std::pop_heap(heap_.begin(), heap_.end(), std::greater<>{});
    Event e = heap_.back();
    heap_.pop_back();
    return e;
}

TraceReplayer::Step TraceReplayer::next() {
    if (done()) {
        throw InvalidArgument("replay already finished");
    }
    const std::size_t idx = next_++;
    const JobRecord& job = jobs_[idx];
    const Seconds now = job.submitTime;

    Step step{idx, &job, {}, {}};
    while (!heap_.empty() && heap_.front().time <= now) {
        const Event e = pop();
        if (e.kind == Kind::End) {
            running_.erase(e.index);
            continue;
        }
        waiting_.erase(e.index);
        step.started.push_back(e.index);
        if (jobs_[e.index].runTime > 0) {
            running_.emplace(e.index, jobs_[e.index].startTime());
        }
    }

    step.snapshot.atTime = now;
    step.snapshot.waiting.reserve(waiting_.size());
    for (const auto& [i, submit] : waiting_) {
        step.snapshot.waiting.push_back({jobs_[i], now - submit});
    }
    step.snapshot.running.reserve(running_.size());
    for (const auto& [i, start] : running_) {
        step.snapshot.running.push_back({jobs_[i], now - start});
    }

    waiting_.emplace(idx, job.submitTime);
    push({job.startTime(), Kind::Start, idx});
    push({job.endTime(), Kind::End, idx});
    return step;
}

std::vector<SystemSnapshot> replay(std::span<const JobRecord> jobs) {
    TraceReplayer replayer(jobs);
    std::vector<SystemSnapshot> out;
    out.reserve(jobs.size());
    while (!replayer.done()) {
        out.push_back(replayer.next().snapshot);
    }
    return out;
}

double compute_load(std::span<const JobRecord> jobs, Seconds from, Seconds length, std::int64_t processors) {
    if (length <= 0 || processors < 1) {
        throw InvalidArgument("load interval length and processor count must be positive");
    }
    const Seconds to = from + length;
    double cpuSeconds = 0.0;
    for (const auto& j : jobs) {
        const Seconds lo = std::max(from, j.startTime());
        const Seconds hi = std::min(to, j.endTime());
        if (hi > lo) {
            cpuSeconds += static_cast<double>(j.reqSize) * static_cast<double>(hi - lo);
        }
    }
    const double load = cpuSeconds / (static_cast<double>(length) * static_cast<double>(processors));
    return std::clamp(load, 0.0, 1.0);
}

std::vector<double> execution_loads(std::span<const JobRecord> jobs, std::int64_t processors) {
    if (processors < 1) {
        throw InvalidArgument("processor count must be >= 1");
    }
    std::vector<std::pair<Seconds, std::int64_t>> deltas;
    deltas.reserve(2 * jobs.size());
    for (const auto& j : jobs) {
        deltas.emplace_back(j.startTime(), j.reqSize);
        deltas.emplace_back(j.endTime(), -j.reqSize);
    }
    std::sort(deltas.begin(), deltas.end());
    // times[k] with busy[k] processors on [times[k], times[k+1]) and
    // area[k] CPU-seconds before times[k].
    std::vector<Seconds> times;
    std::vector<std::int64_t> busy;
    std::vector<std::int64_t> area;
    std::int64_t current = 0;
    for (std::size_t i = 0; i < deltas.size();) {
        const Seconds t = deltas[i].first;
        while (i < deltas.size() && deltas[i].first == t) {
            current += deltas[i].second;
            ++i;
        }
        const std::int64_t before =
            times.empty() ? 0 : area.back() + busy.back() * (t - times.back());
        times.push_back(t);
        busy.push_back(current);
        area.push_back(before);
    }
    auto segment = [&](Seconds t) {
        return static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin()) - 1;
    };
    auto area_at = [&](Seconds t) {
        const auto k = segment(t);
        return area[k] + busy[k] * (t - times[k]);
    };
    std::vector<double> out;
    out.reserve(jobs.size());
    const auto p = static_cast<double>(processors);
    for (const auto& j : jobs) {
        double load = 0.0;
        if (j.runTime > 0) {
            const auto others = area_at(j.endTime()) - area_at(j.startTime()) - j.reqSize * j.runTime;
            load = static_cast<double>(others) / (p * static_cast<double>(j.runTime));
        } else {
            load = static_cast<double>(busy[segment(j.startTime())]) / p;
        }
        out.push_back(std::clamp(load, 0.0, 1.0));
    }
    return out;
}

double predict_load(std::span<const JobRecord> jobs, Seconds targetSubmit, std::int64_t processors,
                    LoadWindow window) {
    if (window.interval <= 0 || window.window < window.interval) {
        throw InvalidArgument("load window must hold at least one interval");
    }
    if (jobs.empty()) {
        throw ColdStartError("no history to predict load from");
    }
    Seconds origin = jobs.front().submitTime;
    for (const auto& j : jobs) {
        origin = std::min(origin, j.submitTime);
    }
    const auto count = window.window / window.interval;
    double sum = 0.0;
    std::int64_t used = 0;
    for (std::int64_t i = 0; i < count; ++i) {
        const Seconds from = targetSubmit - (i + 1) * window.interval;
        if (from < origin) {
            break;
        }
        sum += compute_load(jobs, from, window.interval, processors);
        ++used;
    }
    if (used == 0) {
        throw ColdStartError("less than one load interval of history before the target submission");
    }
    return sum / static_cast<double>(used);
}

LoadTracker::LoadTracker(std::int64_t processors, LoadWindow window) : processors_(processors), window_(window) {
    if (processors_ < 1) {
        throw InvalidArgument("processor count must be >= 1");
    }
    if (window_.interval <= 0 || window_.window < window_.interval) {
        throw InvalidArgument("load window must hold at least one interval");
    }
}

void LoadTracker::start(std::int64_t jobId, Seconds at, std::int64_t procs) {
    if (!executions_.empty() && at < executions_.back().start) {
        throw InvalidArgument("executions must be started in time order");
    }
    if (!firstEvent_) {
        firstEvent_ = at;
    }
    open_[jobId] = executions_.size();
    executions_.push_back({jobId, at, std::nullopt, procs});
}

void LoadTracker::finish(std::int64_t jobId, Seconds at) {
    auto it = open_.find(jobId);
    if (it == open_.end()) {
        return;
    }
    auto& e = executions_[it->second];
    e.end = std::max(at, e.start);
    longest_ = std::max(longest_, *e.end - e.start);
    open_.erase(it);
}

std::int64_t LoadTracker::busy(Seconds now) const {
    std::int64_t total = 0;
    for (const auto& [id, idx] : open_) {
        if (executions_[idx].start <= now) {
            total += executions_[idx].procs;
        }
    }
    return total;
}

double LoadTracker::load_between(Seconds from, Seconds to, Seconds now,
                                 std::optional<std::int64_t> excludeJobId) const {
    const bool instant = to <= from;
    const Seconds hiBound = instant ? from + 1 : to;
    double cpu = 0.0;
    auto add = [&](const Execution& e, Seconds end) {
        if (excludeJobId && e.jobId == *excludeJobId) {
            return;
        }
        const Seconds lo = std::max(from, e.start);
        const Seconds hi = std::min(hiBound, end);
        if (hi > lo) {
            cpu += static_cast<double>(e.procs) * static_cast<double>(hi - lo);
        }
    };
    // Closed executions that can reach `from` started no earlier than from - longest_.
    auto last = std::lower_bound(executions_.begin(), executions_.end(), hiBound,
                                 [](const Execution& e, Seconds t) { return e.start < t; });
    for (auto it = last; it != executions_.begin();) {
        --it;
        if (it->start < from - longest_) {
            break;
        }
        if (it->end) {
            add(*it, *it->end);
        }
    }
    for (const auto& [id, idx] : open_) {
        add(executions_[idx], std::max(now, executions_[idx].start));
    }
    const double span = static_cast<double>(hiBound - from);
    return std::clamp(cpu / (span * static_cast<double>(processors_)), 0.0, 1.0);
}

std::optional<double> LoadTracker::predicted_load(Seconds now) const {
    if (!firstEvent_) {
        return std::nullopt;
    }
    const auto count = window_.window / window_.interval;
    std::int64_t used = 0;
    while (used < count && now - (used + 1) * window_.interval >= *firstEvent_) {
        ++used;
    }
    if (used == 0) {
        return std::nullopt;
    }
    const Seconds windowStart = now - used * window_.interval;
    std::vector<double> cpu(static_cast<std::size_t>(used), 0.0);
    auto spread = [&](const Execution& e, Seconds end) {
        Seconds lo = std::max(windowStart, e.start);
        const Seconds hi = std::min(now, end);
        while (lo < hi) {
            const auto slot = (lo - windowStart) / window_.interval;
            const Seconds slotEnd = windowStart + (slot + 1) * window_.interval;
            const Seconds segEnd = std::min(hi, slotEnd);
            cpu[static_cast<std::size_t>(slot)] += static_cast<double>(e.procs) * static_cast<double>(segEnd - lo);
            lo = segEnd;
        }
    };
    auto last = std::lower_bound(executions_.begin(), executions_.end(), now,
                                 [](const Execution& e, Seconds t) { return e.start < t; });
    for (auto it = last; it != executions_.begin();) {
        --it;
        if (it->start < windowStart - longest_) {
            break;
        }
        if (it->end) {
            spread(*it, *it->end);
        }
    }
    for (const auto& [id, idx] : open_) {
        spread(executions_[idx], now);
    }
    const double capacity = static_cast<double>(window_.interval) * static_cast<double>(processors_);
    double sum = 0.0;
    for (double c : cpu) {
        sum += std::clamp(c / capacity, 0.0, 1.0);
    }
    return sum / static_cast<double>(used);
}

} // namespace hpcpred
