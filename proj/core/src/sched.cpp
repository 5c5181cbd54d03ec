#include "hpcpred/sched.hpp"

#include "hpcpred/csv.hpp"
#include "hpcpred/error.hpp"

#include <istream>
#include <limits>
#include <ostream>
#include <string>

namespace hpcpred::sched {

SimJob to_sim_job(const JobRecord& j) {
    SimJob s;
    s.jobId = j.jobId;
    s.submitTime = j.submitTime;
    s.reqSize = j.reqSize;
    s.actualRun = j.runTime;
    s.estimate = j.ertKnown ? j.ert : j.runTime;
    return s;
}

std::vector<SimJob> to_sim_jobs(std::span<const JobRecord> jobs) {
    std::vector<SimJob> out;
    out.reserve(jobs.size());
    for (const auto& j : jobs) {
        out.push_back(to_sim_job(j));
    }
    return out;
}

EasyScheduler::EasyScheduler(std::int64_t processors, EasyOptions options)
    : processors_(processors), options_(options), free_(processors) {
    if (processors <= 0) {
        throw InvalidArgument("processor count must be positive");
    }
}

std::vector<const ScheduledJob*> EasyScheduler::waiting() const {
    std::vector<const ScheduledJob*> out;
    out.reserve(queue_.size());
    for (auto i : queue_) {
        out.push_back(&jobs_[i]);
    }
    return out;
}

std::vector<const ScheduledJob*> EasyScheduler::running() const {
    std::vector<const ScheduledJob*> out;
    out.reserve(running_.size());
    for (auto i : running_) {
        out.push_back(&jobs_[i]);
    }
    return out;
}

std::optional<Seconds> EasyScheduler::next_completion() const {
    std::optional<Seconds> t;
    for (auto i : running_) {
        if (!t || jobs_[i].endTime < *t) {
            t = jobs_[i].endTime;
        }
    }
    return t;
}

void EasyScheduler::start(std::size_t index) {
    auto& j = jobs_[index];
    j.startTime = clock_;
    j.endTime = clock_ + runs_[index];
    free_ -= j.reqSize;
    maxBusy_ = std::max(maxBusy_, processors_ - free_);
    running_.push_back(index);
    if (onStart_) {
        onStart_(j);
    }
}

void EasyScheduler::schedule_pass() {
    while (!queue_.empty() && jobs_[queue_.front()].reqSize <= free_) {
        const auto i = queue_.front();
        queue_.pop_front();
        start(i);
    }
    if (queue_.empty()) {
        return;
    }
    auto& head = jobs_[queue_.front()];

    std::vector<std::pair<Seconds, std::int64_t>> ends;
    ends.reserve(running_.size());
    for (auto i : running_) {
        ends.emplace_back(jobs_[i].startTime + jobs_[i].estimate, jobs_[i].reqSize);
    }
    std::sort(ends.begin(), ends.end());
    Seconds shadow = clock_;
    std::int64_t extra = 0;
    std::int64_t avail = free_;
    for (const auto& [end, procs] : ends) {
        avail += procs;
        if (avail >= head.reqSize) {
            shadow = end;
            extra = avail - head.reqSize;
            break;
        }
    }
    if (!head.reservation) {
        head.reservation = shadow;
    }

    std::deque<std::size_t> remaining;
    remaining.push_back(queue_.front());
    for (std::size_t k = 1; k < queue_.size(); ++k) {
        const auto i = queue_[k];
        const auto& j = jobs_[i];
        if (j.reqSize <= free_) {
            if (clock_ + j.estimate <= shadow) {
                start(i);
                continue;
            }
            if (j.reqSize <= extra) {
                extra -= j.reqSize;
                start(i);
                continue;
            }
        }
        remaining.push_back(i);
    }
    queue_ = std::move(remaining);
}

void EasyScheduler::complete_until(Seconds t, bool inclusive) {
    while (true) {
        const auto next = next_completion();
        if (!next || *next > t || (!inclusive && *next == t)) {
            return;
        }
        clock_ = *next;
        std::vector<std::size_t> still;
        still.reserve(running_.size());
        std::vector<std::size_t> done;
        for (auto i : running_) {
            (jobs_[i].endTime == clock_ ? done : still).push_back(i);
        }
        running_ = std::move(still);
        for (auto i : done) {
            free_ += jobs_[i].reqSize;
            if (onFinish_) {
                onFinish_(jobs_[i]);
            }
        }
        schedule_pass();
    }
}

void EasyScheduler::advance_to(Seconds t) {
    if (t < clock_) {
        throw InvalidArgument("scheduler clock cannot move backwards");
    }
    complete_until(t, true);
    clock_ = t;
}

void EasyScheduler::submit(const SimJob& job) {
    if (job.reqSize < 1 || job.reqSize > processors_) {
        throw InvalidArgument("job " + std::to_string(job.jobId) + " requests " + std::to_string(job.reqSize) +
                              " of " + std::to_string(processors_) + " processors");
    }
    if (job.submitTime < clock_) {
        throw InvalidArgument("job " + std::to_string(job.jobId) + " submitted before the current clock");
    }
    complete_until(job.submitTime, options_.tieOrder == TieOrder::CompletionsFirst);
    clock_ = job.submitTime;

    ScheduledJob s;
    s.jobId = job.jobId;
    s.submitTime = job.submitTime;
    s.reqSize = job.reqSize;
    s.estimate = std::max<Seconds>(0, job.estimate);
    jobs_.push_back(s);
    runs_.push_back(std::max<Seconds>(0, job.effective_run()));
    queue_.push_back(jobs_.size() - 1);
    schedule_pass();
}

void EasyScheduler::drain() {
    complete_until(std::numeric_limits<Seconds>::max(), true);
}

SimulationResult run_simulation(std::span<const SimJob> jobs, std::int64_t processors, EasyOptions options) {
    for (std::size_t i = 1; i < jobs.size(); ++i) {
        if (jobs[i].submitTime < jobs[i - 1].submitTime) {
            throw InvalidArgument("jobs must be sorted by submit time");
        }
    }
    EasyScheduler scheduler(processors, options);
    SimulationResult result;
    for (const auto& j : jobs) {
        if (j.reqSize < 1) {
            result.rejected.push_back({j.jobId, "request size below 1"});
            continue;
        }
        if (j.reqSize > processors) {
            result.rejected.push_back({j.jobId, "request size exceeds machine"});
            continue;
        }
        scheduler.submit(j);
    }
    scheduler.drain();
    result.jobs.assign(scheduler.jobs().begin(), scheduler.jobs().end());
    result.maxBusy = scheduler.max_busy();
    return result;
}

double utilization(std::span<const ScheduledJob> jobs, std::int64_t processors, Seconds horizon) {
    if (processors <= 0 || horizon <= 0) {
        throw InvalidArgument("utilization needs positive processors and horizon");
    }
    double used = 0.0;
    for (const auto& j : jobs) {
        used += static_cast<double>(j.reqSize) * static_cast<double>(j.run());
    }
    return 100.0 * used / (static_cast<double>(processors) * static_cast<double>(horizon));
}

Seconds horizon(std::span<const ScheduledJob> jobs) {
    if (jobs.empty()) {
        return 0;
    }
    Seconds first = jobs.front().submitTime;
    Seconds last = jobs.front().endTime;
    for (const auto& j : jobs) {
        first = std::min(first, j.submitTime);
        last = std::max(last, j.endTime);
    }
    return last - first;
}

void write_schedule_csv(std::ostream& out, std::span<const ScheduledJob> jobs) {
    out << "jobId,wait,start,end,procs\n";
    for (const auto& j : jobs) {
        out << j.jobId << ',' << j.wait() << ',' << j.startTime << ',' << j.endTime << ',' << j.reqSize << '\n';
    }
}

std::vector<SimJob> read_sim_jobs_csv(std::istream& in) {
    const auto table = csv::read(in);
    std::vector<SimJob> out;
    out.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (table.rows[r].size() != table.header.size()) {
            throw ParseError(r + 2, "wrong number of columns");
        }
        SimJob j;
        j.jobId = static_cast<std::int64_t>(table.number(r, "jobId"));
        j.submitTime = static_cast<Seconds>(table.number(r, "submit"));
        j.reqSize = static_cast<std::int64_t>(table.number(r, "procs"));
        j.estimate = static_cast<Seconds>(table.number(r, "estimate"));
        j.actualRun = static_cast<Seconds>(table.number(r, "runtime"));
        out.push_back(j);
    }
    return out;
}

void write_sim_jobs_csv(std::ostream& out, std::span<const SimJob> jobs) {
    out << "jobId,submit,procs,estimate,runtime\n";
    for (const auto& j : jobs) {
        out << j.jobId << ',' << j.submitTime << ',' << j.reqSize << ',' << j.estimate << ',' << j.actualRun << '\n';
    }
}

} // namespace hpcpred::sched
