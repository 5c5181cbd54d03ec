#include "hpcpred/policy_sim.hpp"

#include "hpcpred/csv.hpp"
#include "hpcpred/error.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <unordered_map>

namespace hpcpred::policy {

std::string_view to_string(Policy p) {
    switch (p) {
    case Policy::Baseline: return "baseline";
    case Policy::Mold: return "mold";
    case Policy::Delay: return "delay";
    }
    return "?";
}

Policy parse_policy(std::string_view s) {
    if (s == "baseline") return Policy::Baseline;
    if (s == "mold") return Policy::Mold;
    if (s == "delay") return Policy::Delay;
    throw ConfigError("unknown policy '" + std::string(s) + "' (expected baseline, mold or delay)");
}

namespace {

using exectime::ResponseRangeSet;

struct UserSizeHistory {
    std::vector<Seconds> erts;
    std::vector<Seconds> runs;
};

struct Evaluation {
    manager::MoldDecision decision;
    /// Point exec prediction per candidate, aligned with decision.candidates.
    std::vector<double> execPoints;
};

class Simulation {
public:
    Simulation(std::span<const JobRecord> history, std::span<const JobRecord> policyJobs, const PolicyConfig& cfg)
        : cfg_(cfg),
          policyJobs_(policyJobs),
          waitPredictor_(cfg.wait),
          tracker_(cfg.processors, cfg.loadWindow),
          scheduler_(cfg.processors, cfg.scheduler),
          rng_(cfg.seed) {
        warm_start(history);
        scheduler_.on_start([this](const sched::ScheduledJob& j) { job_started(j); });
        scheduler_.on_finish([this](const sched::ScheduledJob& j) { job_finished(j); });
    }

    PolicyRun run();

private:
    void warm_start(std::span<const JobRecord> history);
    void job_started(const sched::ScheduledJob& j);
    void job_finished(const sched::ScheduledJob& j);

    void arrive(const JobRecord& job, Seconds now);
    void release(const manager::Release& r, Seconds now);
    void submit(const JobRecord& record, Seconds now, std::optional<double> execPoint);

    [[nodiscard]] SystemSnapshot snapshot(Seconds now) const;
    [[nodiscard]] SystemSnapshot projected(const SystemSnapshot& now, Seconds future) const;
    [[nodiscard]] double predicted_load(Seconds now) const;
    [[nodiscard]] std::vector<Seconds> predicted_completions() const;

    [[nodiscard]] JobRecord candidate(const JobRecord& original, std::int64_t size, Seconds at) const;
    [[nodiscard]] ResponseRangeSet exec_rangeset(const JobRecord& rec, double load) const;
    [[nodiscard]] Evaluation evaluate(const JobRecord& original, Seconds at, const SystemSnapshot& snap,
                                      double load) const;
    /// Record to submit for the evaluated choice; draws a runtime when the
    /// size changed.
    JobRecord finalize(const JobRecord& original, Seconds at, const Evaluation& e);
    void log_decision(const JobRecord& original, const JobRecord& submitted, const Evaluation& e,
                      manager::DelayDecision delay, std::optional<Seconds> futureTime);

    PolicyConfig cfg_;
    std::span<const JobRecord> policyJobs_;
    qwait::HistogramBinning binning_;
    qwait::WaitPredictor waitPredictor_;
    exectime::ExecHistory execHistory_;
    std::vector<exectime::LoadFunction> functions_;
    LoadTracker tracker_;
    sched::EasyScheduler scheduler_;
    std::mt19937_64 rng_;
    Seconds maxLimit_ = 1;
    std::map<std::int64_t, std::map<std::int64_t, UserSizeHistory>> users_;

    struct Live {
        JobRecord record;
        qwait::JobState state;
        std::optional<double> execPoint;
    };
    std::unordered_map<std::int64_t, Live> live_;

    std::vector<JobOutcome> outcomes_;
    std::unordered_map<std::int64_t, std::size_t> outcomeIndex_;
    std::vector<manager::DecisionRecord> decisions_;
    std::unordered_map<std::int64_t, std::size_t> decisionIndex_;
    std::vector<HoldEpisode> episodes_;
    std::vector<Rejection> rejected_;
    manager::HoldQueue hold_;
    std::map<std::pair<Seconds, std::size_t>, manager::Release> pending_;
    std::size_t releaseSeq_ = 0;
};

void Simulation::warm_start(std::span<const JobRecord> history) {
    if (cfg_.policy == Policy::Baseline) {
        return;
    }
    for (const auto& j : history) {
        maxLimit_ = std::max(maxLimit_, j.ert);
    }
    for (const auto& j : policyJobs_) {
        maxLimit_ = std::max(maxLimit_, j.ert);
    }
    if (cfg_.maxLimit > 0) {
        maxLimit_ = cfg_.maxLimit;
    }
    binning_ = qwait::HistogramBinning::fit(history.empty() ? policyJobs_ : history, cfg_.wait.bins);
    if (history.empty()) {
        return;
    }

    auto samples = qwait::build_wait_samples(history, binning_);
    std::vector<std::size_t> byStart(samples.size());
    for (std::size_t i = 0; i < byStart.size(); ++i) {
        byStart[i] = i;
    }
    std::stable_sort(byStart.begin(), byStart.end(), [&](std::size_t a, std::size_t b) {
        return samples[a].job.startTime() < samples[b].job.startTime();
    });
    for (auto i : byStart) {
        waitPredictor_.add_history(
            {samples[i].job.jobId, samples[i].state, static_cast<double>(samples[i].job.waitTime)});
    }

    const auto loads = execution_loads(history, cfg_.processors);
    std::vector<exectime::ExecSample> execs;
    execs.reserve(history.size());
    for (std::size_t i = 0; i < history.size(); ++i) {
        execs.push_back({history[i], loads[i]});
    }
    functions_ = exectime::build_load_functions(execs, cfg_.loadFunctions).functions;
    std::vector<std::size_t> byEnd(history.size());
    for (std::size_t i = 0; i < byEnd.size(); ++i) {
        byEnd[i] = i;
    }
    std::stable_sort(byEnd.begin(), byEnd.end(),
                     [&](std::size_t a, std::size_t b) { return history[a].endTime() < history[b].endTime(); });
    for (auto i : byEnd) {
        execHistory_.add(execs[i]);
        auto& u = users_[history[i].userId][history[i].reqSize];
        u.erts.push_back(history[i].ert);
        u.runs.push_back(history[i].runTime);
    }

    // The simulated machine starts empty; recorded executions only inform
    // the load history up to the first policy submission.
    const Seconds cutoff = policyJobs_.empty() ? history.back().endTime() : policyJobs_.front().submitTime;
    std::sort(byStart.begin(), byStart.end(), [&](std::size_t a, std::size_t b) {
        return history[a].startTime() < history[b].startTime();
    });
    for (auto i : byStart) {
        const auto& j = history[i];
        if (j.startTime() >= cutoff) {
            continue;
        }
        tracker_.start(j.jobId, j.startTime(), j.reqSize);
        tracker_.finish(j.jobId, std::min(j.endTime(), cutoff));
    }
}

void Simulation::job_started(const sched::ScheduledJob& j) {
    tracker_.start(j.jobId, j.startTime, j.reqSize);
    if (cfg_.policy != Policy::Baseline) {
        waitPredictor_.add_history({j.jobId, live_.at(j.jobId).state, static_cast<double>(j.wait())});
    }
    auto& o = outcomes_[outcomeIndex_.at(j.jobId)];
    o.startTime = j.startTime;
}

void Simulation::job_finished(const sched::ScheduledJob& j) {
    tracker_.finish(j.jobId, j.endTime);
    auto it = live_.find(j.jobId);
    JobRecord rec = it->second.record;
    rec.submitTime = j.submitTime;
    rec.waitTime = j.wait();
    rec.runTime = j.run();
    const double load = tracker_.load_between(j.startTime, j.endTime, j.endTime, j.jobId);
    execHistory_.add({rec, load});
    auto& u = users_[rec.userId][rec.reqSize];
    u.erts.push_back(rec.ert);
    u.runs.push_back(rec.runTime);
    auto& o = outcomes_[outcomeIndex_.at(j.jobId)];
    o.endTime = j.endTime;
    live_.erase(it);
}

SystemSnapshot Simulation::snapshot(Seconds now) const {
    SystemSnapshot s;
    s.atTime = now;
    for (const auto* j : scheduler_.waiting()) {
        s.waiting.push_back({live_.at(j->jobId).record, now - j->submitTime});
    }
    for (const auto* j : scheduler_.running()) {
        s.running.push_back({live_.at(j->jobId).record, now - j->startTime});
    }
    return s;
}

std::vector<Seconds> Simulation::predicted_completions() const {
    std::vector<Seconds> out;
    for (const auto* j : scheduler_.running()) {
        const auto& live = live_.at(j->jobId);
        const double run = live.execPoint ? *live.execPoint : static_cast<double>(j->estimate);
        out.push_back(j->startTime + static_cast<Seconds>(std::llround(run)));
    }
    return out;
}

SystemSnapshot Simulation::projected(const SystemSnapshot& now, Seconds future) const {
    const auto completions = predicted_completions();
    const auto running = scheduler_.running();
    SystemSnapshot s;
    s.atTime = future;
    const Seconds dt = future - now.atTime;
    for (const auto& w : now.waiting) {
        s.waiting.push_back({w.job, w.elapsed + dt});
    }
    for (std::size_t i = 0; i < running.size(); ++i) {
        if (completions[i] > future) {
            s.running.push_back({now.running[i].job, now.running[i].elapsed + dt});
        }
    }
    return s;
}

double Simulation::predicted_load(Seconds now) const {
    if (auto l = tracker_.predicted_load(now)) {
        return *l;
    }
    return static_cast<double>(tracker_.busy(now)) / static_cast<double>(cfg_.processors);
}

JobRecord Simulation::candidate(const JobRecord& original, std::int64_t size, Seconds at) const {
    JobRecord rec = original;
    rec.submitTime = at;
    rec.waitTime = 0;
    if (size != original.reqSize) {
        rec.reqSize = size;
        std::span<const Seconds> erts;
        if (auto u = users_.find(original.userId); u != users_.end()) {
            if (auto s = u->second.find(size); s != u->second.end()) {
                erts = s->second.erts;
            }
        }
        rec.ert = manager::set_estimated_runtime(original.ert, size, original.reqSize, erts, maxLimit_);
        rec.ertKnown = true;
    }
    return rec;
}

ResponseRangeSet Simulation::exec_rangeset(const JobRecord& rec, double load) const {
    const auto exact = execHistory_.for_key(exectime::TupleKey::of(rec));
    if (!exact.empty()) {
        return exectime::predict_rangeset(exact, functions_, load, cfg_.rangeSet);
    }
    const auto sameSize = execHistory_.for_user_size(rec.userId, rec.reqSize);
    if (!sameSize.empty()) {
        return exectime::predict_rangeset(sameSize, functions_, load, cfg_.rangeSet);
    }
    const auto ert = static_cast<double>(rec.ert);
    return {{{{ert, ert}, 1.0}}};
}

Evaluation Simulation::evaluate(const JobRecord& original, Seconds at, const SystemSnapshot& snap,
                                double load) const {
    std::vector<std::int64_t> sizes;
    if (auto u = users_.find(original.userId); u != users_.end()) {
        for (const auto& [size, h] : u->second) {
            sizes.push_back(size);
        }
    }
    std::map<std::int64_t, double> execPoint;
    manager::MoldingInputs inputs;
    inputs.predictWait = [&](std::int64_t s) {
        const auto state = qwait::build_state(snap, candidate(original, s, at), binning_);
        return waitPredictor_.predict(state).seconds;
    };
    inputs.predictExec = [&](std::int64_t s) {
        auto rs = exec_rangeset(candidate(original, s, at), load);
        execPoint[s] = exectime::point_from_rangeset(rs);
        return rs;
    };
    Evaluation e;
    e.decision = manager::mold_job(sizes, cfg_.processors, inputs);
    for (const auto& c : e.decision.candidates) {
        e.execPoints.push_back(execPoint.at(c.reqSize));
    }
    return e;
}

JobRecord Simulation::finalize(const JobRecord& original, Seconds at, const Evaluation& e) {
    if (e.decision.passThrough) {
        JobRecord rec = original;
        rec.submitTime = at;
        return rec;
    }
    const auto size = e.decision.choice().reqSize;
    JobRecord rec = candidate(original, size, at);
    if (size != original.reqSize) {
        const auto& runs = users_.at(original.userId).at(size).runs;
        rec.runTime = manager::sample_actual_runtime(runs, rng_);
    }
    return rec;
}

void Simulation::log_decision(const JobRecord& original, const JobRecord& submitted, const Evaluation& e,
                              manager::DelayDecision delay, std::optional<Seconds> futureTime) {
    manager::DecisionRecord d;
    d.jobId = original.jobId;
    d.originalReqSize = original.reqSize;
    d.chosenReqSize = submitted.reqSize;
    for (const auto& c : e.decision.candidates) {
        d.scores.emplace_back(c.reqSize, c.score);
    }
    d.delay = delay;
    d.futureTime = futureTime;
    if (auto it = decisionIndex_.find(original.jobId); it != decisionIndex_.end()) {
        auto& existing = decisions_[it->second];
        existing.chosenReqSize = d.chosenReqSize;
        existing.scores = std::move(d.scores);
        return;
    }
    decisionIndex_[original.jobId] = decisions_.size();
    decisions_.push_back(std::move(d));
}

void Simulation::submit(const JobRecord& record, Seconds now, std::optional<double> execPoint) {
    qwait::JobState state;
    if (cfg_.policy != Policy::Baseline) {
        state = qwait::build_state(snapshot(now), record, binning_);
    }
    live_[record.jobId] = {record, std::move(state), execPoint};
    auto& o = outcomes_[outcomeIndex_.at(record.jobId)];
    o.schedulerSubmit = now;
    o.reqSize = record.reqSize;
    o.estimate = record.ert;
    auto sim = sched::to_sim_job(record);
    sim.submitTime = now;
    sim.estimate = record.ert;
    scheduler_.submit(sim);
}

void Simulation::arrive(const JobRecord& job, Seconds now) {
    if (cfg_.policy == Policy::Baseline) {
        submit(job, now, std::nullopt);
        return;
    }
    if (cfg_.policy == Policy::Delay && hold_.active()) {
        hold_.add(job);
        outcomes_[outcomeIndex_.at(job.jobId)].held = true;
        manager::DecisionRecord d;
        d.jobId = job.jobId;
        d.originalReqSize = job.reqSize;
        d.chosenReqSize = job.reqSize;
        d.delay = manager::DelayDecision::Follower;
        decisionIndex_[job.jobId] = decisions_.size();
        decisions_.push_back(std::move(d));
        return;
    }

    const auto snap = snapshot(now);
    const double load = predicted_load(now);
    const auto current = evaluate(job, now, snap, load);
    auto point_of = [](const Evaluation& e) {
        return exectime::point_from_rangeset(e.decision.choice().response);
    };
    auto exec_of = [](const Evaluation& e) -> std::optional<double> {
        if (e.decision.passThrough) {
            return std::nullopt;
        }
        return e.execPoints[e.decision.chosen];
    };

    if (cfg_.policy == Policy::Delay && !current.decision.passThrough) {
        const Seconds future = manager::find_future_time(predicted_completions(), now, cfg_.futureSlack);
        if (future > now) {
            const auto proj = projected(snap, future);
            std::int64_t busyNow = 0;
            std::int64_t busyThen = 0;
            for (const auto& r : snap.running) busyNow += r.job.reqSize;
            for (const auto& r : proj.running) busyThen += r.job.reqSize;
            const double futureLoad =
                busyNow > 0 ? load * static_cast<double>(busyThen) / static_cast<double>(busyNow) : load;
            const auto later = evaluate(job, future, proj, futureLoad);
            if (!later.decision.passThrough) {
                const double cur = point_of(current);
                const double fut = point_of(later) + static_cast<double>(future - now);
                if (manager::decide_delay(cur, fut, cfg_.delayThreshold)) {
                    hold_.open(job, future);
                    outcomes_[outcomeIndex_.at(job.jobId)].held = true;
                    episodes_.push_back({job.jobId, now, future, {}});
                    log_decision(job, job, later, manager::DelayDecision::Delay, future);
                    return;
                }
            }
        }
        const auto rec = finalize(job, now, current);
        log_decision(job, rec, current, manager::DelayDecision::SubmitNow, std::nullopt);
        submit(rec, now, exec_of(current));
        return;
    }

    const auto rec = finalize(job, now, current);
    log_decision(job, rec, current,
                 cfg_.policy == Policy::Delay ? manager::DelayDecision::SubmitNow
                                              : manager::DelayDecision::NotEvaluated,
                 std::nullopt);
    submit(rec, now, exec_of(current));
}

void Simulation::release(const manager::Release& r, Seconds now) {
    const auto snap = snapshot(now);
    const auto e = evaluate(r.job, now, snap, predicted_load(now));
    const auto rec = finalize(r.job, now, e);
    log_decision(r.job, rec, e, manager::DelayDecision::Follower, std::nullopt);
    submit(rec, now, e.decision.passThrough ? std::nullopt : std::optional<double>(e.execPoints[e.decision.chosen]));
}

PolicyRun Simulation::run() {
    for (const auto& j : policyJobs_) {
        if (j.reqSize < 1 || j.reqSize > cfg_.processors) {
            rejected_.push_back({j.jobId, "request size outside 1.." + std::to_string(cfg_.processors)});
            continue;
        }
        JobOutcome o;
        o.jobId = j.jobId;
        o.userId = j.userId;
        o.originalSubmit = j.submitTime;
        o.originalReqSize = j.reqSize;
        outcomeIndex_[j.jobId] = outcomes_.size();
        outcomes_.push_back(o);
    }

    std::size_t next = 0;
    while (true) {
        while (next < policyJobs_.size() && !outcomeIndex_.contains(policyJobs_[next].jobId)) {
            ++next;
        }
        std::optional<Seconds> t;
        auto consider = [&t](Seconds v) {
            if (!t || v < *t) t = v;
        };
        if (next < policyJobs_.size()) consider(policyJobs_[next].submitTime);
        if (!pending_.empty()) consider(pending_.begin()->first.first);
        if (hold_.active()) consider(hold_.future_time());
        if (!t) {
            break;
        }
        scheduler_.advance_to(*t);
        if (hold_.active() && hold_.future_time() == *t) {
            auto released = hold_.release();
            episodes_.back().releases = released;
            for (auto& r : released) {
                pending_.emplace(std::make_pair(r.submitAt, releaseSeq_++), std::move(r));
            }
        }
        while (!pending_.empty() && pending_.begin()->first.first == *t) {
            const auto r = pending_.begin()->second;
            pending_.erase(pending_.begin());
            release(r, *t);
        }
        if (next < policyJobs_.size() && policyJobs_[next].submitTime == *t) {
            arrive(policyJobs_[next], *t);
            ++next;
        }
    }
    scheduler_.drain();

    PolicyRun out;
    out.policy = cfg_.policy;
    out.processors = cfg_.processors;
    out.jobs = std::move(outcomes_);
    out.decisions = std::move(decisions_);
    out.episodes = std::move(episodes_);
    out.rejected = std::move(rejected_);
    return out;
}

} // namespace

PolicyRun simulate_policy(std::span<const JobRecord> history, std::span<const JobRecord> policyJobs,
                          const PolicyConfig& config) {
    if (config.processors < 1) {
        throw ConfigError("processor count must be positive");
    }
    for (std::size_t i = 1; i < policyJobs.size(); ++i) {
        if (policyJobs[i].submitTime < policyJobs[i - 1].submitTime) {
            throw InvalidArgument("policy jobs must be sorted by submit time");
        }
    }
    Simulation sim(history, policyJobs, config);
    return sim.run();
}

void write_outcomes_csv(std::ostream& out, std::span<const JobOutcome> jobs) {
    out << "jobId,userId,originalSubmit,schedulerSubmit,originalReqSize,reqSize,estimate,start,end,wait,run,response,"
           "held\n";
    for (const auto& j : jobs) {
        out << j.jobId << ',' << j.userId << ',' << j.originalSubmit << ',' << j.schedulerSubmit << ','
            << j.originalReqSize << ',' << j.reqSize << ',' << j.estimate << ',' << j.startTime << ',' << j.endTime
            << ',' << j.wait() << ',' << j.run() << ',' << j.response() << ',' << (j.held ? 1 : 0) << '\n';
    }
}

} // namespace hpcpred::policy
