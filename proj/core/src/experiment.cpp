#include "hpcpred/experiment.hpp"

#include "hpcpred/csv.hpp"
#include "hpcpred/error.hpp"
#include "hpcpred/histogram.hpp"
#include "hpcpred/simstate.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace hpcpred {

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    return out;
}

qwait::WaitPredictorConfig wait_config(const ExperimentConfig& c, qwait::StatisticMode mode) {
    auto w = c.wait;
    w.mode = mode;
    return w;
}

/// Wait samples from the start of the history split to the end of the test
/// split. Bin edges are fitted on the validation jobs, or on every job when
/// there is no validation split.
std::vector<qwait::WaitSample> wait_samples(const LoadedTrace& t, std::size_t bins) {
    const std::size_t from = t.split.history.begin;
    const std::size_t to = std::max({t.split.history.end, t.split.validation.end, t.split.test.end});
    const auto jobs = std::span<const JobRecord>(t.jobs).subspan(from, to - from);
    const auto calibration =
        t.split.validation.empty() ? jobs : std::span<const JobRecord>(t.jobs).subspan(t.split.validation.begin,
                                                                                        t.split.validation.size());
    const auto binning = qwait::HistogramBinning::fit(calibration, bins);
    return qwait::build_wait_samples(jobs, binning);
}

IndexRange shifted(IndexRange r, std::size_t by) {
    if (r.empty()) {
        return {0, 0};
    }
    return {r.begin - by, r.end - by};
}

double outcome_aae(std::span<const qwait::WaitOutcome> outcomes) {
    std::vector<double> p;
    std::vector<double> a;
    for (const auto& o : outcomes) {
        p.push_back(o.prediction.seconds);
        a.push_back(o.actual);
    }
    return metrics::aae(p, a);
}

std::string fmt_minutes(double seconds) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(2);
    s << seconds / 60.0;
    return s.str();
}

} // namespace

LoadedTrace prepare_trace(std::string name, Trace trace, const ExperimentConfig& config) {
    LoadedTrace t;
    t.name = std::move(name);
    t.header = std::move(trace.header);
    t.parsedJobs = trace.jobs.size();
    auto filtered = filter_completed(trace.jobs);
    t.jobs = std::move(filtered.jobs);
    t.rejected = std::move(filtered.rejections);
    t.processors = system_size(t.header, config.processors > 0 ? std::optional(config.processors) : std::nullopt);
    t.split = config.split ? *config.split : default_split(t.jobs.size());
    check_split(t.split, t.jobs.size());
    return t;
}

LoadedTrace load_trace(const ExperimentConfig& config) {
    if (config.tracePath.empty()) {
        throw ConfigError("no trace given");
    }
    const fs::path path(config.tracePath);
    return prepare_trace(path.stem().string(), parse_swf(path), config);
}

WaitReport run_predict_wait(const LoadedTrace& t, const ExperimentConfig& config) {
    const auto samples = wait_samples(t, config.wait.bins);
    const std::size_t from = t.split.history.begin;
    WaitReport r;
    if (config.waitMode) {
        r.mode.mode = *config.waitMode;
        r.mode.defaulted = false;
    } else {
        r.mode = qwait::choose_statistic_mode(samples, shifted(t.split.validation, from), config.wait);
    }
    r.outcomes = qwait::evaluate_online(samples, shifted(t.split.test, from), wait_config(config, r.mode.mode));
    std::vector<double> p;
    std::vector<double> a;
    std::vector<double> resp;
    for (const auto& o : r.outcomes) {
        p.push_back(o.prediction.seconds);
        a.push_back(o.actual);
        resp.push_back(o.response);
    }
    r.aae = metrics::aae(p, a);
    // Zero-response jobs cannot be scaled; they are left out of that average.
    std::vector<double> sp;
    std::vector<double> sa;
    std::vector<double> sr;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (resp[i] > 0.0) {
            sp.push_back(p[i]);
            sa.push_back(a[i]);
            sr.push_back(resp[i]);
        }
    }
    r.scaledAae = metrics::scaled_aae(sp, sa, sr);
    r.classes = metrics::class_errors(p, a);
    return r;
}

ExecReport run_predict_exec(const LoadedTrace& t, const ExperimentConfig& config) {
    const auto loads = execution_loads(t.jobs, t.processors);
    std::vector<exectime::ExecSample> validation;
    for (std::size_t i = t.split.validation.begin; i < t.split.validation.end; ++i) {
        validation.push_back({t.jobs[i], loads[i]});
    }
    ExecReport r;
    r.functions = exectime::build_load_functions(validation, config.loadFunctions).functions;

    const std::size_t n = t.split.test.end;
    std::vector<std::size_t> byStart(n);
    std::vector<std::size_t> byEnd(n);
    for (std::size_t i = 0; i < n; ++i) {
        byStart[i] = byEnd[i] = i;
    }
    std::stable_sort(byStart.begin(), byStart.end(),
                     [&](std::size_t a, std::size_t b) { return t.jobs[a].startTime() < t.jobs[b].startTime(); });
    std::stable_sort(byEnd.begin(), byEnd.end(),
                     [&](std::size_t a, std::size_t b) { return t.jobs[a].endTime() < t.jobs[b].endTime(); });

    LoadTracker tracker(t.processors, config.loadWindow);
    exectime::ExecHistory history;
    std::size_t si = 0;
    std::size_t ei = 0;
    std::vector<bool> started(n, false);
    std::vector<double> points;
    std::vector<double> actuals;
    for (std::size_t k = t.split.test.begin; k < t.split.test.end; ++k) {
        const auto& job = t.jobs[k];
        const Seconds now = job.submitTime;
        // Starts before ends at equal times, so zero-length runs open and close.
        while (true) {
            const bool canStart = si < n && t.jobs[byStart[si]].startTime() <= now;
            const bool canEnd = ei < n && t.jobs[byEnd[ei]].endTime() <= now;
            if (canStart && (!canEnd || t.jobs[byStart[si]].startTime() <= t.jobs[byEnd[ei]].endTime())) {
                const auto& s = t.jobs[byStart[si]];
                tracker.start(s.jobId, s.startTime(), s.reqSize);
                started[byStart[si]] = true;
                ++si;
            } else if (canEnd) {
                const auto idx = byEnd[ei];
                if (!started[idx]) {
                    break;
                }
                tracker.finish(t.jobs[idx].jobId, t.jobs[idx].endTime());
                history.add({t.jobs[idx], loads[idx]});
                ++ei;
            } else {
                break;
            }
        }
        const auto keyHistory = history.for_key(exectime::TupleKey::of(job));
        if (keyHistory.empty()) {
            ++r.coldStart;
            continue;
        }
        const double load = tracker.predicted_load(now).value_or(static_cast<double>(tracker.busy(now)) /
                                                                  static_cast<double>(t.processors));
        ExecJobResult res;
        res.jobId = job.jobId;
        res.actual = static_cast<double>(job.runTime);
        res.predictedLoad = load;
        res.rangeSet = exectime::predict_rangeset(keyHistory, r.functions, load, config.rangeSet);
        std::vector<double> execs;
        for (const auto& s : keyHistory) {
            execs.push_back(s.exec());
        }
        res.baseline = exectime::baseline_range(execs);
        points.push_back(exectime::point_from_rangeset(res.rangeSet));
        actuals.push_back(res.actual);
        r.jobs.push_back(std::move(res));
    }

    std::vector<exectime::ResponseRangeSet> sets;
    std::vector<exectime::ResponseRangeSet> baselineSets;
    std::vector<exectime::TimeRange> baselines;
    for (const auto& j : r.jobs) {
        sets.push_back(j.rangeSet);
        baselineSets.push_back({{{j.baseline, 1.0}}});
        baselines.push_back(j.baseline);
    }
    r.rangeSet = metrics::success_and_coverage(sets, actuals, baselines);
    r.baseline = metrics::success_and_coverage(baselineSets, actuals, baselines);
    r.pointAae = metrics::aae(points, actuals);
    return r;
}

SimReport run_policy_simulation(const LoadedTrace& t, const ExperimentConfig& config, policy::Policy p) {
    const auto n = t.jobs.size();
    const auto h = static_cast<std::size_t>(static_cast<double>(n) * config.simHistoryFraction);
    std::size_t end = n;
    if (config.simMaxJobs > 0) {
        end = std::min(n, h + config.simMaxJobs);
    }
    const auto all = std::span<const JobRecord>(t.jobs);
    SimReport r;
    r.run = policy::simulate_policy(all.subspan(0, h), all.subspan(h, end - h), config.policy_config(p, t.processors));
    r.summary = metrics::summarize(r.run.jobs, t.processors);
    std::map<std::int64_t, const JobRecord*> original;
    for (std::size_t i = h; i < end; ++i) {
        original[t.jobs[i].jobId] = &t.jobs[i];
    }
    std::vector<double> cpuHours;
    for (const auto& j : r.run.jobs) {
        const auto* o = original.at(j.jobId);
        cpuHours.push_back(static_cast<double>(o->reqSize) * static_cast<double>(o->runTime) / 3600.0);
    }
    r.cpuHours = metrics::response_by_cpu_hours(r.run.jobs, cpuHours);
    r.load = metrics::load_series(r.run.jobs, t.processors, config.loadWindow.interval);
    return r;
}

metrics::TuneResult run_tune(const LoadedTrace& t, const ExperimentConfig& config) {
    if (config.tuneGrids.empty()) {
        throw ConfigError("tune needs at least one tune.<parameter> grid");
    }
    std::vector<metrics::TuneParameter> params;
    std::map<std::string, double> start;
    for (const auto& [name, grid] : config.tuneGrids) {
        params.push_back({name, grid});
        start[name] = config.numeric(name);
    }
    std::map<std::size_t, std::vector<qwait::WaitSample>> samplesByBins;
    const auto from = t.split.history.begin;
    const auto eval = shifted(t.split.validation, from);
    if (eval.empty()) {
        throw ConfigError("tune needs a non-empty validation split");
    }
    auto evaluate = [&](const std::map<std::string, double>& values) {
        ExperimentConfig c = config;
        for (const auto& [name, v] : values) {
            c.set(name, csv::num(v));
        }
        c.validate();
        auto it = samplesByBins.find(c.wait.bins);
        if (it == samplesByBins.end()) {
            it = samplesByBins.emplace(c.wait.bins, wait_samples(t, c.wait.bins)).first;
        }
        const auto mode = c.waitMode.value_or(qwait::StatisticMode::FeatureSummary);
        return outcome_aae(qwait::evaluate_online(it->second, eval, wait_config(c, mode)));
    };
    return metrics::tune(start, params, evaluate);
}

void write_wait_report(const fs::path& dir, const WaitReport& r) {
    {
        auto out = open_output(dir / "wait_predictions.csv");
        qwait::write_wait_diagnostics_csv(out, r.outcomes);
    }
    {
        auto out = open_output(dir / "wait_summary.csv");
        out << "metric,value\n";
        out << "jobs," << r.outcomes.size() << '\n';
        out << "mode," << qwait::to_string(r.mode.mode) << '\n';
        out << "aae," << csv::num(r.aae) << '\n';
        out << "scaled_aae," << csv::num(r.scaledAae) << '\n';
        std::map<std::string_view, std::size_t> models;
        for (const auto& o : r.outcomes) {
            ++models[qwait::to_string(o.prediction.model)];
        }
        for (const auto& [m, count] : models) {
            out << "model_" << m << ',' << count << '\n';
        }
    }
    {
        auto out = open_output(dir / "wait_classes.csv");
        out << "lo,hi,count,aae\n";
        for (const auto& c : r.classes) {
            out << csv::num(c.lo) << ',' << csv::num(c.hi) << ',' << c.count << ',' << csv::num(c.aae) << '\n';
        }
    }
}

void write_exec_report(const fs::path& dir, const ExecReport& r) {
    {
        auto out = open_output(dir / "exec_predictions.csv");
        out << "jobId,actual,predictedLoad,point,rangeSet,baselineLo,baselineHi\n";
        for (const auto& j : r.jobs) {
            out << j.jobId << ',' << csv::num(j.actual) << ',' << csv::num(j.predictedLoad) << ','
                << csv::num(exectime::point_from_rangeset(j.rangeSet)) << ',' << exectime::format_rangeset(j.rangeSet)
                << ',' << csv::num(j.baseline.lo) << ',' << csv::num(j.baseline.hi) << '\n';
        }
    }
    {
        auto out = open_output(dir / "exec_summary.csv");
        out << "metric,value\n";
        out << "jobs," << r.jobs.size() << '\n';
        out << "cold_start," << r.coldStart << '\n';
        out << "load_functions," << r.functions.size() << '\n';
        out << "success_rate," << csv::num(r.rangeSet.successRate) << '\n';
        out << "coverage," << csv::num(r.rangeSet.coverage) << '\n';
        out << "zero_baseline," << r.rangeSet.zeroBaseline << '\n';
        out << "baseline_success_rate," << csv::num(r.baseline.successRate) << '\n';
        out << "point_aae," << csv::num(r.pointAae) << '\n';
    }
    {
        auto out = open_output(dir / "load_functions.csv");
        exectime::write_load_functions_csv(out, r.functions);
    }
}

void write_sim_report(const fs::path& dir, const SimReport& r) {
    const std::string prefix = "sim_" + std::string(policy::to_string(r.run.policy)) + "_";
    {
        auto out = open_output(dir / (prefix + "jobs.csv"));
        policy::write_outcomes_csv(out, r.run.jobs);
    }
    {
        auto out = open_output(dir / (prefix + "summary.csv"));
        out << "metric,value\n";
        out << "jobs," << r.summary.jobs << '\n';
        out << "avg_wait," << csv::num(r.summary.avgWait) << '\n';
        out << "avg_run," << csv::num(r.summary.avgRun) << '\n';
        out << "avg_response," << csv::num(r.summary.avgResponse) << '\n';
        out << "utilization," << csv::num(r.summary.utilization) << '\n';
        out << "rejected," << r.run.rejected.size() << '\n';
        out << "hold_episodes," << r.run.episodes.size() << '\n';
    }
    {
        auto out = open_output(dir / (prefix + "cpuhours.csv"));
        out << "lo,hi,count,avg_response\n";
        for (const auto& c : r.cpuHours) {
            out << csv::num(c.lo) << ',' << csv::num(c.hi) << ',' << c.count << ',' << csv::num(c.avgResponse) << '\n';
        }
    }
    {
        auto out = open_output(dir / (prefix + "load.csv"));
        out << "from,load\n";
        for (const auto& p : r.load) {
            out << p.from << ',' << csv::num(p.load) << '\n';
        }
    }
    if (r.run.policy != policy::Policy::Baseline) {
        auto out = open_output(dir / (prefix + "decisions.csv"));
        manager::write_decision_log_csv(out, r.run.decisions);
    }
    if (r.run.policy == policy::Policy::Delay) {
        auto out = open_output(dir / (prefix + "episodes.csv"));
        out << "headJobId,openedAt,futureTime,position,jobId,releaseAt\n";
        for (const auto& e : r.run.episodes) {
            for (std::size_t i = 0; i < e.releases.size(); ++i) {
                out << e.headJobId << ',' << e.openedAt << ',' << e.futureTime << ',' << i << ','
                    << e.releases[i].job.jobId << ',' << e.releases[i].submitAt << '\n';
            }
        }
    }
    if (!r.run.rejected.empty()) {
        auto out = open_output(dir / (prefix + "rejections.csv"));
        write_rejections_csv(out, r.run.rejected);
    }
}

void write_tune_report(const fs::path& dir, const metrics::TuneResult& r, const ExperimentConfig& base) {
    {
        auto out = open_output(dir / "tune_sweep.csv");
        metrics::write_sweep_csv(out, r.rows);
    }
    ExperimentConfig best = base;
    for (const auto& [name, v] : r.best) {
        best.set(name, csv::num(v));
    }
    best.tuneGrids.clear();
    auto out = open_output(dir / "tuned.conf");
    best.write(out);
}

namespace {

void write_trace_rejections(const fs::path& dir, const LoadedTrace& t) {
    auto out = open_output(dir / "rejections.csv");
    write_rejections_csv(out, t.rejected);
}

std::vector<std::string> sim_lines(const SimReport& r) {
    return {std::string(policy::to_string(r.run.policy)) + ": jobs " + std::to_string(r.summary.jobs) +
            ", avg wait " + fmt_minutes(r.summary.avgWait) + " min, avg run " + fmt_minutes(r.summary.avgRun) +
            " min, avg response " + fmt_minutes(r.summary.avgResponse) + " min, utilization " +
            csv::num(r.summary.utilization) + "%"};
}

} // namespace

std::vector<std::string> run_experiment(const ExperimentConfig& config) {
    const auto t = load_trace(config);
    const fs::path dir(config.outputDir);
    fs::create_directories(dir);
    write_trace_rejections(dir, t);
    std::vector<std::string> lines{t.name + ": " + std::to_string(t.jobs.size()) + " completed jobs of " +
                                   std::to_string(t.parsedJobs) + ", P = " + std::to_string(t.processors)};
    switch (config.mode) {
    case Mode::PredictWait: {
        const auto r = run_predict_wait(t, config);
        write_wait_report(dir, r);
        lines.push_back("wait prediction (" + std::string(qwait::to_string(r.mode.mode)) + "): " +
                        std::to_string(r.outcomes.size()) + " jobs, AAE " + fmt_minutes(r.aae) + " min, scaled AAE " +
                        csv::num(r.scaledAae));
        break;
    }
    case Mode::PredictExec: {
        const auto r = run_predict_exec(t, config);
        write_exec_report(dir, r);
        lines.push_back("exec prediction: " + std::to_string(r.jobs.size()) + " jobs, success " +
                        csv::num(r.rangeSet.successRate) + "%, coverage " + csv::num(r.rangeSet.coverage) + "%, " +
                        std::to_string(r.functions.size()) + " load functions");
        break;
    }
    case Mode::SimulateBaseline:
    case Mode::SimulateMold:
    case Mode::SimulateDelay: {
        const auto p = config.mode == Mode::SimulateBaseline ? policy::Policy::Baseline
                       : config.mode == Mode::SimulateMold   ? policy::Policy::Mold
                                                             : policy::Policy::Delay;
        const auto r = run_policy_simulation(t, config, p);
        write_sim_report(dir, r);
        auto more = sim_lines(r);
        lines.insert(lines.end(), more.begin(), more.end());
        break;
    }
    case Mode::Tune: {
        const auto r = run_tune(t, config);
        write_tune_report(dir, r, config);
        lines.push_back("tuned " + std::to_string(r.best.size()) + " parameters over " +
                        std::to_string(r.rows.size()) + " evaluations, validation AAE " + fmt_minutes(r.bestScore) +
                        " min");
        break;
    }
    }
    return lines;
}

std::vector<std::string> run_report(const ExperimentConfig& config) {
    const auto t = load_trace(config);
    const fs::path dir(config.outputDir);
    fs::create_directories(dir);
    write_trace_rejections(dir, t);
    std::vector<std::string> lines;

    const auto wait = run_predict_wait(t, config);
    write_wait_report(dir, wait);
    {
        auto out = open_output(dir / "table_wait.csv");
        out << "trace,method,aae_min,scaled_aae\n";
        out << t.name << ",APQ," << csv::num(wait.aae / 60.0) << ',' << csv::num(wait.scaledAae) << '\n';
    }
    lines.push_back("wait AAE " + fmt_minutes(wait.aae) + " min, scaled " + csv::num(wait.scaledAae));

    const auto exec = run_predict_exec(t, config);
    write_exec_report(dir, exec);
    {
        auto out = open_output(dir / "table_exec.csv");
        out << "trace,success_rate,coverage\n";
        out << t.name << ',' << csv::num(exec.rangeSet.successRate) << ',' << csv::num(exec.rangeSet.coverage)
            << '\n';
    }
    lines.push_back("exec success " + csv::num(exec.rangeSet.successRate) + "%, coverage " +
                    csv::num(exec.rangeSet.coverage) + "%");

    const auto base = run_policy_simulation(t, config, policy::Policy::Baseline);
    write_sim_report(dir, base);
    for (auto p : {policy::Policy::Mold, policy::Policy::Delay}) {
        const auto r = run_policy_simulation(t, config, p);
        write_sim_report(dir, r);
        auto out = open_output(dir / ("table_" + std::string(policy::to_string(p)) + ".csv"));
        out << "trace,baseline_qwait_min,baseline_exec_min,baseline_response_min,qwait_min,exec_min,response_min\n";
        out << t.name << ',' << csv::num(base.summary.avgWait / 60.0) << ',' << csv::num(base.summary.avgRun / 60.0)
            << ',' << csv::num(base.summary.avgResponse / 60.0) << ',' << csv::num(r.summary.avgWait / 60.0) << ','
            << csv::num(r.summary.avgRun / 60.0) << ',' << csv::num(r.summary.avgResponse / 60.0) << '\n';
        auto more = sim_lines(r);
        lines.insert(lines.end(), more.begin(), more.end());
    }
    auto more = sim_lines(base);
    lines.insert(lines.begin() + 2, more.begin(), more.end());
    return lines;
}

} // namespace hpcpred
