#include "hpcpred/metrics.hpp"

#include "hpcpred/csv.hpp"
#include "hpcpred/error.hpp"
#include "hpcpred/sched.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace hpcpred::metrics {

double aae(std::span<const double> preds, std::span<const double> actuals) {
    if (preds.size() != actuals.size()) {
        throw InvalidArgument("prediction and actual lists differ in length");
    }
    if (preds.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        s += std::abs(preds[i] - actuals[i]);
    }
    return s / static_cast<double>(preds.size());
}

double scaled_aae(std::span<const double> preds, std::span<const double> actuals, std::span<const double> responses) {
    if (preds.size() != actuals.size() || preds.size() != responses.size()) {
        throw InvalidArgument("prediction, actual and response lists differ in length");
    }
    if (preds.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (!(responses[i] > 0.0)) {
            throw InvalidArgument("scaled AAE needs positive response times");
        }
        s += std::abs(preds[i] - actuals[i]) / responses[i];
    }
    return s / static_cast<double>(preds.size());
}

std::array<WaitClass, kWaitClasses> class_errors(std::span<const double> preds, std::span<const double> actuals) {
    if (preds.size() != actuals.size()) {
        throw InvalidArgument("prediction and actual lists differ in length");
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::array<WaitClass, kWaitClasses> out{{{0, 100}, {100, 1e3}, {1e3, 1e4}, {1e4, 1e5}, {1e5, inf}}};
    std::array<double, kWaitClasses> sums{};
    for (std::size_t i = 0; i < preds.size(); ++i) {
        for (std::size_t c = 0; c < kWaitClasses; ++c) {
            if (actuals[i] < out[c].hi || c + 1 == kWaitClasses) {
                ++out[c].count;
                sums[c] += std::abs(preds[i] - actuals[i]);
                break;
            }
        }
    }
    for (std::size_t c = 0; c < kWaitClasses; ++c) {
        out[c].aae = out[c].count > 0 ? sums[c] / static_cast<double>(out[c].count) : 0.0;
    }
    return out;
}

SuccessCoverage success_and_coverage(std::span<const exectime::ResponseRangeSet> rangeSets,
                                     std::span<const double> actuals, std::span<const exectime::TimeRange> baselines) {
    if (rangeSets.size() != actuals.size() || rangeSets.size() != baselines.size()) {
        throw InvalidArgument("rangeSet, actual and baseline lists differ in length");
    }
    SuccessCoverage out;
    out.jobs = rangeSets.size();
    double coverageSum = 0.0;
    for (std::size_t i = 0; i < rangeSets.size(); ++i) {
        if (rangeSets[i].contains(actuals[i])) {
            ++out.successes;
        }
        const double base = baselines[i].length();
        if (base > 0.0) {
            coverageSum += 100.0 * rangeSets[i].total_length() / base;
            ++out.coverageJobs;
        } else {
            ++out.zeroBaseline;
        }
    }
    if (out.jobs > 0) {
        out.successRate = 100.0 * static_cast<double>(out.successes) / static_cast<double>(out.jobs);
    }
    if (out.coverageJobs > 0) {
        out.coverage = coverageSum / static_cast<double>(out.coverageJobs);
    }
    return out;
}

TuneResult tune(std::map<std::string, double> start, std::span<const TuneParameter> parameters,
                const Evaluator& evaluate) {
    for (const auto& p : parameters) {
        if (p.grid.empty()) {
            throw InvalidArgument("empty grid for parameter " + p.name);
        }
    }
    TuneResult result;
    result.best = std::move(start);
    bool scored = false;
    for (const auto& p : parameters) {
        const std::size_t first = result.rows.size();
        std::size_t bestRow = first;
        for (double v : p.grid) {
            auto candidate = result.best;
            candidate[p.name] = v;
            const double score = evaluate(candidate);
            result.rows.push_back({p.name, v, score, false});
            if (score < result.rows[bestRow].score) {
                bestRow = result.rows.size() - 1;
            }
        }
        result.rows[bestRow].chosen = true;
        result.best[p.name] = result.rows[bestRow].value;
        result.bestScore = result.rows[bestRow].score;
        scored = true;
    }
    if (!scored) {
        result.bestScore = evaluate(result.best);
    }
    return result;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
    out << "parameter,value,aae,chosen\n";
    for (const auto& r : rows) {
        out << r.parameter << ',' << csv::num(r.value) << ',' << csv::num(r.score) << ',' << (r.chosen ? 1 : 0)
            << '\n';
    }
}

PolicySummary summarize(std::span<const policy::JobOutcome> jobs, std::int64_t processors) {
    PolicySummary s;
    s.jobs = jobs.size();
    if (jobs.empty()) {
        return s;
    }
    Seconds first = jobs.front().originalSubmit;
    Seconds last = jobs.front().endTime;
    double used = 0.0;
    for (const auto& j : jobs) {
        s.avgWait += static_cast<double>(j.wait());
        s.avgRun += static_cast<double>(j.run());
        s.avgResponse += static_cast<double>(j.response());
        first = std::min(first, j.originalSubmit);
        last = std::max(last, j.endTime);
        used += static_cast<double>(j.reqSize) * static_cast<double>(j.run());
    }
    const auto n = static_cast<double>(jobs.size());
    s.avgWait /= n;
    s.avgRun /= n;
    s.avgResponse /= n;
    if (last > first) {
        s.utilization = 100.0 * used / (static_cast<double>(processors) * static_cast<double>(last - first));
    }
    return s;
}

std::vector<CpuHourClass> response_by_cpu_hours(std::span<const policy::JobOutcome> jobs,
                                                std::span<const double> cpuHours) {
    if (jobs.size() != cpuHours.size()) {
        throw InvalidArgument("job and CPU-hour lists differ in length");
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<CpuHourClass> out{{0, 1}, {1, 10}, {10, 100}, {100, 1000}, {1000, inf}};
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        for (auto& c : out) {
            if (cpuHours[i] < c.hi) {
                ++c.count;
                c.avgResponse += static_cast<double>(jobs[i].response());
                break;
            }
        }
    }
    for (auto& c : out) {
        if (c.count > 0) {
            c.avgResponse /= static_cast<double>(c.count);
        }
    }
    return out;
}

std::vector<LoadPoint> load_series(std::span<const policy::JobOutcome> jobs, std::int64_t processors,
                                   Seconds interval) {
    if (processors < 1 || interval <= 0) {
        throw InvalidArgument("load series needs positive processors and interval");
    }
    if (jobs.empty()) {
        return {};
    }
    Seconds first = jobs.front().originalSubmit;
    Seconds last = jobs.front().endTime;
    for (const auto& j : jobs) {
        first = std::min(first, j.originalSubmit);
        last = std::max(last, j.endTime);
    }
    const auto count = static_cast<std::size_t>((last - first + interval - 1) / interval);
    std::vector<double> cpu(std::max<std::size_t>(count, 1), 0.0);
    for (const auto& j : jobs) {
        Seconds lo = j.startTime;
        while (lo < j.endTime) {
            const auto slot = static_cast<std::size_t>((lo - first) / interval);
            const Seconds slotEnd = first + static_cast<Seconds>(slot + 1) * interval;
            const Seconds hi = std::min(j.endTime, slotEnd);
            cpu[slot] += static_cast<double>(j.reqSize) * static_cast<double>(hi - lo);
            lo = hi;
        }
    }
    std::vector<LoadPoint> out;
    out.reserve(cpu.size());
    const double capacity = static_cast<double>(processors) * static_cast<double>(interval);
    for (std::size_t k = 0; k < cpu.size(); ++k) {
        out.push_back({first + static_cast<Seconds>(k) * interval, cpu[k] / capacity});
    }
    return out;
}

} // namespace hpcpred::metrics
