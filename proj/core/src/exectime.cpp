#include "hpcpred/exectime.hpp"

#include "hpcpred/csv.hpp"
#include "hpcpred/dbscan.hpp"
#include "hpcpred/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

namespace hpcpred::exectime {

namespace {

struct BinCluster {
    double load;
    double runtime;
};

// Averages of the densest execution-time cluster in one load bin.
std::optional<BinCluster> bin_average(const std::vector<const ExecSample*>& jobs, const LoadFunctionParams& p) {
    std::vector<double> execs;
    execs.reserve(jobs.size());
    for (const auto* s : jobs) {
        execs.push_back(s->exec());
    }
    const auto [lo, hi] = std::minmax_element(execs.begin(), execs.end());
    const double spread = *hi - *lo;
    std::vector<std::size_t> chosen;
    if (spread <= 0.0) {
        chosen.resize(jobs.size());
        std::iota(chosen.begin(), chosen.end(), std::size_t{0});
    } else {
        const auto clusters = dbscan(execs, p.binEpsFraction * spread, p.binMinPts);
        double bestMean = 0.0;
        for (int c = 0; c < clusters.clusterCount; ++c) {
            auto members = clusters.members(c);
            double m = 0.0;
            for (auto i : members) {
                m += execs[i];
            }
            m /= static_cast<double>(members.size());
            if (members.size() > chosen.size() || (members.size() == chosen.size() && m < bestMean)) {
                chosen = std::move(members);
                bestMean = m;
            }
        }
    }
    if (chosen.empty()) {
        return std::nullopt;
    }
    BinCluster out{0.0, 0.0};
    for (auto i : chosen) {
        out.load += jobs[i]->actualLoad;
        out.runtime += execs[i];
    }
    out.load /= static_cast<double>(chosen.size());
    out.runtime /= static_cast<double>(chosen.size());
    return out;
}

bool chain_edge(const LoadPoint& x, const LoadPoint& y, double maxGrowthPercent) {
    if (!(x.load < y.load) || y.runtime < x.runtime) {
        return false;
    }
    if (x.runtime <= 0.0) {
        return y.runtime == x.runtime;
    }
    return (y.runtime - x.runtime) * 100.0 / x.runtime <= maxGrowthPercent;
}

} // namespace

std::vector<std::size_t> longest_nondecreasing_subsequence(std::span<const LoadPoint> points,
                                                           double maxGrowthPercent) {
    const std::size_t n = points.size();
    if (n == 0) {
        return {};
    }
    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    std::vector<std::size_t> length(n, 1);
    std::vector<double> lastRuntime(n);
    std::vector<std::size_t> next(n, kNone);
    // Points are already in topological (load) order, so a reverse sweep
    // sees every successor before its predecessors.
    for (std::size_t i = n; i-- > 0;) {
        lastRuntime[i] = points[i].runtime;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!chain_edge(points[i], points[j], maxGrowthPercent)) {
                continue;
            }
            const std::size_t len = length[j] + 1;
            if (len > length[i] || (len == length[i] && lastRuntime[j] < lastRuntime[i])) {
                length[i] = len;
                lastRuntime[i] = lastRuntime[j];
                next[i] = j;
            }
        }
    }
    std::size_t start = 0;
    for (std::size_t i = 1; i < n; ++i) {
        const double span = lastRuntime[i] - points[i].runtime;
        const double bestSpan = lastRuntime[start] - points[start].runtime;
        if (length[i] > length[start] || (length[i] == length[start] && span < bestSpan)) {
            start = i;
        }
    }
    std::vector<std::size_t> chain;
    for (std::size_t i = start; i != kNone; i = next[i]) {
        chain.push_back(i);
    }
    return chain;
}

std::pair<double, double> fit_line(std::span<const LoadPoint> points) {
    if (points.empty()) {
        throw InvalidArgument("cannot fit a line through no points");
    }
    double mx = 0.0;
    double my = 0.0;
    for (const auto& p : points) {
        mx += p.load;
        my += p.runtime;
    }
    mx /= static_cast<double>(points.size());
    my /= static_cast<double>(points.size());
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& p : points) {
        sxx += (p.load - mx) * (p.load - mx);
        sxy += (p.load - mx) * (p.runtime - my);
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    return {slope, my - slope * mx};
}

LoadFunctionBuild build_load_functions(std::span<const ExecSample> validation, const LoadFunctionParams& params) {
    if (params.loadBins == 0) {
        throw InvalidArgument("load bin count must be positive");
    }
    std::map<TupleKey, std::vector<const ExecSample*>> groups;
    for (const auto& s : validation) {
        groups[TupleKey::of(s.job)].push_back(&s);
    }
    std::vector<const std::pair<const TupleKey, std::vector<const ExecSample*>>*> ranked;
    for (const auto& g : groups) {
        ranked.push_back(&g);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto* a, const auto* b) { return a->second.size() > b->second.size(); });
    if (ranked.size() > params.topK) {
        ranked.resize(params.topK);
    }

    LoadFunctionBuild out;
    for (const auto* g : ranked) {
        const auto& [key, jobs] = *g;
        if (jobs.size() < params.minJobs) {
            out.skipped.emplace_back(key, "fewer than " + std::to_string(params.minJobs) + " jobs");
            continue;
        }
        const auto [lo, hi] = std::minmax_element(jobs.begin(), jobs.end(), [](const auto* a, const auto* b) {
            return a->actualLoad < b->actualLoad;
        });
        if ((*hi)->actualLoad - (*lo)->actualLoad < params.minLoadSpread) {
            out.skipped.emplace_back(key, "load spread below minimum");
            continue;
        }
        std::vector<std::vector<const ExecSample*>> bins(params.loadBins);
        for (const auto* s : jobs) {
            const double load = std::clamp(s->actualLoad, 0.0, 1.0);
            auto b = static_cast<std::size_t>(load * static_cast<double>(params.loadBins));
            bins[std::min(b, params.loadBins - 1)].push_back(s);
        }
        std::vector<LoadPoint> points;
        for (const auto& bin : bins) {
            if (bin.empty()) {
                continue;
            }
            if (auto avg = bin_average(bin, params)) {
                points.push_back({avg->load, avg->runtime});
            }
        }
        const auto chain = longest_nondecreasing_subsequence(points, params.maxGrowthPercent);
        if (chain.size() < 2) {
            out.skipped.emplace_back(key, "fewer than 2 trend points");
            continue;
        }
        std::vector<LoadPoint> selected;
        for (auto i : chain) {
            selected.push_back(points[i]);
        }
        const auto [slope, intercept] = fit_line(selected);
        LoadFunction f;
        f.key = key;
        f.slope = std::max(0.0, slope);
        f.intercept = intercept;
        f.minLoad = selected.front().load;
        f.maxLoad = selected.back().load;
        f.points = selected.size();
        out.functions.push_back(f);
    }
    return out;
}

std::size_t relevant_history_length(std::span<const double> execs, double overlap, std::size_t initial) {
    const std::size_t n = execs.size();
    if (n <= initial) {
        return n;
    }
    const auto [fullLo, fullHi] = std::minmax_element(execs.begin(), execs.end());
    const double fullSpan = *fullHi - *fullLo;
    std::size_t len = std::max<std::size_t>(initial, 1);
    double lo = execs[n - 1];
    double hi = execs[n - 1];
    for (std::size_t i = n - len; i < n; ++i) {
        lo = std::min(lo, execs[i]);
        hi = std::max(hi, execs[i]);
    }
    const double needed = overlap * fullSpan * (1.0 - 1e-12);
    while (len < n && hi - lo < needed) {
        ++len;
        const double e = execs[n - len];
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }
    return len;
}

std::vector<ExecSample> select_relevant_history(std::span<const ExecSample> history, double overlap,
                                                std::size_t initial) {
    std::vector<double> execs;
    execs.reserve(history.size());
    for (const auto& s : history) {
        execs.push_back(s.exec());
    }
    const auto len = relevant_history_length(execs, overlap, initial);
    return {history.end() - static_cast<std::ptrdiff_t>(len), history.end()};
}

TimeRange compact_range(TimeRange r, double fraction) {
    const double mid = r.midpoint();
    const double limit = fraction * mid;
    if (r.length() > limit) {
        const double half = 0.5 * limit;
        r.lo = std::max(0.0, mid - half);
        r.hi = mid + half;
    }
    return r;
}

std::vector<TimeRange> predict_ranges(std::span<const ExecSample> relevant, std::span<const LoadFunction> functions,
                                      double predictedLoad, double compaction) {
    std::vector<TimeRange> out;
    out.reserve(relevant.size());
    for (const auto& h : relevant) {
        TimeRange r{h.exec(), h.exec()};
        bool first = true;
        for (const auto& g : functions) {
            const double shift = h.exec() - g.evaluate(h.actualLoad);
            const double v = std::max(0.0, g.evaluate(predictedLoad) + shift);
            if (first) {
                r = {v, v};
                first = false;
            } else {
                r.lo = std::min(r.lo, v);
                r.hi = std::max(r.hi, v);
            }
        }
        out.push_back(compact_range(r, compaction));
    }
    return out;
}

double overlap_fraction(const TimeRange& a, const TimeRange& b) {
    const double inter = std::min(a.hi, b.hi) - std::max(a.lo, b.lo);
    if (inter < 0.0) {
        return 0.0;
    }
    const double shorter = std::min(a.length(), b.length());
    if (shorter <= 0.0) {
        return 1.0;
    }
    return inter / shorter;
}

std::vector<TimeRange> merge_ranges(std::vector<TimeRange> ranges, double threshold) {
    std::sort(ranges.begin(), ranges.end(), [](const TimeRange& a, const TimeRange& b) {
        return a.lo != b.lo ? a.lo < b.lo : a.hi < b.hi;
    });
    std::vector<TimeRange> stack;
    stack.reserve(ranges.size());
    for (const auto& r : ranges) {
        if (stack.empty() || r.lo > stack.back().hi) {
            stack.push_back(r);
            continue;
        }
        auto& top = stack.back();
        if (r.hi <= top.hi) {
            continue; // already covered
        }
        if (overlap_fraction(top, r) >= threshold) {
            top.hi = r.hi;
        } else {
            stack.push_back({top.hi, r.hi});
        }
    }
    return stack;
}

double ResponseRangeSet::total_length() const {
    double s = 0.0;
    for (const auto& r : ranges) {
        s += r.range.length();
    }
    return s;
}

bool ResponseRangeSet::contains(double v) const {
    return std::any_of(ranges.begin(), ranges.end(), [v](const WeightedRange& r) { return r.range.contains(v); });
}

double ResponseRangeSet::max_upper() const {
    double m = 0.0;
    for (const auto& r : ranges) {
        m = std::max(m, r.range.hi);
    }
    return m;
}

ResponseRangeSet ResponseRangeSet::shifted(double offset) const {
    ResponseRangeSet out = *this;
    for (auto& r : out.ranges) {
        r.range.lo += offset;
        r.range.hi += offset;
    }
    return out;
}

bool is_valid(const ResponseRangeSet& rs, double tolerance) {
    if (rs.ranges.empty() || rs.ranges.size() > kMaxRanges) {
        return false;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < rs.ranges.size(); ++i) {
        const auto& r = rs.ranges[i];
        if (r.range.lo < 0.0 || r.range.lo > r.range.hi || r.probability < 0.0 || r.probability > 1.0) {
            return false;
        }
        if (i > 0 && r.range.lo < rs.ranges[i - 1].range.hi) {
            return false;
        }
        sum += r.probability;
    }
    return std::abs(sum - 1.0) <= tolerance;
}

ResponseRangeSet assign_probabilities(std::span<const TimeRange> ranges, std::span<const double> historyExecs,
                                      const ProbabilityParams& params) {
    ResponseRangeSet rs;
    if (ranges.empty()) {
        return rs;
    }
    std::vector<double> counts(ranges.size(), 0.0);
    for (std::size_t i = 0; i < ranges.size(); ++i) {
        for (double e : historyExecs) {
            if (ranges[i].contains(e)) {
                counts[i] += 1.0;
            }
        }
    }
    const double total = static_cast<double>(historyExecs.size());
    double matchedMass = 0.0;
    std::size_t unmatched = 0;
    for (double c : counts) {
        if (c > 0.0) {
            matchedMass += c / total;
        } else {
            ++unmatched;
        }
    }
    rs.ranges.reserve(ranges.size());
    for (std::size_t i = 0; i < ranges.size(); ++i) {
        double p = 0.0;
        if (matchedMass <= 0.0) {
            p = 1.0 / static_cast<double>(ranges.size());
        } else if (counts[i] > 0.0) {
            const double share = (counts[i] / total) / matchedMass;
            p = unmatched > 0 ? (1.0 - params.newRangeMass) * share : share;
        } else {
            p = params.newRangeMass / static_cast<double>(unmatched);
        }
        rs.ranges.push_back({ranges[i], p});
    }
    if (rs.ranges.size() > params.maxRanges) {
        std::stable_sort(rs.ranges.begin(), rs.ranges.end(), [](const WeightedRange& a, const WeightedRange& b) {
            return a.probability != b.probability ? a.probability > b.probability : a.range.lo < b.range.lo;
        });
        rs.ranges.resize(params.maxRanges);
        std::sort(rs.ranges.begin(), rs.ranges.end(),
                  [](const WeightedRange& a, const WeightedRange& b) { return a.range.lo < b.range.lo; });
    }
    double sum = 0.0;
    for (const auto& r : rs.ranges) {
        sum += r.probability;
    }
    for (auto& r : rs.ranges) {
        r.probability /= sum;
    }
    return rs;
}

ResponseRangeSet predict_rangeset(std::span<const ExecSample> keyHistory, std::span<const LoadFunction> functions,
                                  double predictedLoad, const RangeSetParams& params) {
    if (keyHistory.empty()) {
        throw ColdStartError("no execution history for this tuple");
    }
    const auto relevant = select_relevant_history(keyHistory, params.relevantOverlap, params.relevantInitial);
    auto ranges = predict_ranges(relevant, functions, predictedLoad, params.compaction);
    ranges = merge_ranges(std::move(ranges), params.mergeThreshold);
    std::vector<double> execs;
    execs.reserve(keyHistory.size());
    for (const auto& s : keyHistory) {
        execs.push_back(s.exec());
    }
    return assign_probabilities(ranges, execs, params.probability);
}

TimeRange baseline_range(std::span<const double> execs) {
    if (execs.empty()) {
        throw ColdStartError("no execution history for the baseline range");
    }
    const auto [lo, hi] = std::minmax_element(execs.begin(), execs.end());
    return {*lo, *hi};
}

double point_from_rangeset(const ResponseRangeSet& rs) {
    double p = 0.0;
    for (const auto& r : rs.ranges) {
        p += r.probability * r.range.midpoint();
    }
    return p;
}

void ExecHistory::add(ExecSample sample) {
    byKey_[TupleKey::of(sample.job)].push_back(std::move(sample));
    ++count_;
}

std::span<const ExecSample> ExecHistory::for_key(const TupleKey& key) const {
    auto it = byKey_.find(key);
    if (it == byKey_.end()) {
        return {};
    }
    return it->second;
}

std::vector<ExecSample> ExecHistory::for_user_size(std::int64_t userId, std::int64_t reqSize) const {
    std::vector<ExecSample> out;
    for (const auto& [key, samples] : byKey_) {
        if (key.userId == userId && key.reqSize == reqSize) {
            out.insert(out.end(), samples.begin(), samples.end());
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const ExecSample& a, const ExecSample& b) {
        return a.job.submitTime < b.job.submitTime;
    });
    return out;
}

std::string format_rangeset(const ResponseRangeSet& rs) {
    std::string out;
    for (const auto& r : rs.ranges) {
        if (!out.empty()) {
            out += '|';
        }
        out += csv::num(r.range.lo) + ':' + csv::num(r.range.hi) + ':' + csv::num(r.probability);
    }
    return out;
}

namespace {

double to_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError(0, "not a number: '" + std::string(s) + "'");
    }
    return v;
}

std::int64_t to_int64(std::string_view s) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError(0, "not an integer: '" + std::string(s) + "'");
    }
    return v;
}

} // namespace

ResponseRangeSet parse_rangeset(std::string_view text) {
    ResponseRangeSet rs;
    if (text.empty()) {
        return rs;
    }
    for (const auto& item : csv::split(text, '|')) {
        const auto parts = csv::split(item, ':');
        if (parts.size() != 3) {
            throw ParseError(0, "malformed range '" + item + "'");
        }
        rs.ranges.push_back({{to_double(parts[0]), to_double(parts[1])}, to_double(parts[2])});
    }
    return rs;
}

void write_load_functions_csv(std::ostream& out, std::span<const LoadFunction> functions) {
    out << "userId,reqSize,queueId,groupId,slope,intercept,minLoad,maxLoad,points\n";
    for (const auto& f : functions) {
        out << f.key.userId << ',' << f.key.reqSize << ',' << f.key.queueId << ',' << f.key.groupId << ','
            << csv::num(f.slope) << ',' << csv::num(f.intercept) << ',' << csv::num(f.minLoad) << ','
            << csv::num(f.maxLoad) << ',' << f.points << '\n';
    }
}

std::vector<LoadFunction> read_load_functions_csv(std::istream& in) {
    const auto table = csv::read(in);
    std::vector<LoadFunction> out;
    for (const auto& row : table.rows) {
        if (row.size() != 9) {
            throw ParseError(out.size() + 2, "expected 9 load-function columns");
        }
        LoadFunction f;
        f.key = {to_int64(row[0]), to_int64(row[1]), to_int64(row[2]), to_int64(row[3])};
        f.slope = to_double(row[4]);
        f.intercept = to_double(row[5]);
        f.minLoad = to_double(row[6]);
        f.maxLoad = to_double(row[7]);
        f.points = static_cast<std::size_t>(to_int64(row[8]));
        out.push_back(f);
    }
    return out;
}

} // namespace hpcpred::exectime
