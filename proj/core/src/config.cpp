#include "hpcpred/config.hpp"

#include "hpcpred/csv.hpp"
#include "hpcpred/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <type_traits>

namespace hpcpred {

std::string_view to_string(Mode m) {
    switch (m) {
    case Mode::PredictWait: return "predict-wait";
    case Mode::PredictExec: return "predict-exec";
    case Mode::SimulateBaseline: return "simulate-baseline";
    case Mode::SimulateMold: return "simulate-mold";
    case Mode::SimulateDelay: return "simulate-delay";
    case Mode::Tune: return "tune";
    }
    return "?";
}

Mode parse_mode(std::string_view s) {
    for (auto m : {Mode::PredictWait, Mode::PredictExec, Mode::SimulateBaseline, Mode::SimulateMold,
                   Mode::SimulateDelay, Mode::Tune}) {
        if (to_string(m) == s) {
            return m;
        }
    }
    throw ConfigError("unknown mode '" + std::string(s) + "'");
}

namespace {

struct Knob {
    std::string_view name;
    double lo;
    double hi;
    bool integer;
    std::function<double(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, double)> set;
};

template <class T>
Knob knob(std::string_view name, double lo, double hi, T ExperimentConfig::*member) {
    return {name, lo, hi, std::is_integral_v<T>,
            [member](const ExperimentConfig& c) { return static_cast<double>(c.*member); },
            [member](ExperimentConfig& c, double v) { c.*member = static_cast<T>(v); }};
}

template <class Outer, class T>
Knob knob(std::string_view name, double lo, double hi, Outer ExperimentConfig::*outer, T Outer::*member) {
    return {name, lo, hi, std::is_integral_v<T>,
            [outer, member](const ExperimentConfig& c) { return static_cast<double>(c.*outer.*member); },
            [outer, member](ExperimentConfig& c, double v) { c.*outer.*member = static_cast<T>(v); }};
}

template <class Outer, class Inner, class T>
Knob knob(std::string_view name, double lo, double hi, Outer ExperimentConfig::*outer, Inner Outer::*inner,
          T Inner::*member) {
    return {name, lo, hi, std::is_integral_v<T>,
            [=](const ExperimentConfig& c) { return static_cast<double>(c.*outer.*inner.*member); },
            [=](ExperimentConfig& c, double v) { c.*outer.*inner.*member = static_cast<T>(v); }};
}

const std::vector<Knob>& knobs() {
    using C = ExperimentConfig;
    using W = qwait::WaitPredictorConfig;
    using E = exectime::LoadFunctionParams;
    using R = exectime::RangeSetParams;
    constexpr double big = 1e12;
    static const std::vector<Knob> all = {
        knob("processors", 0, big, &C::processors),
        knob("sim.history-fraction", 0.0, 0.99, &C::simHistoryFraction),
        knob("sim.max-jobs", 0, big, &C::simMaxJobs),
        // Ranges from the sensitivity study of the wait predictor.
        knob("qwait.history-size", 2000, 6000, &C::wait, &W::historySize),
        knob("qwait.bins", 5, 50, &C::wait, &W::bins),
        knob("qwait.k-percent", 1, 5, &C::wait, &W::cluster, &qwait::ClusterParams::kPercent),
        knob("qwait.outlier-fraction", 0.1, 0.9, &C::wait, &W::cluster, &qwait::ClusterParams::outlierFraction),
        knob("qwait.eps", 0.05, 0.1, &C::wait, &W::cluster, &qwait::ClusterParams::eps),
        knob("qwait.min-pts", 2, 5, &C::wait, &W::cluster, &qwait::ClusterParams::minPts),
        knob("qwait.sdm-window", 0.01, 0.1, &C::wait, &W::sdm, &qwait::SdmParams::windowSize),
        knob("qwait.sdm-max-dist", 0.3, 0.6, &C::wait, &W::sdm, &qwait::SdmParams::maxDistThreshold),
        knob("qwait.ridge-max-dist", 0.4, 1.0, &C::wait, &W::ridge, &qwait::RidgeParams::maxDist),
        knob("qwait.neighbors", 1, 20, &C::wait, &W::neighbors),
        // Not covered by the study; bounded only for sanity.
        knob("qwait.min-neighbors", 1, big, &C::wait, &W::cluster, &qwait::ClusterParams::minNeighbors),
        knob("qwait.avg-dist-threshold", 0.0, 1.0, &C::wait, &W::cluster, &qwait::ClusterParams::avgDistThreshold),
        knob("qwait.sdm-min-window", 1, big, &C::wait, &W::sdm, &qwait::SdmParams::minWindowJobs),
        knob("qwait.ridge-lambda", 0.0, big, &C::wait, &W::ridge, &qwait::RidgeParams::lambda),
        knob("qwait.ridge-min-rows", 2, big, &C::wait, &W::ridge, &qwait::RidgeParams::minRows),
        knob("qwait.weight-stride", 1, big, &C::wait, &W::weightStride),
        knob("exec.top-k", 1, big, &C::loadFunctions, &E::topK),
        knob("exec.min-jobs", 2, big, &C::loadFunctions, &E::minJobs),
        knob("exec.min-load-spread", 0.0, 1.0, &C::loadFunctions, &E::minLoadSpread),
        knob("exec.max-growth", 0.0, big, &C::loadFunctions, &E::maxGrowthPercent),
        knob("exec.load-bins", 1, 1000, &C::loadFunctions, &E::loadBins),
        knob("exec.bin-eps", 1e-6, 1.0, &C::loadFunctions, &E::binEpsFraction),
        knob("exec.bin-min-pts", 1, big, &C::loadFunctions, &E::binMinPts),
        knob("exec.relevant-overlap", 0.0, 1.0, &C::rangeSet, &R::relevantOverlap),
        knob("exec.relevant-initial", 1, big, &C::rangeSet, &R::relevantInitial),
        knob("exec.compaction", 1e-6, 2.0, &C::rangeSet, &R::compaction),
        knob("exec.merge-threshold", 0.0, 1.0, &C::rangeSet, &R::mergeThreshold),
        knob("exec.new-range-mass", 0.0, 0.99, &C::rangeSet, &R::probability, &exectime::ProbabilityParams::newRangeMass),
        knob("exec.max-ranges", 1, static_cast<double>(exectime::kMaxRanges), &C::rangeSet, &R::probability,
             &exectime::ProbabilityParams::maxRanges),
        knob("load.interval", 1, big, &C::loadWindow, &LoadWindow::interval),
        knob("load.window", 1, big, &C::loadWindow, &LoadWindow::window),
        knob("manager.slack", 0.0, 1.0, &C::futureSlack),
        knob("manager.delay-threshold", 0.0, 1.0, &C::delayThreshold),
        knob("manager.max-limit", 0, big, &C::maxLimit),
    };
    return all;
}

const Knob* find_knob(std::string_view name) {
    for (const auto& k : knobs()) {
        if (k.name == name) {
            return &k;
        }
    }
    return nullptr;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(std::string_view key, std::string_view text) {
    text = trim(text);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw ConfigError(std::string(key) + ": '" + std::string(text) + "' is not a number");
    }
    return v;
}

void check_value(const Knob& k, double v, std::string_view key) {
    if (v < k.lo || v > k.hi) {
        throw ConfigError(std::string(key) + " = " + csv::num(v) + " is outside [" + csv::num(k.lo) + ", " +
                          csv::num(k.hi) + "]");
    }
    if (k.integer && v != std::floor(v)) {
        throw ConfigError(std::string(key) + " must be an integer");
    }
}

IndexRange parse_range(std::string_view key, std::string_view text) {
    const auto parts = csv::split(trim(text), ':');
    if (parts.size() != 2) {
        throw ConfigError(std::string(key) + ": expected begin:end");
    }
    const double b = parse_number(key, parts[0]);
    const double e = parse_number(key, parts[1]);
    if (b < 0 || e < b || b != std::floor(b) || e != std::floor(e)) {
        throw ConfigError(std::string(key) + ": expected 0 <= begin <= end");
    }
    return {static_cast<std::size_t>(b), static_cast<std::size_t>(e)};
}

} // namespace

void ExperimentConfig::set(std::string_view key, std::string_view value) {
    value = trim(value);
    if (key == "trace") {
        tracePath = std::string(value);
    } else if (key == "output") {
        outputDir = std::string(value);
    } else if (key == "mode") {
        mode = parse_mode(value);
    } else if (key == "seed") {
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc{} || ptr != value.data() + value.size()) {
            throw ConfigError("seed: '" + std::string(value) + "' is not an unsigned integer");
        }
        seed = v;
    } else if (key == "qwait.mode") {
        if (value == "auto") {
            waitMode.reset();
        } else if (value == "distributions") {
            waitMode = qwait::StatisticMode::Distributions;
        } else if (value == "feature") {
            waitMode = qwait::StatisticMode::FeatureSummary;
        } else {
            throw ConfigError("qwait.mode: expected auto, distributions or feature");
        }
    } else if (key == "sched.tie-order") {
        if (value == "completions-first") {
            tieOrder = sched::TieOrder::CompletionsFirst;
        } else if (value == "arrivals-first") {
            tieOrder = sched::TieOrder::ArrivalsFirst;
        } else {
            throw ConfigError("sched.tie-order: expected completions-first or arrivals-first");
        }
    } else if (key == "split.history" || key == "split.validation" || key == "split.test") {
        if (!split) {
            split = TraceSplit{};
        }
        const auto r = parse_range(key, value);
        (key == "split.history" ? split->history : key == "split.validation" ? split->validation : split->test) = r;
    } else if (key.starts_with("tune.")) {
        const auto param = key.substr(5);
        if (!find_knob(param)) {
            throw ConfigError(std::string(key) + ": unknown parameter " + std::string(param));
        }
        std::vector<double> grid;
        for (const auto& item : csv::split(value, ',')) {
            grid.push_back(parse_number(key, item));
        }
        tuneGrids[std::string(param)] = std::move(grid);
    } else if (const auto* k = find_knob(key)) {
        const double v = parse_number(key, value);
        check_value(*k, v, key);
        k->set(*this, v);
    } else {
        throw ConfigError("unknown configuration key '" + std::string(key) + "'");
    }
}

double ExperimentConfig::numeric(std::string_view key) const {
    const auto* k = find_knob(key);
    if (!k) {
        throw ConfigError("unknown numeric key '" + std::string(key) + "'");
    }
    return k->get(*this);
}

void ExperimentConfig::validate() const {
    for (const auto& k : knobs()) {
        check_value(k, k.get(*this), k.name);
    }
    if (loadWindow.window < loadWindow.interval) {
        throw ConfigError("load.window must be at least load.interval");
    }
    for (const auto& [name, grid] : tuneGrids) {
        if (grid.empty()) {
            throw ConfigError("tune." + name + ": empty grid");
        }
        for (double v : grid) {
            check_value(*find_knob(name), v, "tune." + name);
        }
    }
}

void ExperimentConfig::write(std::ostream& out) const {
    out << "trace = " << tracePath << '\n';
    out << "output = " << outputDir << '\n';
    out << "mode = " << to_string(mode) << '\n';
    out << "seed = " << seed << '\n';
    out << "qwait.mode = " << (waitMode ? qwait::to_string(*waitMode) : "auto") << '\n';
    out << "sched.tie-order = "
        << (tieOrder == sched::TieOrder::CompletionsFirst ? "completions-first" : "arrivals-first") << '\n';
    if (split) {
        out << "split.history = " << split->history.begin << ':' << split->history.end << '\n';
        out << "split.validation = " << split->validation.begin << ':' << split->validation.end << '\n';
        out << "split.test = " << split->test.begin << ':' << split->test.end << '\n';
    }
    for (const auto& k : knobs()) {
        out << k.name << " = " << csv::num(k.get(*this)) << '\n';
    }
    for (const auto& [name, grid] : tuneGrids) {
        out << "tune." << name << " = ";
        for (std::size_t i = 0; i < grid.size(); ++i) {
            out << (i ? "," : "") << csv::num(grid[i]);
        }
        out << '\n';
    }
}

policy::PolicyConfig ExperimentConfig::policy_config(policy::Policy p, std::int64_t machineSize) const {
    policy::PolicyConfig c;
    c.policy = p;
    c.processors = machineSize;
    c.wait = wait;
    if (waitMode) {
        c.wait.mode = *waitMode;
    }
    c.loadFunctions = loadFunctions;
    c.rangeSet = rangeSet;
    c.loadWindow = loadWindow;
    c.futureSlack = futureSlack;
    c.delayThreshold = delayThreshold;
    c.maxLimit = maxLimit;
    c.seed = seed;
    c.scheduler.tieOrder = tieOrder;
    return c;
}

std::vector<std::pair<std::string, std::string>> read_config_pairs(std::istream& in) {
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        std::string_view v = line;
        if (const auto hash = v.find('#'); hash != std::string_view::npos) {
            v = v.substr(0, hash);
        }
        v = trim(v);
        if (v.empty()) {
            continue;
        }
        const auto eq = v.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(number) + ": expected key = value");
        }
        out.emplace_back(std::string(trim(v.substr(0, eq))), std::string(trim(v.substr(eq + 1))));
    }
    return out;
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::pair<std::string, std::string>>& overrides) {
    ExperimentConfig c;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) {
            throw ConfigError("cannot open config file " + path);
        }
        for (const auto& [k, v] : read_config_pairs(in)) {
            c.set(k, v);
        }
    }
    for (const auto& [k, v] : overrides) {
        c.set(k, v);
    }
    c.validate();
    return c;
}

} // namespace hpcpred
