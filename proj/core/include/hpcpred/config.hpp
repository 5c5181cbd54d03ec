#pragma once

#include "hpcpred/exectime.hpp"
#include "hpcpred/policy_sim.hpp"
#include "hpcpred/trace.hpp"
#include "hpcpred/wait_predictor.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hpcpred {

enum class Mode { PredictWait, PredictExec, SimulateBaseline, SimulateMold, SimulateDelay, Tune };
std::string_view to_string(Mode m);
Mode parse_mode(std::string_view s);

/// Everything one run needs. Read from a flat `key = value` file (`#`
/// comments) and command-line overrides; see README for the key list.
struct ExperimentConfig {
    std::string tracePath;
    std::string outputDir = ".";
    Mode mode = Mode::PredictWait;
    /// 0: take the machine size from the trace header.
    std::int64_t processors = 0;
    std::uint64_t seed = 1;

    /// Explicit split; the scaled reference split when unset.
    std::optional<TraceSplit> split;
    /// Fraction of the jobs that warm the predictors before a simulation.
    double simHistoryFraction = 1.0 / 3.0;
    /// Cap on simulated jobs after the warm-up part (0: no cap).
    std::size_t simMaxJobs = 0;

    /// Statistic mode; empty means pick the better one on the validation split.
    std::optional<qwait::StatisticMode> waitMode;
    /// Weights are refit every 100 admitted jobs by default; refitting on
    /// every admission is quadratic in the history size.
    qwait::WaitPredictorConfig wait = [] {
        qwait::WaitPredictorConfig w;
        w.weightStride = 100;
        return w;
    }();

    exectime::LoadFunctionParams loadFunctions{};
    exectime::RangeSetParams rangeSet{};
    LoadWindow loadWindow{};

    double futureSlack = 0.05;
    double delayThreshold = 0.3;
    Seconds maxLimit = 0;
    sched::TieOrder tieOrder = sched::TieOrder::CompletionsFirst;

    /// Grids for `tune`, keyed by parameter name.
    std::map<std::string, std::vector<double>> tuneGrids;

    /// Applies one key. Throws ConfigError for unknown keys or bad values.
    void set(std::string_view key, std::string_view value);
    /// Every knob is within its documented range. Throws ConfigError naming
    /// the first offending key.
    void validate() const;
    /// Current value of a numeric key (the ones tune can sweep).
    [[nodiscard]] double numeric(std::string_view key) const;
    /// All keys with their current values, one `key = value` line each.
    void write(std::ostream& out) const;

    [[nodiscard]] policy::PolicyConfig policy_config(policy::Policy p, std::int64_t machineSize) const;
};

/// key/value pairs of a config file in file order.
std::vector<std::pair<std::string, std::string>> read_config_pairs(std::istream& in);

/// Defaults, then the file (if any), then overrides in order; validated.
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::pair<std::string, std::string>>& overrides = {});

} // namespace hpcpred
