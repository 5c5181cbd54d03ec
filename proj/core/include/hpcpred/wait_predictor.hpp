#pragma once

#include "hpcpred/histogram.hpp"
#include "hpcpred/qwait.hpp"
#include "hpcpred/simstate.hpp"
#include "hpcpred/trace.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace hpcpred::qwait {

enum class StatisticMode { Distributions, FeatureSummary };
enum class WaitModel { Sdm, Ridge, WeightedAverage };

std::string_view to_string(StatisticMode m);
std::string_view to_string(WaitModel m);

struct WaitPredictorConfig {
    std::size_t historySize = 4000;
    std::size_t bins = 20;
    StatisticMode mode = StatisticMode::FeatureSummary;
    ClusterParams cluster;
    SdmParams sdm;
    RidgeParams ridge;
    std::size_t neighbors = 5;
    /// Weights are recomputed after this many history insertions.
    std::size_t weightStride = 1;
};

struct WaitPrediction {
    double seconds = 0.0;
    WaitModel model = WaitModel::WeightedAverage;
    NeighborhoodCase neighborhood = NeighborhoodCase::FarNeighbors;
};

struct WaitHistoryEntry {
    std::int64_t jobId = 0;
    JobState state;
    double wait = 0.0;
};

/// Adaptive queue-wait predictor over a sliding history window.
///
/// History updates are serial. predict() only reads, so several candidate
/// predictions against the same history may run concurrently.
class WaitPredictor {
public:
    explicit WaitPredictor(WaitPredictorConfig config);

    void add_history(WaitHistoryEntry entry);

    /// Throws ColdStartError when the history is empty.
    [[nodiscard]] WaitPrediction predict(const JobState& target) const;

    /// Distances from the target to every history job, in history order.
    [[nodiscard]] std::vector<double> distances(const JobState& target) const;

    [[nodiscard]] const WeightVector& weights() const noexcept { return weights_; }
    [[nodiscard]] std::size_t history_size() const noexcept { return history_.size(); }
    [[nodiscard]] const WaitPredictorConfig& config() const noexcept { return config_; }

private:
    void refresh_weights();
    [[nodiscard]] std::vector<double> feature_distances(const JobState& target) const;
    [[nodiscard]] std::vector<double> distribution_distances(const JobState& target) const;
    [[nodiscard]] Neighborhood neighborhood(const std::vector<double>& d) const;

    WaitPredictorConfig config_;
    HistoryWindow<WaitHistoryEntry> history_;
    WeightVector weights_ = WeightVector::uniform();
    std::size_t sinceRefresh_ = 0;
    bool weightsFitted_ = false;
};

/// A trace job with the state it observed at submission.
struct WaitSample {
    JobRecord job;
    JobState state;
    std::size_t waitingCount = 0;
    std::size_t runningCount = 0;
};

/// Replays the jobs and builds the state of each at its submission.
std::vector<WaitSample> build_wait_samples(std::span<const JobRecord> jobs, const HistogramBinning& binning);

struct WaitOutcome {
    std::int64_t jobId = 0;
    WaitPrediction prediction;
    double actual = 0.0;
    double response = 0.0;
};

/// Online evaluation: walks samples in submit order, admitting each job to
/// the history once its recorded start time has passed, and predicts every
/// sample inside `eval`.
std::vector<WaitOutcome> evaluate_online(std::span<const WaitSample> samples, IndexRange eval,
                                         const WaitPredictorConfig& config);

struct ModeChoice {
    StatisticMode mode = StatisticMode::FeatureSummary;
    double aaeDistributions = 0.0;
    double aaeFeatureSummary = 0.0;
    /// Set when the training range was empty and the default was returned.
    bool defaulted = false;
};

/// Runs the predictor in both modes over the training range and keeps the
/// one with the lower average absolute error; ties go to FeatureSummary.
ModeChoice choose_statistic_mode(std::span<const WaitSample> samples, IndexRange training,
                                 const WaitPredictorConfig& config);

/// jobId, modelUsed, neighborhood, prediction, actual, response
void write_wait_diagnostics_csv(std::ostream& out, std::span<const WaitOutcome> outcomes);

/// jobId, atTime, waiting, running, f1..f16
void write_snapshot_csv(std::ostream& out, std::span<const WaitSample> samples);

} // namespace hpcpred::qwait
