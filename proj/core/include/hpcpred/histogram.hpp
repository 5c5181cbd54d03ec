#pragma once

#include "hpcpred/simstate.hpp"
#include "hpcpred/trace.hpp"

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace hpcpred::qwait {

using BinEdges = std::shared_ptr<const std::vector<double>>;

/// Fixed-edge histogram. Values below the first edge land in the first bin,
/// values at or above the last edge land in the last bin.
class Histogram {
public:
    Histogram() = default;
    explicit Histogram(BinEdges edges);

    /// For tests and deserialization.
    static Histogram from_counts(BinEdges edges, std::vector<double> counts, bool normalized);

    void add(double value);
    /// Divides every bin by the population size. An empty histogram stays
    /// all-zero.
    void normalize();

    [[nodiscard]] std::span<const double> counts() const noexcept { return counts_; }
    [[nodiscard]] const std::vector<double>& edges() const { return *edges_; }
    [[nodiscard]] const BinEdges& shared_edges() const noexcept { return edges_; }
    [[nodiscard]] std::size_t bins() const noexcept { return counts_.size(); }
    [[nodiscard]] bool normalized() const noexcept { return normalized_; }
    [[nodiscard]] double l2_norm() const;

    [[nodiscard]] bool same_edges(const Histogram& other) const;

private:
    BinEdges edges_;
    std::vector<double> counts_;
    double total_ = 0.0;
    bool normalized_ = false;
};

/// χ² distance Σ (P[i]-Q[i])² / (P[i]+Q[i]); bins where both are zero
/// contribute nothing. Throws InvalidArgument on mismatched edges.
double chi_square(const Histogram& p, const Histogram& q);
double chi_square(std::span<const double> p, std::span<const double> q);

/// The six system-state populations.
enum class Population : std::size_t {
    WaitingReqSize = 0,
    WaitingErt,
    WaitingElapsed,
    RunningReqSize,
    RunningErt,
    RunningElapsed,
};
inline constexpr std::size_t kPopulations = 6;

/// Log-spaced bin edges per population, fitted once on a calibration sample.
class HistogramBinning {
public:
    HistogramBinning() = default;

    /// Edges span [min, max] of reqSize and ert over the sample and
    /// [0, max] of wait and run times, on a log(1 + x) scale.
    static HistogramBinning fit(std::span<const JobRecord> sample, std::size_t bins);

    [[nodiscard]] const BinEdges& edges(Population p) const { return edges_[static_cast<std::size_t>(p)]; }
    [[nodiscard]] std::size_t bins() const noexcept { return bins_; }

private:
    std::size_t bins_ = 0;
    std::array<BinEdges, kPopulations> edges_{};
};

/// log(1+x)-uniform edges over [lo, hi]; degenerate ranges are widened.
std::vector<double> log_spaced_edges(double lo, double hi, std::size_t bins);

inline constexpr std::size_t kFeatureCount = 16;

/// Job attributes and system-state summaries. Index i holds feature i+1:
/// 0 request size, 1 ert, 2-4 waiting sums (size, ert, elapsed wait),
/// 5-7 running sums (size, ert, elapsed run), 8-11 the same user's waiting
/// jobs (size*ert, size, ert, count), 12-15 the same user's running jobs.
using FeatureVector = std::array<double, kFeatureCount>;

struct JobState {
    std::array<Histogram, kPopulations> distributions;
    FeatureVector features{};
    bool ertKnown = true;
};

FeatureVector compute_features(const SystemSnapshot& snapshot, const JobRecord& job);

/// Six normalized histograms plus the feature vector for a job arriving
/// into `snapshot`.
JobState build_state(const SystemSnapshot& snapshot, const JobRecord& job, const HistogramBinning& binning);

} // namespace hpcpred::qwait
