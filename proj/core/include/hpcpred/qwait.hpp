#pragma once

#include "hpcpred/histogram.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace hpcpred::qwait {

/// Absolute rank correlations with the wait time; every weight lies in [0, 1].
struct WeightVector {
    FeatureVector feature{};
    std::array<double, kPopulations> distribution{};

    /// Weights that enter the distribution-based distance: request size,
    /// ert and the six histograms.
    [[nodiscard]] double distribution_sum() const;
    /// All sixteen feature weights.
    [[nodiscard]] double feature_sum() const;

    static WeightVector uniform();
};

/// One history job as seen by the weight computation.
struct WeightSample {
    const JobState* state;
    double wait;
};

/// Per-feature |ρ(feature, wait)| and per-distribution |ρ(L2 norm, wait)|.
/// Constant series get weight 0. Jobs without a user estimate are left out of
/// the ert correlation. Throws InvalidArgument with fewer than 3 samples.
WeightVector compute_weights(std::span<const WeightSample> history);

/// Normalizers for the distribution-based distance, taken over the history
/// set plus the target.
struct DistributionNormalizer {
    double ertMin = 0.0;
    double ertMax = 0.0;
    /// Largest χ² between the target and any history job, per population.
    std::array<double, kPopulations> chiMax{};
};

/// Weighted 0/1 request-size mismatch, normalized ert difference and six
/// max-normalized χ² terms, divided by WeightVector::distribution_sum().
/// Throws InvalidArgument when that sum is zero.
double distribution_distance(const JobState& target, const JobState& hist, const WeightVector& w,
                             const DistributionNormalizer& norm);

/// Same combination when the six χ² values are already known.
double distribution_distance(const JobState& target, const JobState& hist, const WeightVector& w,
                             const DistributionNormalizer& norm, std::span<const double> chi);

struct FeatureBounds {
    FeatureVector min{};
    FeatureVector max{};

    static FeatureBounds of(std::span<const FeatureVector> vectors);
    void include(const FeatureVector& v);
};

/// Weighted 0/1 request-size mismatch plus range-normalized differences of
/// features 2..16, divided by WeightVector::feature_sum(). Features whose
/// bounds collapse contribute 0. ertComparable=false drops the ert term.
double feature_distance(const FeatureVector& target, const FeatureVector& hist, const WeightVector& w,
                        const FeatureBounds& bounds, bool ertComparable = true);

enum class NeighborhoodCase {
    FarNeighbors,      ///< A: the closest jobs are all far away.
    DenseCluster,      ///< B: close jobs with similar waits.
    ScatteredNeighbors ///< C: close jobs with dissimilar waits.
};

std::string_view to_string(NeighborhoodCase c);

struct ScoredJob {
    double distance = 0.0;
    double wait = 0.0;
    std::size_t historyIndex = 0;
};

/// History jobs sorted by ascending distance (stable on history order).
struct Neighborhood {
    std::vector<ScoredJob> entries;
    NeighborhoodCase classification = NeighborhoodCase::FarNeighbors;

    static Neighborhood from_scores(std::vector<ScoredJob> scored);
};

struct ClusterParams {
    double kPercent = 5.0;
    /// Mean distance of the closest jobs above which the neighborhood is far.
    double avgDistThreshold = 0.5;
    double eps = 0.05;
    std::size_t minPts = 2;
    /// Largest outlier fraction still accepted as a dense cluster.
    double outlierFraction = 0.5;
    /// Lower bound on the number of closest jobs examined.
    std::size_t minNeighbors = 10;
};

/// Number of closest jobs examined for a history of n jobs.
std::size_t closest_count(std::size_t n, const ClusterParams& params);

/// Throws ColdStartError on an empty neighborhood.
NeighborhoodCase classify_neighborhood(const Neighborhood& scored, const ClusterParams& params);

/// Gaussian kernel weighted mean of the waits, w = exp(-d²/h²) with h the
/// median distance of the given jobs. All weights are equal when h = 0.
double kernel_weighted_mean(std::span<const ScoredJob> jobs);

struct SdmParams {
    double windowSize = 0.05;
    double maxDistThreshold = 0.5;
    /// Windows with fewer jobs are not candidates.
    std::size_t minWindowJobs = 2;
};

/// Standard-deviation minimizer. nullopt when no window inside the
/// threshold holds enough jobs.
std::optional<double> predict_sdm(const Neighborhood& neighborhood, const SdmParams& params);

/// Ridge regression on standardized features with an unpenalized intercept.
struct RidgeModel {
    double intercept = 0.0;
    /// Coefficients on the original (unstandardized) feature scale.
    FeatureVector coefficients{};

    [[nodiscard]] double predict(const FeatureVector& x) const;
};

RidgeModel fit_ridge(std::span<const FeatureVector> rows, std::span<const double> targets, double lambda);

struct RidgeParams {
    double lambda = 1.0;
    double maxDist = 0.7;
    std::size_t minRows = kFeatureCount + 1;
};

/// Fits on the history jobs within params.maxDist of the target and
/// evaluates at the target. nullopt with too few rows. The result may be
/// negative.
std::optional<double> predict_ridge(const Neighborhood& neighborhood, std::span<const FeatureVector> historyFeatures,
                                    const FeatureVector& target, const RidgeParams& params);

/// Kernel-weighted mean wait of the k nearest jobs (k clamped to the
/// neighborhood size). Throws ColdStartError when empty.
double predict_weighted_average(const Neighborhood& neighborhood, std::size_t k);

} // namespace hpcpred::qwait
