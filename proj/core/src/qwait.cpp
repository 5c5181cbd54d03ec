#include "hpcpred/qwait.hpp"

#include "hpcpred/dbscan.hpp"
#include "hpcpred/error.hpp"
#include "hpcpred/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace hpcpred::qwait {

double WeightVector::distribution_sum() const {
    double s = feature[0] + feature[1];
    for (double w : distribution) {
        s += w;
    }
    return s;
}

double WeightVector::feature_sum() const { return std::accumulate(feature.begin(), feature.end(), 0.0); }

WeightVector WeightVector::uniform() {
    WeightVector w;
    w.feature.fill(1.0);
    w.distribution.fill(1.0);
    return w;
}

WeightVector compute_weights(std::span<const WeightSample> history) {
    if (history.size() < 3) {
        throw InvalidArgument("weights need at least 3 history jobs");
    }
    WeightVector w;
    std::vector<double> x;
    std::vector<double> y;
    x.reserve(history.size());
    y.reserve(history.size());
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        x.clear();
        y.clear();
        for (const auto& h : history) {
            if (f == 1 && !h.state->ertKnown) {
                continue;
            }
            x.push_back(h.state->features[f]);
            y.push_back(h.wait);
        }
        w.feature[f] = std::abs(spearman(x, y).value_or(0.0));
    }
    for (std::size_t p = 0; p < kPopulations; ++p) {
        x.clear();
        y.clear();
        for (const auto& h : history) {
            x.push_back(h.state->distributions[p].l2_norm());
            y.push_back(h.wait);
        }
        w.distribution[p] = std::abs(spearman(x, y).value_or(0.0));
    }
    return w;
}

namespace {

double ranged(double diff, double lo, double hi) {
    const double span = hi - lo;
    if (!(span > 0.0)) {
        return 0.0;
    }
    return std::min(1.0, std::abs(diff) / span);
}

} // namespace

double distribution_distance(const JobState& target, const JobState& hist, const WeightVector& w,
                             const DistributionNormalizer& norm, std::span<const double> chi) {
    const double wsum = w.distribution_sum();
    if (!(wsum > 0.0)) {
        throw InvalidArgument("distribution distance weights sum to zero");
    }
    double d = 0.0;
    if (target.features[0] != hist.features[0]) {
        d += w.feature[0];
    }
    if (target.ertKnown && hist.ertKnown) {
        d += w.feature[1] * ranged(target.features[1] - hist.features[1], norm.ertMin, norm.ertMax);
    }
    for (std::size_t p = 0; p < kPopulations; ++p) {
        const double m = norm.chiMax[p];
        if (m > 0.0) {
            d += w.distribution[p] * std::min(1.0, chi[p] / m);
        }
    }
    return std::clamp(d / wsum, 0.0, 1.0);
}

double distribution_distance(const JobState& target, const JobState& hist, const WeightVector& w,
                             const DistributionNormalizer& norm) {
    std::array<double, kPopulations> chi{};
    for (std::size_t p = 0; p < kPopulations; ++p) {
        chi[p] = chi_square(target.distributions[p], hist.distributions[p]);
    }
    return distribution_distance(target, hist, w, norm, chi);
}

FeatureBounds FeatureBounds::of(std::span<const FeatureVector> vectors) {
    FeatureBounds b;
    if (vectors.empty()) {
        return b;
    }
    b.min = vectors.front();
    b.max = vectors.front();
    for (const auto& v : vectors) {
        b.include(v);
    }
    return b;
}

void FeatureBounds::include(const FeatureVector& v) {
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        min[i] = std::min(min[i], v[i]);
        max[i] = std::max(max[i], v[i]);
    }
}

double feature_distance(const FeatureVector& target, const FeatureVector& hist, const WeightVector& w,
                        const FeatureBounds& bounds, bool ertComparable) {
    const double wsum = w.feature_sum();
    if (!(wsum > 0.0)) {
        throw InvalidArgument("feature distance weights sum to zero");
    }
    double d = target[0] != hist[0] ? w.feature[0] : 0.0;
    for (std::size_t i = 1; i < kFeatureCount; ++i) {
        if (i == 1 && !ertComparable) {
            continue;
        }
        d += w.feature[i] * ranged(target[i] - hist[i], bounds.min[i], bounds.max[i]);
    }
    return std::clamp(d / wsum, 0.0, 1.0);
}

std::string_view to_string(NeighborhoodCase c) {
    switch (c) {
    case NeighborhoodCase::FarNeighbors: return "A";
    case NeighborhoodCase::DenseCluster: return "B";
    case NeighborhoodCase::ScatteredNeighbors: return "C";
    }
    return "?";
}

Neighborhood Neighborhood::from_scores(std::vector<ScoredJob> scored) {
    std::stable_sort(scored.begin(), scored.end(),
                     [](const ScoredJob& a, const ScoredJob& b) { return a.distance < b.distance; });
    return Neighborhood{std::move(scored), NeighborhoodCase::FarNeighbors};
}

std::size_t closest_count(std::size_t n, const ClusterParams& params) {
    const auto byPercent = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * params.kPercent / 100.0));
    return std::min(n, std::max({params.minNeighbors, byPercent, std::size_t{1}}));
}

NeighborhoodCase classify_neighborhood(const Neighborhood& scored, const ClusterParams& params) {
    const auto& e = scored.entries;
    if (e.empty()) {
        throw ColdStartError("no history jobs to classify");
    }
    const std::size_t k = closest_count(e.size(), params);
    double meanDist = 0.0;
    double maxWait = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        meanDist += e[i].distance;
        maxWait = std::max(maxWait, e[i].wait);
    }
    meanDist /= static_cast<double>(k);
    if (meanDist > params.avgDistThreshold) {
        return NeighborhoodCase::FarNeighbors;
    }
    std::vector<Point2> pts(k);
    for (std::size_t i = 0; i < k; ++i) {
        pts[i] = {e[i].distance, maxWait > 0.0 ? e[i].wait / maxWait : 0.0};
    }
    const auto clusters = dbscan(pts, params.eps, params.minPts);
    const double outliers = static_cast<double>(clusters.noise_count()) / static_cast<double>(k);
    return outliers < params.outlierFraction ? NeighborhoodCase::DenseCluster : NeighborhoodCase::ScatteredNeighbors;
}

double kernel_weighted_mean(std::span<const ScoredJob> jobs) {
    if (jobs.empty()) {
        throw InvalidArgument("weighted mean of an empty set");
    }
    std::vector<double> d;
    d.reserve(jobs.size());
    for (const auto& j : jobs) {
        d.push_back(j.distance);
    }
    const double h = median(d);
    double num = 0.0;
    double den = 0.0;
    for (const auto& j : jobs) {
        const double w = h > 0.0 ? std::exp(-(j.distance * j.distance) / (h * h)) : 1.0;
        num += w * j.wait;
        den += w;
    }
    if (!(den > 0.0)) {
        // Every kernel weight underflowed; fall back to the plain mean.
        for (const auto& j : jobs) {
            num += j.wait;
        }
        return num / static_cast<double>(jobs.size());
    }
    return num / den;
}

std::optional<double> predict_sdm(const Neighborhood& neighborhood, const SdmParams& params) {
    if (!(params.windowSize > 0.0)) {
        throw InvalidArgument("SDM window size must be positive");
    }
    std::map<long, std::vector<ScoredJob>> windows;
    for (const auto& j : neighborhood.entries) {
        if (j.distance > params.maxDistThreshold) {
            break;
        }
        const auto idx = static_cast<long>(std::floor(j.distance / params.windowSize + 1e-9));
        windows[idx].push_back(j);
    }
    const std::vector<ScoredJob>* best = nullptr;
    double bestStd = 0.0;
    double bestMeanDist = 0.0;
    for (const auto& [idx, jobs] : windows) {
        if (jobs.size() < params.minWindowJobs) {
            continue;
        }
        std::vector<double> waits;
        double meanDist = 0.0;
        for (const auto& j : jobs) {
            waits.push_back(j.wait);
            meanDist += j.distance;
        }
        meanDist /= static_cast<double>(jobs.size());
        const double sd = stddev(waits);
        // Windows are visited in index order, so strict comparisons keep the
        // smaller index on a full tie.
        if (best == nullptr || sd < bestStd || (sd == bestStd && meanDist < bestMeanDist)) {
            best = &jobs;
            bestStd = sd;
            bestMeanDist = meanDist;
        }
    }
    if (best == nullptr) {
        return std::nullopt;
    }
    return kernel_weighted_mean(*best);
}

double RidgeModel::predict(const FeatureVector& x) const {
    double y = intercept;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        y += coefficients[i] * x[i];
    }
    return y;
}

RidgeModel fit_ridge(std::span<const FeatureVector> rows, std::span<const double> targets, double lambda) {
    if (rows.size() != targets.size() || rows.empty()) {
        throw InvalidArgument("ridge regression needs one target per row and at least one row");
    }
    if (lambda < 0.0) {
        throw InvalidArgument("ridge penalty must be non-negative");
    }
    constexpr auto p = static_cast<Eigen::Index>(kFeatureCount);
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd sd = Eigen::VectorXd::Zero(p);
    for (const auto& r : rows) {
        for (Eigen::Index j = 0; j < p; ++j) {
            mu[j] += r[static_cast<std::size_t>(j)];
        }
    }
    mu /= static_cast<double>(n);
    for (const auto& r : rows) {
        for (Eigen::Index j = 0; j < p; ++j) {
            const double d = r[static_cast<std::size_t>(j)] - mu[j];
            sd[j] += d * d;
        }
    }
    for (Eigen::Index j = 0; j < p; ++j) {
        sd[j] = std::sqrt(sd[j] / static_cast<double>(n));
    }
    Eigen::MatrixXd z(n, p);
    Eigen::VectorXd y(n);
    double ybar = 0.0;
    for (double t : targets) {
        ybar += t;
    }
    ybar /= static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < p; ++j) {
            z(i, j) = sd[j] > 0.0 ? (r[static_cast<std::size_t>(j)] - mu[j]) / sd[j] : 0.0;
        }
        y[i] = targets[static_cast<std::size_t>(i)] - ybar;
    }
    Eigen::MatrixXd gram = z.transpose() * z;
    gram.diagonal().array() += lambda;
    // Constant columns are all-zero; pin their coefficient at zero even when
    // lambda is 0.
    for (Eigen::Index j = 0; j < p; ++j) {
        if (!(sd[j] > 0.0)) {
            gram(j, j) = 1.0;
        }
    }
    const Eigen::VectorXd beta = gram.ldlt().solve(z.transpose() * y);

    RidgeModel m;
    m.intercept = ybar;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (sd[j] > 0.0 && std::isfinite(beta[j])) {
            const double raw = beta[j] / sd[j];
            m.coefficients[static_cast<std::size_t>(j)] = raw;
            m.intercept -= raw * mu[j];
        }
    }
    return m;
}

std::optional<double> predict_ridge(const Neighborhood& neighborhood, std::span<const FeatureVector> historyFeatures,
                                    const FeatureVector& target, const RidgeParams& params) {
    std::vector<FeatureVector> rows;
    std::vector<double> waits;
    for (const auto& j : neighborhood.entries) {
        if (j.distance > params.maxDist) {
            break;
        }
        rows.push_back(historyFeatures[j.historyIndex]);
        waits.push_back(j.wait);
    }
    if (rows.size() < params.minRows) {
        return std::nullopt;
    }
    return fit_ridge(rows, waits, params.lambda).predict(target);
}

double predict_weighted_average(const Neighborhood& neighborhood, std::size_t k) {
    if (neighborhood.entries.empty()) {
        throw ColdStartError("weighted average needs at least one history job");
    }
    k = std::clamp<std::size_t>(k, 1, neighborhood.entries.size());
    return kernel_weighted_mean(std::span(neighborhood.entries).first(k));
}

} // namespace hpcpred::qwait
