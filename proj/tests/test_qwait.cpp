#include "hpcpred/error.hpp"
#include "hpcpred/qwait.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>

namespace hpcpred::qwait {
namespace {

JobState state_with(const FeatureVector& f) {
    JobState s;
    s.features = f;
    auto e = std::make_shared<const std::vector<double>>(std::vector<double>{0, 1, 2});
    for (auto& d : s.distributions) {
        d = Histogram::from_counts(e, {0.0, 0.0}, true);
    }
    return s;
}

// Spearman by hand: average ranks, then Pearson on the ranks.
double reference_spearman(std::vector<double> x, std::vector<double> y) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            double less = 0;
            double equal = 0;
            for (double o : v) {
                less += o < v[i] ? 1 : 0;
                equal += o == v[i] ? 1 : 0;
            }
            r[i] = less + (equal + 1.0) / 2.0;
        }
        return r;
    };
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(rx.size());
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(ry.size());
    double sxy = 0;
    double sxx = 0;
    double syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

TEST(ComputeWeights, MonotoneFeaturesGetFullWeight) {
    std::vector<JobState> states;
    std::vector<double> waits;
    for (int i = 0; i < 10; ++i) {
        FeatureVector f{};
        f[2] = i;         // increasing with wait
        f[3] = 100 - i;   // decreasing with wait
        f[4] = 7;         // constant
        states.push_back(state_with(f));
        waits.push_back(10.0 * i * i);
    }
    std::vector<WeightSample> h;
    for (std::size_t i = 0; i < states.size(); ++i) {
        h.push_back({&states[i], waits[i]});
    }
    const auto w = compute_weights(h);
    EXPECT_DOUBLE_EQ(w.feature[2], 1.0);
    EXPECT_DOUBLE_EQ(w.feature[3], 1.0);
    EXPECT_DOUBLE_EQ(w.feature[4], 0.0);
}

TEST(ComputeWeights, TiesMatchReferenceRankCorrelation) {
    std::mt19937_64 rng(8);
    std::vector<JobState> states;
    std::vector<double> xs;
    std::vector<double> waits;
    for (int i = 0; i < 40; ++i) {
        FeatureVector f{};
        f[5] = static_cast<double>(rng() % 5);
        xs.push_back(f[5]);
        waits.push_back(static_cast<double>(rng() % 7));
        states.push_back(state_with(f));
    }
    std::vector<WeightSample> h;
    for (std::size_t i = 0; i < states.size(); ++i) {
        h.push_back({&states[i], waits[i]});
    }
    EXPECT_NEAR(compute_weights(h).feature[5], std::abs(reference_spearman(xs, waits)), 1e-12);
}

TEST(ComputeWeights, InvariantUnderMonotoneTransform) {
    std::mt19937_64 rng(9);
    std::vector<JobState> a;
    std::vector<JobState> b;
    std::vector<double> waits;
    for (int i = 0; i < 30; ++i) {
        FeatureVector f{};
        f[6] = static_cast<double>(rng() % 1000);
        a.push_back(state_with(f));
        f[6] = std::exp(f[6] / 100.0);
        b.push_back(state_with(f));
        waits.push_back(static_cast<double>(rng() % 500));
    }
    std::vector<WeightSample> ha;
    std::vector<WeightSample> hb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ha.push_back({&a[i], waits[i]});
        hb.push_back({&b[i], waits[i]});
    }
    EXPECT_DOUBLE_EQ(compute_weights(ha).feature[6], compute_weights(hb).feature[6]);
}

TEST(ComputeWeights, NeedsThreeSamples) {
    JobState s;
    std::vector<WeightSample> h{{&s, 1.0}, {&s, 2.0}};
    EXPECT_THROW((void)compute_weights(h), InvalidArgument);
}

TEST(DistributionDistance, IdenticalIsZero) {
    FeatureVector f{};
    f[0] = 4;
    f[1] = 100;
    const auto s = state_with(f);
    DistributionNormalizer n{0, 1000, {}};
    n.chiMax.fill(1.0);
    EXPECT_DOUBLE_EQ(distribution_distance(s, s, WeightVector::uniform(), n), 0.0);
}

TEST(DistributionDistance, AllWeightOnRequestSize) {
    FeatureVector a{};
    FeatureVector b{};
    a[0] = 4;
    b[0] = 8;
    WeightVector w{};
    w.feature[0] = 1.0;
    DistributionNormalizer n{};
    EXPECT_DOUBLE_EQ(distribution_distance(state_with(a), state_with(b), w, n), 1.0);
}

TEST(DistributionDistance, ThreeTermHandCase) {
    FeatureVector a{};
    FeatureVector b{};
    a[0] = 4;
    b[0] = 8;
    a[1] = 100;
    b[1] = 500;
    WeightVector w{};
    w.feature[0] = 0.5;
    w.feature[1] = 0.25;
    w.distribution[2] = 0.25;
    DistributionNormalizer n{0, 1000, {}};
    n.chiMax.fill(2.0);
    const std::array<double, kPopulations> chi{0, 0, 1.0, 0, 0, 0};
    // 0.5 * 1 + 0.25 * 400/1000 + 0.25 * 1/2, over a weight sum of 1.
    EXPECT_NEAR(distribution_distance(state_with(a), state_with(b), w, n, chi), 0.725, 1e-15);
}

TEST(DistributionDistance, ZeroWeightSumThrows) {
    const auto s = state_with({});
    EXPECT_THROW((void)distribution_distance(s, s, WeightVector{}, DistributionNormalizer{}), InvalidArgument);
}

TEST(FeatureDistance, IdenticalAndExtremes) {
    FeatureVector lo{};
    FeatureVector hi{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        lo[i] = 1.0;
        hi[i] = 10.0 + static_cast<double>(i);
    }
    const auto bounds = FeatureBounds::of(std::vector<FeatureVector>{lo, hi});
    const auto w = WeightVector::uniform();
    EXPECT_DOUBLE_EQ(feature_distance(lo, lo, w, bounds), 0.0);
    EXPECT_DOUBLE_EQ(feature_distance(hi, lo, w, bounds), 1.0);
}

TEST(FeatureDistance, RandomPairMatchesDirectFormula) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int trial = 0; trial < 200; ++trial) {
        FeatureVector a{};
        FeatureVector b{};
        WeightVector w{};
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            a[i] = std::floor(u(rng));
            b[i] = std::floor(u(rng));
            w.feature[i] = u(rng) / 100.0;
        }
        const auto bounds = FeatureBounds::of(std::vector<FeatureVector>{a, b});
        double num = a[0] != b[0] ? w.feature[0] : 0.0;
        double den = w.feature[0];
        for (std::size_t i = 1; i < kFeatureCount; ++i) {
            const double span = std::max(a[i], b[i]) - std::min(a[i], b[i]);
            num += span > 0 ? w.feature[i] * std::abs(a[i] - b[i]) / span : 0.0;
            den += w.feature[i];
        }
        EXPECT_NEAR(feature_distance(a, b, w, bounds), num / den, 1e-12);
        EXPECT_DOUBLE_EQ(feature_distance(a, b, w, bounds), feature_distance(b, a, w, bounds));
    }
}

Neighborhood hood(std::vector<std::pair<double, double>> dw) {
    std::vector<ScoredJob> s;
    for (std::size_t i = 0; i < dw.size(); ++i) {
        s.push_back({dw[i].first, dw[i].second, i});
    }
    return Neighborhood::from_scores(std::move(s));
}

TEST(ClassifyNeighborhood, FarNeighbors) {
    std::vector<std::pair<double, double>> dw(50, {0.9, 100.0});
    EXPECT_EQ(classify_neighborhood(hood(dw), ClusterParams{}), NeighborhoodCase::FarNeighbors);
}

TEST(ClassifyNeighborhood, DenseCluster) {
    std::vector<std::pair<double, double>> dw;
    for (int i = 0; i < 20; ++i) {
        dw.emplace_back(0.05 + 0.001 * i, 1000.0 + i);
    }
    ClusterParams p;
    p.eps = 0.05;
    p.minPts = 2;
    EXPECT_EQ(classify_neighborhood(hood(dw), p), NeighborhoodCase::DenseCluster);
}

TEST(ClassifyNeighborhood, ScatteredWaits) {
    std::vector<std::pair<double, double>> dw;
    for (int i = 0; i < 20; ++i) {
        dw.emplace_back(0.02 + 0.02 * i, i % 2 == 0 ? 100.0 : 50000.0);
    }
    ClusterParams p;
    p.eps = 0.05;
    p.minPts = 4;
    p.outlierFraction = 0.3;
    // Spread 0.02 apart: each point sees at most two of its own wait class.
    EXPECT_EQ(classify_neighborhood(hood(dw), p), NeighborhoodCase::ScatteredNeighbors);
}

TEST(ClassifyNeighborhood, EmptyIsColdStart) {
    EXPECT_THROW((void)classify_neighborhood(Neighborhood{}, ClusterParams{}), ColdStartError);
}

TEST(PredictSdm, PicksTightestWindow) {
    const auto h = hood({{0.02, 100}, {0.03, 110}, {0.04, 105}, {0.30, 500}, {0.31, 900}});
    SdmParams p;
    p.windowSize = 0.05;
    p.maxDistThreshold = 0.5;
    const auto v = predict_sdm(h, p);
    ASSERT_TRUE(v);
    EXPECT_GE(*v, 100.0);
    EXPECT_LE(*v, 110.0);
}

TEST(PredictSdm, ConstantClusterAndTieRule) {
    EXPECT_DOUBLE_EQ(*predict_sdm(hood({{0.01, 42}, {0.02, 42}, {0.03, 42}}), SdmParams{}), 42.0);
    SdmParams p;
    p.windowSize = 0.1;
    // Equal spread in both windows; the nearer one wins.
    const auto v = predict_sdm(hood({{0.11, 10}, {0.12, 20}, {0.31, 1010}, {0.32, 1020}}), p);
    ASSERT_TRUE(v);
    EXPECT_LT(*v, 100.0);
}

TEST(PredictSdm, NothingInsideThreshold) {
    SdmParams p;
    p.maxDistThreshold = 0.3;
    EXPECT_FALSE(predict_sdm(hood({{0.5, 1}, {0.6, 2}}), p));
}

TEST(FitRidge, RecoversLinearLaw) {
    std::mt19937_64 rng(2);
    std::vector<FeatureVector> rows;
    std::vector<double> y;
    for (int i = 0; i < 60; ++i) {
        FeatureVector f{};
        for (auto& v : f) {
            v = static_cast<double>(rng() % 100);
        }
        rows.push_back(f);
        y.push_back(2.0 * f[2]);
    }
    const auto m = fit_ridge(rows, y, 1e-8);
    EXPECT_NEAR(m.coefficients[2], 2.0, 1e-6);
    FeatureVector t{};
    t[2] = 37;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        if (i != 2) {
            t[i] = 50;
        }
    }
    EXPECT_NEAR(m.predict(t), 74.0, 1e-6);
}

TEST(FitRidge, ConstantTargetIsIntercept) {
    std::vector<FeatureVector> rows(20);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i][3] = static_cast<double>(i);
    }
    const std::vector<double> y(rows.size(), 250.0);
    FeatureVector t{};
    t[3] = 1e6;
    EXPECT_NEAR(fit_ridge(rows, y, 1.0).predict(t), 250.0, 1e-9);
}

TEST(FitRidge, CollinearColumnsStayFinite) {
    std::vector<FeatureVector> rows;
    std::vector<double> y;
    for (int i = 0; i < 30; ++i) {
        FeatureVector f{};
        f[2] = i;
        f[3] = i;  // duplicate column
        rows.push_back(f);
        y.push_back(3.0 * i + 1);
    }
    const auto v = fit_ridge(rows, y, 1.0).predict(rows[10]);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_NEAR(v, 31.0, 1.0);
}

TEST(PredictRidge, TooFewRowsFallsThrough) {
    std::vector<FeatureVector> feats(5);
    EXPECT_FALSE(predict_ridge(hood({{0.1, 1}, {0.2, 2}, {0.3, 3}, {0.4, 4}, {0.5, 5}}), feats, {}, RidgeParams{}));
}

TEST(WeightedAverage, Examples) {
    EXPECT_DOUBLE_EQ(predict_weighted_average(hood({{0.1, 7}, {0.2, 100}}), 1), 7.0);
    EXPECT_DOUBLE_EQ(predict_weighted_average(hood({{0.2, 100}, {0.2, 200}}), 2), 150.0);
    // Bandwidth is the median distance 0.2.
    const double w1 = std::exp(-0.25);
    const double w2 = std::exp(-1.0);
    const double w3 = std::exp(-2.25);
    const double expected = (w1 * 10 + w2 * 20 + w3 * 60) / (w1 + w2 + w3);
    EXPECT_NEAR(predict_weighted_average(hood({{0.1, 10}, {0.2, 20}, {0.3, 60}, {0.9, 1e6}}), 3), expected, 1e-12);
}

TEST(WeightedAverage, ClampsKAndRejectsEmpty) {
    EXPECT_DOUBLE_EQ(predict_weighted_average(hood({{0.0, 5}}), 20), 5.0);
    EXPECT_THROW((void)predict_weighted_average(Neighborhood{}, 3), ColdStartError);
}

} // namespace
} // namespace hpcpred::qwait
