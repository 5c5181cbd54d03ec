#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hpcpred {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct Clustering {
    static constexpr int kNoise = -1;

    /// Cluster id per input point, or kNoise.
    std::vector<int> labels;
    int clusterCount = 0;

    [[nodiscard]] std::size_t noise_count() const;
    /// Member indices of one cluster, ascending.
    [[nodiscard]] std::vector<std::size_t> members(int cluster) const;
};

/// DBSCAN with Euclidean distance. A point is a core point when at least
/// minPts points (itself included) lie within eps of it. Clusters are
/// numbered in the order their first core point appears in the input.
Clustering dbscan(std::span<const Point2> points, double eps, std::size_t minPts);

/// One-dimensional convenience overload.
Clustering dbscan(std::span<const double> values, double eps, std::size_t minPts);

} // namespace hpcpred
