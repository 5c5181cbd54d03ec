#include "hpcpred/dbscan.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace hpcpred {

std::size_t Clustering::noise_count() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNoise));
}

std::vector<std::size_t> Clustering::members(int cluster) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == cluster) {
            out.push_back(i);
        }
    }
    return out;
}

namespace {

constexpr int kUnvisited = -2;

std::vector<std::size_t> region(std::span<const Point2> pts, std::size_t p, double eps) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (std::hypot(pts[i].x - pts[p].x, pts[i].y - pts[p].y) <= eps) {
            out.push_back(i);
        }
    }
    return out;
}

} // namespace

Clustering dbscan(std::span<const Point2> points, double eps, std::size_t minPts) {
    Clustering result;
    result.labels.assign(points.size(), kUnvisited);
    for (std::size_t p = 0; p < points.size(); ++p) {
        if (result.labels[p] != kUnvisited) {
            continue;
        }
        auto seeds = region(points, p, eps);
        if (seeds.size() < minPts) {
            result.labels[p] = Clustering::kNoise;
            continue;
        }
        const int cluster = result.clusterCount++;
        result.labels[p] = cluster;
        std::deque<std::size_t> frontier(seeds.begin(), seeds.end());
        while (!frontier.empty()) {
            const std::size_t q = frontier.front();
            frontier.pop_front();
            if (result.labels[q] == Clustering::kNoise) {
                result.labels[q] = cluster; // border point
            }
            if (result.labels[q] != kUnvisited) {
                continue;
            }
            result.labels[q] = cluster;
            auto more = region(points, q, eps);
            if (more.size() >= minPts) {
                frontier.insert(frontier.end(), more.begin(), more.end());
            }
        }
    }
    return result;
}

Clustering dbscan(std::span<const double> values, double eps, std::size_t minPts) {
    std::vector<Point2> pts;
    pts.reserve(values.size());
    for (double v : values) {
        pts.push_back({v, 0.0});
    }
    return dbscan(pts, eps, minPts);
}

} // namespace hpcpred
