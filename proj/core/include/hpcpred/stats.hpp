#pragma once

#include <optional>
#include <span>
#include <vector>

namespace hpcpred {

/// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation; nullopt when either series is constant or the
/// lengths differ or fewer than two points are given.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Spearman's rank correlation with average ranks for ties.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> v);
/// Population standard deviation.
double stddev(std::span<const double> v);
double median(std::vector<double> v);

} // namespace hpcpred
