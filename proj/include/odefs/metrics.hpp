#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace odefs {

struct MetricReport {
    double auc = 0.0;
    double precision_at_k = 0.0;
    std::size_t k = 0;
};

/// Probability that a random outlier outranks a random inlier; ties count
/// one half (rank-based Mann-Whitney form, O(n log n)). Requires at least
/// one positive and one negative label.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Fraction of true outliers among the k highest-scored objects; ties at the
/// k-th score are broken by lowest object index. k defaults to the number of
/// positive labels.
double precision_at_k(std::span<const double> scores, std::span<const std::uint8_t> labels,
                      std::optional<std::size_t> k = std::nullopt);

MetricReport evaluate(std::span<const double> scores, std::span<const std::uint8_t> labels,
                      std::optional<std::size_t> k = std::nullopt);

/// Ranking used by precision_at_k and the score reports: indices ordered by
/// descending score, ascending index among ties.
std::vector<std::uint32_t> ranking(std::span<const double> scores);

}  // namespace odefs
