#include "odefs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "odefs/errors.hpp"

namespace odefs {

double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size()) {
        throw Error(ErrorCode::metric, "auc: scores and labels differ in length");
    }
    const std::size_t n = scores.size();
    std::size_t positives = 0;
    for (auto l : labels) positives += l;
    const std::size_t negatives = n - positives;
    if (positives == 0 || negatives == 0) {
        throw Error(ErrorCode::metric, "auc: needs at least one outlier and one inlier label");
    }

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return scores[a] < scores[b]; });

    // Midranks over tie groups; rank sum of positives gives the Mann-Whitney
    // statistic with ties counted one half.
    double positive_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (std::size_t t = i; t < j; ++t) {
            if (labels[order[t]]) positive_rank_sum += midrank;
        }
        i = j;
    }
    const double np = static_cast<double>(positives);
    const double nn = static_cast<double>(negatives);
    return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

std::vector<std::uint32_t> ranking(std::span<const double> scores) {
    std::vector<std::uint32_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    return order;
}

double precision_at_k(std::span<const double> scores, std::span<const std::uint8_t> labels,
                      std::optional<std::size_t> k) {
    if (scores.size() != labels.size()) {
        throw Error(ErrorCode::metric, "precision_at_k: scores and labels differ in length");
    }
    std::size_t positives = 0;
    for (auto l : labels) positives += l;
    const std::size_t kk = k.value_or(positives);
    if (kk < 1 || kk > scores.size()) {
        throw Error(ErrorCode::metric, "precision_at_k: k=" + std::to_string(kk) +
                                           " out of range [1, " + std::to_string(scores.size()) + "]");
    }
    auto order = ranking(scores);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < kk; ++i) hits += labels[order[i]];
    return static_cast<double>(hits) / static_cast<double>(kk);
}

MetricReport evaluate(std::span<const double> scores, std::span<const std::uint8_t> labels,
                      std::optional<std::size_t> k) {
    std::size_t positives = 0;
    for (auto l : labels) positives += l;
    MetricReport report;
    report.k = k.value_or(positives);
    report.auc = auc(scores, labels);
    report.precision_at_k = precision_at_k(scores, labels, k);
    return report;
}

}  // namespace odefs
