#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace odefs {

/// Outlier candidates: indices of scores strictly above mu + a*sigma, kept
/// together with the statistics that produced them. For a > 0 the selected
/// fraction is bounded by 1/(1+a^2) (one-sided Chebyshev on the empirical
/// score distribution).
struct CandidateSet {
    std::vector<std::uint32_t> indices;
    double mu = 0.0;
    double sigma = 0.0;  // population standard deviation (divide by n)
    double a = 0.0;
};

/// Requires n >= 2 and finite scores. An empty candidate set is a valid
/// result here; consumers that need candidates signal the error.
CandidateSet select_candidates(std::span<const double> scores, double a);

}  // namespace odefs
