#include "odefs/thresholding.hpp"

#include <cmath>
#include <string>

#include "odefs/errors.hpp"

namespace odefs {

CandidateSet select_candidates(std::span<const double> scores, double a) {
    const std::size_t n = scores.size();
    if (n < 2) throw Error(ErrorCode::config, "select_candidates: need at least 2 scores");
    if (!(a >= 0.0)) throw Error(ErrorCode::config, "select_candidates: a must be >= 0");

    double sum = 0.0;
    for (double s : scores) {
        if (!std::isfinite(s)) throw Error(ErrorCode::numeric, "select_candidates: non-finite score");
        sum += s;
    }
    const double mu = sum / static_cast<double>(n);
    double sq = 0.0;
    for (double s : scores) {
        double dev = s - mu;
        sq += dev * dev;
    }
    const double sigma = std::sqrt(sq / static_cast<double>(n));  // population sd

    CandidateSet out;
    out.mu = mu;
    out.sigma = sigma;
    out.a = a;
    for (std::size_t i = 0; i < n; ++i) {
        if (scores[i] - mu - a * sigma > 0.0) out.indices.push_back(static_cast<std::uint32_t>(i));
    }
    return out;
}

}  // namespace odefs
