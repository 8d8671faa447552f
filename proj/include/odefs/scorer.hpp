#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace odefs {

struct FeatureWeights {
    std::vector<double> w;

    std::size_t size() const { return w.size(); }
    double operator[](std::size_t k) const { return w[k]; }

    static FeatureWeights ones(std::size_t d) { return {std::vector<double>(d, 1.0)}; }
    static FeatureWeights zeros(std::size_t d) { return {std::vector<double>(d, 0.0)}; }
    static FeatureWeights indicator(std::span<const std::uint32_t> features, std::size_t d);
};

/// Detector surface the training loop talks to. Implementations score the
/// objects of one fixed dataset under learnable non-negative feature weights;
/// an object's own row never competes as its nearest neighbor.
class Scorer {
public:
    virtual ~Scorer() = default;

    virtual std::size_t object_count() const = 0;
    virtual std::size_t feature_count() const = 0;

    virtual double object_score(std::uint32_t index, const FeatureWeights& w) const = 0;

    /// Subgradient of object_score with respect to w at fixed nearest
    /// neighbors; fills grad_out (length d) and returns the score.
    virtual double object_score_and_gradient(std::uint32_t index, const FeatureWeights& w,
                                             std::span<double> grad_out) const = 0;
};

}  // namespace odefs
