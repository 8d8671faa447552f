#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "odefs/dataset.hpp"
#include "odefs/lesinn.hpp"
#include "odefs/thresholding.hpp"
#include "odefs/training.hpp"

namespace odefs {

struct OdefsParams {
    double a = 2.0;                  // thresholding rate
    std::size_t m_star = 0;          // 0 = auto: 32 for n <= 10^4, 64 above
    std::size_t unlabeled_ratio = 6; // m = unlabeled_ratio * m_star
    std::optional<std::size_t> ensemble_size;  // default l = 2*ceil(n_star/m_star)
    double epsilon = 0.05;           // relative feature-weight threshold
    TrainOptions train;
    LesinnParams lesinn;
    std::uint64_t seed = 0;
    int threads = 0;                 // 0 = all available

    void validate() const;
    std::size_t resolve_m_star(std::size_t n) const;
};

struct ComponentResult {
    std::size_t component_index = 0;
    std::vector<std::uint32_t> feature_set;  // F^j, sorted
    double loss = 0.0;                       // final self-paced objective value
    FeatureWeights w;
    std::size_t selected_count = 0;          // d' = |F^j|
    std::vector<TraceRow> trace;
};

struct EnsembleModel {
    std::vector<ComponentResult> components;   // surviving components, index order
    std::vector<double> aggregation_weights;   // u, aligned with components, sums to 1
    CandidateSet candidate_set;
    std::vector<double> initial_scores;        // bare scores that produced the candidates
    std::size_t m_star = 0;
    std::size_t unlabeled_count = 0;
    std::size_t ensemble_size = 0;             // l, before drops
    std::size_t dropped_components = 0;
};

/// Draws m_star outlier examples from the candidate set (without replacement
/// when it is large enough, with replacement otherwise) and m unlabeled
/// examples from all objects. Throws Error(empty_candidate_set) when there
/// are no candidates.
TrainingBatch sample_batch(const Dataset& data, const CandidateSet& candidates,
                           std::size_t m_star, std::size_t m, std::uint64_t seed);

/// F = { k : w_k / max(w) > epsilon }; never empty (the argmax always
/// qualifies). Throws Error(degenerate_component) when max(w) == 0.
std::vector<std::uint32_t> select_features(const FeatureWeights& w, double epsilon);

/// Sum-normalization to a unit-L1 score vector. Throws
/// Error(degenerate_component) when every entry is zero.
std::vector<double> normalize_scores(std::span<const double> raw);

/// Softmax of negated losses; sums to 1, lower loss means higher weight.
std::vector<double> aggregation_weights(std::span<const double> losses);

/// Full pipeline: bare scoring, candidate thresholding, l independently
/// seeded components (sample, train, select features, rescore), loss-weighted
/// aggregation. Deterministic given (data, params). Expects normalized data.
std::pair<std::vector<double>, EnsembleModel> run_odefs(const Dataset& data,
                                                        const OdefsParams& params);

/// Unweighted LeSiNN baseline; bit-identical to run_odefs's initial scoring
/// stage under the same seed.
std::vector<double> run_bare(const Dataset& data, const LesinnParams& params, std::uint64_t seed,
                             int threads = 0);

}  // namespace odefs
