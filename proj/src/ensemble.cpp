#include "odefs/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include "odefs/errors.hpp"
#include "odefs/parallel.hpp"
#include "odefs/rng.hpp"

namespace odefs {

namespace {

// Stream ids for the seed ladder.
constexpr std::uint64_t kStreamLesinn = 1;
constexpr std::uint64_t kStreamComponent = 2;

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

}  // namespace

void OdefsParams::validate() const {
    if (!(a >= 0.0)) throw Error(ErrorCode::config, "params: a must be >= 0");
    if (unlabeled_ratio < 1) throw Error(ErrorCode::config, "params: unlabeled_ratio must be >= 1");
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw Error(ErrorCode::config, "params: epsilon must be in (0, 1)");
    }
    if (ensemble_size && *ensemble_size < 1) {
        throw Error(ErrorCode::config, "params: ensemble_size must be >= 1");
    }
    if (lesinn.subsets < 1) throw Error(ErrorCode::config, "params: lesinn.subsets must be >= 1");
    if (lesinn.subsample_size < 1) {
        throw Error(ErrorCode::config, "params: lesinn.subsample_size must be >= 1");
    }
    if (!(train.theta >= 0.0)) throw Error(ErrorCode::config, "params: theta must be >= 0");
    if (!(train.outer_tolerance > 0.0) || !(train.inner_tolerance > 0.0)) {
        throw Error(ErrorCode::config, "params: tolerances must be positive");
    }
    if (!(train.inner_initial_step > 0.0)) {
        throw Error(ErrorCode::config, "params: inner_initial_step must be positive");
    }
    if (train.max_outer_iterations < 1) {
        throw Error(ErrorCode::config, "params: max_outer_iterations must be >= 1");
    }
}

std::size_t OdefsParams::resolve_m_star(std::size_t n) const {
    if (m_star > 0) return m_star;
    return n <= 10000 ? 32 : 64;
}

TrainingBatch sample_batch(const Dataset& data, const CandidateSet& candidates,
                           std::size_t m_star, std::size_t m, std::uint64_t seed) {
    if (candidates.indices.empty()) {
        throw Error(ErrorCode::empty_candidate_set,
                    "candidate set is empty (a=" + std::to_string(candidates.a) +
                        "): every score is within mu + a*sigma; lower a");
    }
    if (m_star < 1 || m < 1) throw Error(ErrorCode::config, "sample_batch: m_star and m must be >= 1");

    const auto n = static_cast<std::uint32_t>(data.rows);
    const auto n_star = static_cast<std::uint32_t>(candidates.indices.size());
    Rng rng(seed);

    TrainingBatch batch;
    batch.outlier_examples.reserve(m_star);
    if (n_star >= m_star) {
        auto picks = rng.sample_without_replacement(n_star, static_cast<std::uint32_t>(m_star));
        std::sort(picks.begin(), picks.end());
        for (auto p : picks) batch.outlier_examples.push_back(candidates.indices[p]);
    } else {
        for (std::size_t i = 0; i < m_star; ++i) {
            batch.outlier_examples.push_back(candidates.indices[rng.below(n_star)]);
        }
    }
    if (m <= data.rows) {
        auto picks = rng.sample_without_replacement(n, static_cast<std::uint32_t>(m));
        std::sort(picks.begin(), picks.end());
        batch.unlabeled_examples = std::move(picks);
    } else {
        batch.unlabeled_examples.reserve(m);
        for (std::size_t j = 0; j < m; ++j) {
            batch.unlabeled_examples.push_back(static_cast<std::uint32_t>(rng.below(n)));
        }
    }
    return batch;
}

std::vector<std::uint32_t> select_features(const FeatureWeights& w, double epsilon) {
    double max_w = 0.0;
    for (double x : w.w) max_w = std::max(max_w, x);
    if (!(max_w > 0.0)) {
        throw Error(ErrorCode::degenerate_component, "select_features: all feature weights are zero");
    }
    std::vector<std::uint32_t> out;
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (w.w[k] / max_w > epsilon) out.push_back(static_cast<std::uint32_t>(k));
    }
    return out;
}

std::vector<double> normalize_scores(std::span<const double> raw) {
    double sum = 0.0;
    for (double s : raw) {
        if (!(s >= 0.0)) throw Error(ErrorCode::numeric, "normalize_scores: negative score");
        sum += s;
    }
    if (!(sum > 0.0)) {
        throw Error(ErrorCode::degenerate_component, "normalize_scores: all scores are zero");
    }
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] / sum;
    return out;
}

std::vector<double> aggregation_weights(std::span<const double> losses) {
    if (losses.empty()) throw Error(ErrorCode::config, "aggregation_weights: empty losses");
    double min_loss = losses[0];
    for (double l : losses) {
        if (!std::isfinite(l)) throw Error(ErrorCode::numeric, "aggregation_weights: non-finite loss");
        min_loss = std::min(min_loss, l);
    }
    std::vector<double> out(losses.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < losses.size(); ++i) {
        out[i] = std::exp(min_loss - losses[i]);
        sum += out[i];
    }
    for (double& u : out) u /= sum;
    return out;
}

std::pair<std::vector<double>, EnsembleModel> run_odefs(const Dataset& data,
                                                        const OdefsParams& params) {
    params.validate();
    data.validate();

    const std::size_t n = data.rows;
    const std::size_t m_star = params.resolve_m_star(n);
    const std::size_t m = params.unlabeled_ratio * m_star;

    auto model = build_lesinn(data, params.lesinn.subsets, params.lesinn.subsample_size,
                              mix_seed(params.seed, kStreamLesinn));
    LesinnScorer scorer(model, data);

    EnsembleModel ensemble;
    ensemble.m_star = m_star;
    ensemble.unlabeled_count = m;
    ensemble.initial_scores =
        lesinn_score_all(model, data, FeatureWeights::ones(data.cols), params.threads);
    ensemble.candidate_set = select_candidates(ensemble.initial_scores, params.a);
    if (ensemble.candidate_set.indices.empty()) {
        throw Error(ErrorCode::empty_candidate_set,
                    "candidate set is empty (a=" + std::to_string(params.a) +
                        "): every score is within mu + a*sigma; lower a");
    }

    const std::size_t n_star = ensemble.candidate_set.indices.size();
    const std::size_t l =
        params.ensemble_size ? *params.ensemble_size : 2 * ceil_div(n_star, m_star);
    ensemble.ensemble_size = l;

    struct Slot {
        bool degenerate = false;
        ComponentResult result;
        std::vector<double> tau;  // sum-normalized subset scores
        std::exception_ptr error;
    };
    std::vector<Slot> slots(l);

    const int team = resolve_threads(params.threads);
    const auto ll = static_cast<std::int64_t>(l);
#pragma omp parallel for schedule(dynamic) num_threads(team)
    for (std::int64_t j = 0; j < ll; ++j) {
        Slot& slot = slots[j];
        try {
            const std::uint64_t component_seed =
                mix_seed(mix_seed(params.seed, kStreamComponent), static_cast<std::uint64_t>(j));
            auto batch = sample_batch(data, ensemble.candidate_set, m_star, m, component_seed);
            auto opts = params.train;
            opts.seed = component_seed;
            auto state = train_component(batch, scorer, opts);

            ComponentResult result;
            result.component_index = static_cast<std::size_t>(j);
            result.loss = state.final_loss;
            result.w = state.w;
            result.trace = std::move(state.trace);
            result.feature_set = select_features(result.w, params.epsilon);
            result.selected_count = result.feature_set.size();

            auto subset_scores = lesinn_score_all_subset(model, data, result.feature_set, 1);
            slot.tau = normalize_scores(subset_scores);
            slot.result = std::move(result);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::degenerate_component) {
                slot.degenerate = true;
            } else {
                slot.error = std::current_exception();
            }
        } catch (...) {
            slot.error = std::current_exception();
        }
    }
    for (auto& slot : slots) {
        if (slot.error) std::rethrow_exception(slot.error);
    }

    std::vector<double> survivor_losses;
    for (auto& slot : slots) {
        if (slot.degenerate) {
            ++ensemble.dropped_components;
            continue;
        }
        survivor_losses.push_back(slot.result.loss);
        ensemble.components.push_back(std::move(slot.result));
    }
    if (ensemble.components.empty()) {
        throw Error(ErrorCode::all_components_degenerate,
                    "every ensemble component degenerated (all-zero weights or scores)");
    }
    ensemble.aggregation_weights = aggregation_weights(survivor_losses);

    std::vector<double> final_scores(n, 0.0);
    std::size_t surviving = 0;
    for (std::size_t j = 0; j < slots.size(); ++j) {
        if (slots[j].degenerate) continue;
        const double u = ensemble.aggregation_weights[surviving++];
        const auto& tau = slots[j].tau;
        for (std::size_t i = 0; i < n; ++i) final_scores[i] += u * tau[i];
    }
    return {std::move(final_scores), std::move(ensemble)};
}

std::vector<double> run_bare(const Dataset& data, const LesinnParams& params, std::uint64_t seed,
                             int threads) {
    data.validate();
    auto model =
        build_lesinn(data, params.subsets, params.subsample_size, mix_seed(seed, kStreamLesinn));
    return lesinn_score_all(model, data, FeatureWeights::ones(data.cols), threads);
}

}  // namespace odefs
