#include "odefs/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "odefs/errors.hpp"
#include "odefs/lesinn.hpp"

namespace odefs {

namespace {

// 1/(1+exp(gap)), overflow-safe in both tails and clamped to the open
// interval so a saturated pair still reports a loss strictly inside (0,1).
double pair_loss(double gap) {
    double h;
    if (gap >= 0.0) {
        double e = std::exp(-gap);
        h = e / (1.0 + e);
    } else {
        double e = std::exp(gap);
        h = 1.0 / (1.0 + e);
    }
    if (h <= 0.0) return std::numeric_limits<double>::min();
    if (h >= 1.0) return std::nextafter(1.0, 0.0);
    return h;
}

void check_batch(const TrainingBatch& batch, const Scorer& scorer) {
    if (batch.outlier_examples.empty() || batch.unlabeled_examples.empty()) {
        throw Error(ErrorCode::config, "training batch must contain outlier and unlabeled examples");
    }
    for (auto i : batch.outlier_examples) {
        if (i >= scorer.object_count()) throw Error(ErrorCode::config, "batch index out of range");
    }
    for (auto j : batch.unlabeled_examples) {
        if (j >= scorer.object_count()) throw Error(ErrorCode::config, "batch index out of range");
    }
}

// Loss of one outlier example against precomputed unlabeled scores. Shared by
// every evaluation path and kept out of line so loss values are bit-identical
// wherever they are computed.
[[gnu::noinline]] double loss_against(double score_star, std::span<const double> unlabeled_scores) {
    double sum = 0.0;
    for (double sj : unlabeled_scores) sum += pair_loss(score_star - sj);
    return sum / static_cast<double>(unlabeled_scores.size());
}

double l1_norm(const FeatureWeights& w) {
    double sum = 0.0;
    for (double x : w.w) sum += std::fabs(x);
    return sum;
}

// Scores (and, on the LeSiNN fast path, nearest-neighbor assignments) for one
// training batch. The last evaluation is cached so the gradient at the same w
// reuses the recorded neighbors instead of re-running the argmin search. All
// trainer entry points evaluate through this one class, which keeps recorded
// objective values bit-consistent across call sites.
class BatchEvaluator {
public:
    BatchEvaluator(const TrainingBatch& batch, const Scorer& scorer)
        : batch_(batch),
          scorer_(scorer),
          lesinn_(dynamic_cast<const LesinnScorer*>(&scorer)),
          m_star_(batch.outlier_examples.size()),
          m_(batch.unlabeled_examples.size()),
          d_(scorer.feature_count()) {
        check_batch(batch, scorer);
        s_star_.assign(m_star_, 0.0);
        s_unl_.assign(m_, 0.0);
        star_valid_.assign(m_star_, 0);
        if (lesinn_) {
            c_ = lesinn_->model().subset_count();
            argmin_star_.assign(m_star_ * c_, -1);
            argmin_unl_.assign(m_ * c_, -1);
        }
    }

    std::size_t m_star() const { return m_star_; }

    // Self-paced objective, the one canonical evaluation: per-example terms
    // v_i * (L_i - lambda) summed in index order, then the L1 term. The
    // lambda and v updates move each term monotonically, so histories built
    // from this function are non-increasing exactly.
    [[gnu::noinline]] double objective(const FeatureWeights& w, std::span<const std::uint8_t> v,
                                       double lambda, double theta) {
        if (v.size() != m_star_) throw Error(ErrorCode::config, "objective: v length mismatch");
        evaluate(w, v.data());
        double sum = 0.0;
        for (std::size_t i = 0; i < m_star_; ++i) {
            if (!v[i]) continue;
            double loss = loss_against(s_star_[i], s_unl_);
            sum += loss - lambda;
        }
        return sum / static_cast<double>(m_star_) + theta * l1_norm(w);
    }

    [[gnu::noinline]] double ranking_value(const FeatureWeights& w,
                                           std::span<const std::uint8_t> v) {
        if (v.size() != m_star_) throw Error(ErrorCode::config, "ranking_value: v length mismatch");
        evaluate(w, v.data());
        double sum = 0.0;
        for (std::size_t i = 0; i < m_star_; ++i) {
            if (!v[i]) continue;
            sum += loss_against(s_star_[i], s_unl_);
        }
        return sum / static_cast<double>(m_star_);
    }

    std::vector<double> losses(const FeatureWeights& w) {
        evaluate(w, nullptr);
        std::vector<double> out(m_star_);
        for (std::size_t i = 0; i < m_star_; ++i) out[i] = loss_against(s_star_[i], s_unl_);
        return out;
    }

    double loss_of(const FeatureWeights& w, std::size_t i) {
        evaluate(w, nullptr);
        return loss_against(s_star_[i], s_unl_);
    }

    double pair_fraction(const FeatureWeights& w) {
        evaluate(w, nullptr);
        std::size_t hits = 0;
        for (std::size_t i = 0; i < m_star_; ++i) {
            for (double sj : s_unl_) {
                if (s_star_[i] >= sj) ++hits;
            }
        }
        return static_cast<double>(hits) / (static_cast<double>(m_star_) * static_cast<double>(m_));
    }

    // Gradient of (1/m_star) sum_i v_i L_i(w). Reuses the scores and neighbor
    // assignments of the last evaluation when it was taken at this w.
    std::vector<double> gradient(const FeatureWeights& w, std::span<const std::uint8_t> v) {
        if (v.size() != m_star_) throw Error(ErrorCode::config, "gradient: v length mismatch");
        evaluate(w, v.data());

        std::vector<double> grad(d_, 0.0);
        std::vector<double> beta(m_, 0.0);
        std::vector<double> example_grad(d_);
        const double scale = 1.0 / (static_cast<double>(m_star_) * static_cast<double>(m_));

        for (std::size_t i = 0; i < m_star_; ++i) {
            if (!v[i]) continue;
            double alpha = 0.0;
            for (std::size_t j = 0; j < m_; ++j) {
                double h = pair_loss(s_star_[i] - s_unl_[j]);
                double deriv = -h * (1.0 - h);  // d pair_loss / d gap
                alpha += deriv;
                beta[j] -= deriv;
            }
            const double a = alpha * scale;
            star_gradient(i, w, example_grad);
            for (std::size_t k = 0; k < d_; ++k) grad[k] += a * example_grad[k];
        }
        for (std::size_t j = 0; j < m_; ++j) {
            const double b = beta[j] * scale;
            if (b == 0.0) continue;
            unlabeled_gradient(j, w, example_grad);
            for (std::size_t k = 0; k < d_; ++k) grad[k] += b * example_grad[k];
        }
        return grad;
    }

private:
    // Scores every unlabeled example and the outlier examples marked in
    // need_star (null = all); skipped when the cache already holds this w.
    void evaluate(const FeatureWeights& w, const std::uint8_t* need_star) {
        if (w.size() != d_) throw Error(ErrorCode::config, "evaluate: weight length mismatch");
        const bool same_w = w.w == last_w_;
        if (!same_w) {
            last_w_ = w.w;
            std::fill(star_valid_.begin(), star_valid_.end(), 0);
            for (std::size_t j = 0; j < m_; ++j) {
                const auto index = batch_.unlabeled_examples[j];
                if (lesinn_) {
                    s_unl_[j] = lesinn_score_with_argmins(
                        lesinn_->model(), lesinn_->data().row(index), w, index,
                        {argmin_unl_.data() + j * c_, c_});
                } else {
                    s_unl_[j] = scorer_.object_score(index, w);
                }
            }
        }
        for (std::size_t i = 0; i < m_star_; ++i) {
            if (need_star && !need_star[i]) continue;
            if (star_valid_[i]) continue;
            const auto index = batch_.outlier_examples[i];
            if (lesinn_) {
                s_star_[i] = lesinn_score_with_argmins(lesinn_->model(),
                                                       lesinn_->data().row(index), w, index,
                                                       {argmin_star_.data() + i * c_, c_});
            } else {
                s_star_[i] = scorer_.object_score(index, w);
            }
            star_valid_[i] = 1;
        }
    }

    void star_gradient(std::size_t i, const FeatureWeights& w, std::span<double> out) {
        const auto index = batch_.outlier_examples[i];
        if (lesinn_) {
            lesinn_gradient_from_argmins(lesinn_->model(), lesinn_->data().row(index),
                                         {argmin_star_.data() + i * c_, c_}, out);
        } else {
            scorer_.object_score_and_gradient(index, w, out);
        }
    }

    void unlabeled_gradient(std::size_t j, const FeatureWeights& w, std::span<double> out) {
        const auto index = batch_.unlabeled_examples[j];
        if (lesinn_) {
            lesinn_gradient_from_argmins(lesinn_->model(), lesinn_->data().row(index),
                                         {argmin_unl_.data() + j * c_, c_}, out);
        } else {
            scorer_.object_score_and_gradient(index, w, out);
        }
    }

    const TrainingBatch& batch_;
    const Scorer& scorer_;
    const LesinnScorer* lesinn_;
    std::size_t m_star_, m_, d_;
    std::size_t c_ = 0;

    std::vector<double> last_w_;
    std::vector<double> s_star_, s_unl_;
    std::vector<std::uint8_t> star_valid_;
    std::vector<std::int32_t> argmin_star_, argmin_unl_;
};

struct OptimizeResult {
    FeatureWeights w;
    double objective = 0.0;  // objective value at the returned w
    std::size_t steps = 0;
};

OptimizeResult optimize_w_impl(const FeatureWeights& w_init, std::span<const std::uint8_t> v,
                               double theta, const TrainingBatch& batch, const Scorer& scorer,
                               const TrainOptions& opts, double lambda) {
    const std::size_t d = scorer.feature_count();
    if (w_init.size() != d) throw Error(ErrorCode::config, "optimize_w: weight length mismatch");
    for (double x : w_init.w) {
        if (!(x >= 0.0) || !std::isfinite(x)) {
            throw Error(ErrorCode::config, "optimize_w: w_init must be finite and non-negative");
        }
    }

    BatchEvaluator evaluator(batch, scorer);
    OptimizeResult result{w_init, 0.0, 0};
    result.objective = evaluator.objective(result.w, v, lambda, theta);
    const bool any_selected = std::any_of(v.begin(), v.end(), [](std::uint8_t b) { return b != 0; });
    if (!any_selected) return result;

    FeatureWeights trial = result.w;
    std::vector<double> prev_w, prev_grad;
    double step = opts.inner_initial_step;
    for (std::size_t it = 0; it < opts.inner_max_steps; ++it) {
        auto grad = evaluator.gradient(result.w, v);
        for (std::size_t k = 0; k < d; ++k) {
            if (!std::isfinite(grad[k])) {
                throw Error(ErrorCode::numeric, "optimize_w: non-finite gradient (scorer misuse)");
            }
            // L1 on the non-negative orthant: theta joins the partial where
            // w_k > 0; a zeroed weight only re-enters against the full penalty.
            if (result.w.w[k] > 0.0) {
                grad[k] += theta;
            } else {
                grad[k] = grad[k] + theta < 0.0 ? grad[k] + theta : 0.0;
            }
        }

        // Barzilai-Borwein trial step from the previous (w, grad) pair; the
        // backtracking below still enforces strict descent.
        if (!prev_w.empty()) {
            double sy = 0.0, ss = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double sk = result.w.w[k] - prev_w[k];
                ss += sk * sk;
                sy += sk * (grad[k] - prev_grad[k]);
            }
            if (sy > 0.0 && ss > 0.0) {
                step = std::min(std::max(ss / sy, 1e-8), 1e8);
            } else {
                step = std::min(step * 2.0, 1e8);
            }
        }
        prev_w = result.w.w;
        prev_grad = grad;

        bool accepted = false;
        double trial_objective = 0.0;
        for (int halvings = 0; halvings <= 30; ++halvings) {
            for (std::size_t k = 0; k < d; ++k) {
                double x = result.w.w[k] - step * grad[k];
                trial.w[k] = x > 0.0 ? x : 0.0;
            }
            trial_objective = evaluator.objective(trial, v, lambda, theta);
            if (trial_objective < result.objective) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        const double improvement = result.objective - trial_objective;
        std::swap(result.w.w, trial.w);
        result.objective = trial_objective;
        ++result.steps;
        if (improvement < opts.inner_tolerance * std::max(1.0, std::fabs(result.objective))) break;
    }
    return result;
}

}  // namespace

double example_loss(std::size_t i, const FeatureWeights& w, const TrainingBatch& batch,
                    const Scorer& scorer) {
    if (i >= batch.outlier_examples.size()) {
        throw Error(ErrorCode::config, "example_loss: index out of range");
    }
    BatchEvaluator evaluator(batch, scorer);
    return evaluator.loss_of(w, i);
}

std::vector<double> batch_losses(const FeatureWeights& w, const TrainingBatch& batch,
                                 const Scorer& scorer) {
    BatchEvaluator evaluator(batch, scorer);
    return evaluator.losses(w);
}

double objective_value(const FeatureWeights& w, std::span<const std::uint8_t> v, double lambda,
                       double theta, const TrainingBatch& batch, const Scorer& scorer) {
    BatchEvaluator evaluator(batch, scorer);
    return evaluator.objective(w, v, lambda, theta);
}

double ranking_loss_value(const FeatureWeights& w, std::span<const std::uint8_t> v,
                          const TrainingBatch& batch, const Scorer& scorer) {
    BatchEvaluator evaluator(batch, scorer);
    return evaluator.ranking_value(w, v);
}

std::vector<double> ranking_loss_gradient(const FeatureWeights& w,
                                          std::span<const std::uint8_t> v,
                                          const TrainingBatch& batch, const Scorer& scorer) {
    BatchEvaluator evaluator(batch, scorer);
    return evaluator.gradient(w, v);
}

double empirical_j_star(const FeatureWeights& w, const TrainingBatch& batch,
                        const Scorer& scorer) {
    BatchEvaluator evaluator(batch, scorer);
    return evaluator.pair_fraction(w);
}

double update_lambda(std::optional<double> previous_lambda, std::span<const double> losses) {
    if (losses.empty()) throw Error(ErrorCode::config, "update_lambda: empty losses");
    double sum = 0.0;
    for (double l : losses) sum += l;
    const double mu = sum / static_cast<double>(losses.size());
    double sq = 0.0;
    for (double l : losses) {
        double dev = l - mu;
        sq += dev * dev;
    }
    const double sigma = std::sqrt(sq / static_cast<double>(losses.size()));
    const double current = mu + sigma;
    return previous_lambda ? std::max(*previous_lambda, current) : current;
}

std::vector<std::uint8_t> update_v(std::span<const double> losses, double lambda) {
    std::vector<std::uint8_t> v(losses.size());
    for (std::size_t i = 0; i < losses.size(); ++i) v[i] = losses[i] < lambda ? 1 : 0;
    return v;
}

FeatureWeights optimize_w(const FeatureWeights& w_init, std::span<const std::uint8_t> v,
                          double theta, const TrainingBatch& batch, const Scorer& scorer,
                          const TrainOptions& opts, double lambda) {
    return optimize_w_impl(w_init, v, theta, batch, scorer, opts, lambda).w;
}

FeatureWeights init_w0(const TrainingBatch& batch, double theta, const Scorer& scorer,
                       const TrainOptions& opts) {
    std::vector<std::uint8_t> all(batch.outlier_examples.size(), 1);
    return optimize_w(FeatureWeights::ones(scorer.feature_count()), all, theta, batch, scorer,
                      opts);
}

ComponentState train_component(const TrainingBatch& batch, const Scorer& scorer,
                               const TrainOptions& opts) {
    check_batch(batch, scorer);
    const std::size_t m_star = batch.outlier_examples.size();
    const double theta = opts.theta;

    ComponentState state;
    state.w = init_w0(batch, theta, scorer, opts);
    state.v.assign(m_star, 1);

    BatchEvaluator evaluator(batch, scorer);
    std::optional<double> lambda;
    double previous_objective = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t t = 1; t <= opts.max_outer_iterations; ++t) {
        auto losses = evaluator.losses(state.w);
        lambda = update_lambda(lambda, losses);
        state.lambda = *lambda;
        state.objective_history.push_back(evaluator.objective(state.w, state.v, *lambda, theta));

        state.v = update_v(losses, *lambda);
        state.objective_history.push_back(evaluator.objective(state.w, state.v, *lambda, theta));

        double objective;
        if (std::any_of(state.v.begin(), state.v.end(), [](std::uint8_t b) { return b != 0; })) {
            auto opt = optimize_w_impl(state.w, state.v, theta, batch, scorer, opts, *lambda);
            state.w = std::move(opt.w);
            objective = opt.objective;
        } else {
            objective = state.objective_history.back();
        }
        state.objective_history.push_back(objective);

        std::size_t selected = 0;
        for (auto b : state.v) selected += b;
        state.trace.push_back({t, *lambda, selected, objective});
        state.iterations = t;

        if (t >= 2) {
            const double rel = std::fabs(objective - previous_objective) /
                               std::max(std::fabs(previous_objective), 1e-12);
            if (rel < opts.outer_tolerance) {
                previous_objective = objective;
                break;
            }
        }
        previous_objective = objective;
    }
    state.final_loss = state.objective_history.back();
    return state;
}

}  // namespace odefs
