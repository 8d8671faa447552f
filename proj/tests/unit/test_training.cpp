#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <vector>

#include "odefs/dataset.hpp"
#include "odefs/errors.hpp"
#include "odefs/lesinn.hpp"
#include "odefs/rng.hpp"
#include "odefs/training.hpp"

using namespace odefs;

namespace {

// Scorer with canned per-object scores, independent of w. Lets the loss and
// objective examples be verified by direct arithmetic.
class CannedScorer final : public Scorer {
public:
    explicit CannedScorer(std::vector<double> scores, std::size_t d = 2)
        : scores_(std::move(scores)), d_(d) {}

    std::size_t object_count() const override { return scores_.size(); }
    std::size_t feature_count() const override { return d_; }
    double object_score(std::uint32_t index, const FeatureWeights&) const override {
        return scores_[index];
    }
    double object_score_and_gradient(std::uint32_t index, const FeatureWeights&,
                                     std::span<double> grad_out) const override {
        std::fill(grad_out.begin(), grad_out.end(), 0.0);
        return scores_[index];
    }

private:
    std::vector<double> scores_;
    std::size_t d_;
};

struct LesinnFixture {
    Dataset data;
    LesinnModel model;
    std::unique_ptr<LesinnScorer> scorer;
    TrainingBatch batch;

    LesinnFixture(std::size_t n, std::size_t d, std::size_t m_star, std::size_t m,
                  std::uint64_t seed, double outlier_fraction = 0.15) {
        SyntheticSpec spec;
        spec.n = n;
        spec.d = d;
        spec.d_relevant = std::max<std::size_t>(1, d / 3);
        spec.outlier_fraction = outlier_fraction;
        spec.seed = seed;
        auto [normalized, params] = minmax_normalize(generate_synthetic(spec));
        (void)params;
        data = std::move(normalized);
        model = build_lesinn(data, 10, 5, mix_seed(seed, 1));
        scorer = std::make_unique<LesinnScorer>(model, data);

        Rng rng(mix_seed(seed, 2));
        for (std::size_t i = 0; i < m_star; ++i) {
            batch.outlier_examples.push_back(static_cast<std::uint32_t>(rng.below(n)));
        }
        batch.unlabeled_examples =
            rng.sample_without_replacement(static_cast<std::uint32_t>(n),
                                           static_cast<std::uint32_t>(m));
    }
};

double loss_for_gap(double gap) { return 1.0 / (1.0 + std::exp(gap)); }

}  // namespace

TEST_CASE("example_loss on canned score gaps") {
    SUBCASE("equal scores give 0.5") {
        CannedScorer scorer({1.0, 1.0, 1.0});
        TrainingBatch batch{{0}, {1, 2}};
        CHECK(example_loss(0, FeatureWeights::ones(2), batch, scorer) == 0.5);
    }
    SUBCASE("gap of ln 3 gives 0.25") {
        CannedScorer scorer({std::log(3.0), 0.0});
        TrainingBatch batch{{0}, {1}};
        CHECK(example_loss(0, FeatureWeights::ones(2), batch, scorer) ==
              doctest::Approx(0.25).epsilon(1e-14));
    }
    SUBCASE("large gaps saturate but stay strictly inside (0,1)") {
        CannedScorer scorer({60.0, 0.0});
        TrainingBatch batch{{0}, {1}};
        const double small = example_loss(0, FeatureWeights::ones(2), batch, scorer);
        CHECK(small > 0.0);
        CHECK(small < 1e-20);

        CannedScorer reversed({0.0, 60.0});
        const double large = example_loss(0, FeatureWeights::ones(2), batch, reversed);
        CHECK(large < 1.0);
        CHECK(large > 1.0 - 1e-15);

        CannedScorer extreme({900.0, 0.0});
        const double deep = example_loss(0, FeatureWeights::ones(2), batch, extreme);
        CHECK(deep > 0.0);  // clamped past the exp underflow point
    }
}

TEST_CASE("objective_value on hand arithmetic") {
    // losses 0.2 and 0.8 via gaps ln4 and -ln4
    CannedScorer scorer({std::log(4.0), -std::log(4.0), 0.0});
    TrainingBatch batch{{0, 1}, {2}};
    FeatureWeights w{{0.05, 0.05}};  // theta * ||w||_1 = 0.01 with theta = 0.1

    SUBCASE("worked example") {
        std::vector<std::uint8_t> v{1, 0};
        const double value = objective_value(w, v, 0.5, 0.1, batch, scorer);
        CHECK(value == doctest::Approx(-0.14).epsilon(1e-12));  // (0.2-0.5)/2 + 0.01
    }
    SUBCASE("empty selection leaves only the L1 term") {
        std::vector<std::uint8_t> v{0, 0};
        CHECK(objective_value(w, v, 0.7, 0.1, batch, scorer) == doctest::Approx(0.01));
    }
    SUBCASE("full selection at lambda 0 is mean loss plus L1") {
        std::vector<std::uint8_t> v{1, 1};
        const double expected = (loss_for_gap(std::log(4.0)) + loss_for_gap(-std::log(4.0))) / 2.0 + 0.01;
        CHECK(objective_value(w, v, 0.0, 0.1, batch, scorer) ==
              doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("empirical_j_star counts ranking pairs") {
    SUBCASE("perfect ranking") {
        CannedScorer scorer({5.0, 6.0, 1.0, 2.0});
        TrainingBatch batch{{0, 1}, {2, 3}};
        CHECK(empirical_j_star(FeatureWeights::ones(2), batch, scorer) == 1.0);
    }
    SUBCASE("reversed ranking") {
        CannedScorer scorer({1.0, 2.0, 5.0, 6.0});
        TrainingBatch batch{{0, 1}, {2, 3}};
        CHECK(empirical_j_star(FeatureWeights::ones(2), batch, scorer) == 0.0);
    }
    SUBCASE("one pair of two") {
        CannedScorer scorer({3.0, 1.0, 5.0});
        TrainingBatch batch{{0}, {1, 2}};
        CHECK(empirical_j_star(FeatureWeights::ones(2), batch, scorer) == 0.5);
    }
    SUBCASE("matches brute-force pair counting on a lesinn scorer") {
        LesinnFixture fx(60, 6, 5, 12, 404);
        FeatureWeights w = FeatureWeights::ones(6);
        double hits = 0.0;
        for (auto i : fx.batch.outlier_examples) {
            for (auto j : fx.batch.unlabeled_examples) {
                if (fx.scorer->object_score(i, w) >= fx.scorer->object_score(j, w)) hits += 1.0;
            }
        }
        const double expected = hits / (5.0 * 12.0);
        CHECK(std::fabs(empirical_j_star(w, fx.batch, *fx.scorer) - expected) <= 1e-12);
    }
}

TEST_CASE("update_lambda follows the mu+sigma schedule") {
    std::vector<double> losses{0.4, 0.6};
    CHECK(update_lambda(std::nullopt, losses) == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(update_lambda(0.7, losses) == 0.7);
    CHECK(update_lambda(0.55, losses) == doctest::Approx(0.6).epsilon(1e-14));

    std::vector<double> equal{0.3, 0.3};
    CHECK(update_lambda(std::nullopt, equal) == doctest::Approx(0.3));
}

TEST_CASE("update_v is the strict indicator") {
    std::vector<double> losses{0.1, 0.6};
    CHECK(update_v(losses, 0.5) == std::vector<std::uint8_t>{1, 0});

    std::vector<double> boundary{0.5, 0.2};
    CHECK(update_v(boundary, 0.5) == std::vector<std::uint8_t>{0, 1});  // equality excluded
}

TEST_CASE("lambda = mu+sigma keeps at least half the examples") {
    Rng rng(606);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t m = 2 + rng.below(63);
        std::vector<double> losses(m);
        for (auto& l : losses) l = 0.001 + 0.998 * rng.uniform01();
        const double lambda = update_lambda(std::nullopt, losses);
        auto v = update_v(losses, lambda);
        const std::size_t selected = std::accumulate(v.begin(), v.end(), std::size_t{0});
        CHECK(selected >= (m + 1) / 2);
    }
}

TEST_CASE("ranking loss gradient matches central finite differences") {
    LesinnFixture fx(60, 6, 4, 10, 1234);
    Rng rng(88);
    const double h = 1e-6;

    int checked = 0;
    for (int trial = 0; trial < 120 && checked < 15; ++trial) {
        FeatureWeights w{{}};
        for (int k = 0; k < 6; ++k) w.w.push_back(0.2 + 1.5 * rng.uniform01());
        std::vector<std::uint8_t> v(4, 0);
        for (auto& b : v) b = rng.uniform01() < 0.7 ? 1 : 0;
        if (std::none_of(v.begin(), v.end(), [](auto b) { return b; })) v[0] = 1;

        auto analytic = ranking_loss_gradient(w, v, fx.batch, *fx.scorer);

        bool stable = true;
        std::vector<double> fd(6);
        for (int k = 0; k < 6 && stable; ++k) {
            FeatureWeights lo = w, hi = w;
            lo.w[k] -= h;
            hi.w[k] += h;
            auto glo = ranking_loss_gradient(lo, v, fx.batch, *fx.scorer);
            auto ghi = ranking_loss_gradient(hi, v, fx.batch, *fx.scorer);
            // argmin switches show up as gradient jumps across the stencil
            for (int q = 0; q < 6; ++q) {
                if (std::fabs(ghi[q] - glo[q]) > 1e-4) stable = false;
            }
            fd[k] = (ranking_loss_value(hi, v, fx.batch, *fx.scorer) -
                     ranking_loss_value(lo, v, fx.batch, *fx.scorer)) /
                    (2.0 * h);
        }
        if (!stable) continue;
        ++checked;

        double num = 0.0, den = 0.0;
        for (int k = 0; k < 6; ++k) {
            num += (fd[k] - analytic[k]) * (fd[k] - analytic[k]);
            den += fd[k] * fd[k];
        }
        CHECK(std::sqrt(num) <= 1e-4 * std::max(std::sqrt(den), 1e-12));
    }
    CHECK(checked >= 15);
}

TEST_CASE("optimize_w descends and stays feasible") {
    LesinnFixture fx(80, 9, 6, 18, 55);
    TrainOptions opts;

    SUBCASE("objective never increases from the all-ones start") {
        std::vector<std::uint8_t> v(6, 1);
        auto w0 = FeatureWeights::ones(9);
        auto w = optimize_w(w0, v, opts.theta, fx.batch, *fx.scorer, opts);
        const double before = objective_value(w0, v, 0.0, opts.theta, fx.batch, *fx.scorer);
        const double after = objective_value(w, v, 0.0, opts.theta, fx.batch, *fx.scorer);
        CHECK(after <= before);
        for (double x : w.w) CHECK(x >= 0.0);
    }
    SUBCASE("empty selection returns w_init unchanged") {
        std::vector<std::uint8_t> v(6, 0);
        FeatureWeights w0{{0.5, 1.0, 0.2, 0.0, 0.9, 0.4, 0.7, 0.1, 1.3}};
        auto w = optimize_w(w0, v, opts.theta, fx.batch, *fx.scorer, opts);
        CHECK(w.w == w0.w);
    }
    SUBCASE("negative initial weights are rejected") {
        std::vector<std::uint8_t> v(6, 1);
        FeatureWeights bad{{-0.1, 1, 1, 1, 1, 1, 1, 1, 1}};
        CHECK_THROWS_AS(optimize_w(bad, v, opts.theta, fx.batch, *fx.scorer, opts), Error);
    }
}

TEST_CASE("init_w0 contract") {
    LesinnFixture fx(70, 7, 5, 15, 202);
    TrainOptions opts;

    SUBCASE("zero optimizer steps return the all-ones start") {
        TrainOptions frozen = opts;
        frozen.inner_max_steps = 0;
        auto w = init_w0(fx.batch, frozen.theta, *fx.scorer, frozen);
        CHECK(w.w == FeatureWeights::ones(7).w);
    }
    SUBCASE("objective at w0 does not exceed the all-ones objective") {
        std::vector<std::uint8_t> v(5, 1);
        auto w0 = init_w0(fx.batch, opts.theta, *fx.scorer, opts);
        const double at_ones =
            objective_value(FeatureWeights::ones(7), v, 0.0, opts.theta, fx.batch, *fx.scorer);
        const double at_w0 = objective_value(w0, v, 0.0, opts.theta, fx.batch, *fx.scorer);
        CHECK(at_w0 <= at_ones);
    }
    SUBCASE("deterministic") {
        auto a = init_w0(fx.batch, opts.theta, *fx.scorer, opts);
        auto b = init_w0(fx.batch, opts.theta, *fx.scorer, opts);
        CHECK(a.w == b.w);
    }
}

TEST_CASE("train_component produces a monotone bounded objective history") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        LesinnFixture fx(80, 8, 6, 18, seed);
        TrainOptions opts;
        auto state = train_component(fx.batch, *fx.scorer, opts);

        REQUIRE(!state.objective_history.empty());
        CHECK(state.objective_history.size() == 3 * state.iterations);
        for (std::size_t i = 1; i < state.objective_history.size(); ++i) {
            CHECK(state.objective_history[i] <= state.objective_history[i - 1]);
        }
        for (double value : state.objective_history) CHECK(value > -2.0);
        CHECK(state.iterations <= opts.max_outer_iterations);
        CHECK(state.final_loss == state.objective_history.back());

        // lambda trace is non-decreasing
        for (std::size_t t = 1; t < state.trace.size(); ++t) {
            CHECK(state.trace[t].lambda >= state.trace[t - 1].lambda);
        }
        CHECK(state.lambda < 2.0);
        for (double x : state.w.w) CHECK(x >= 0.0);

        // every loss under the final weights stays strictly inside (0,1)
        auto losses = batch_losses(state.w, fx.batch, *fx.scorer);
        for (double l : losses) {
            CHECK(l > 0.0);
            CHECK(l < 1.0);
        }
        // at least half of the examples survive the final v refresh
        auto v = update_v(losses, update_lambda(state.lambda, losses));
        const std::size_t selected = std::accumulate(v.begin(), v.end(), std::size_t{0});
        CHECK(selected >= (v.size() + 1) / 2);
    }
}

TEST_CASE("training separates relevant from noise features on synthetic data") {
    SyntheticSpec spec;
    spec.n = 400;
    spec.d = 30;
    spec.d_relevant = 6;
    spec.outlier_fraction = 0.05;
    spec.seed = 31;
    auto [data, params] = minmax_normalize(generate_synthetic(spec));
    (void)params;
    auto model = build_lesinn(data, 20, 8, 7);
    LesinnScorer scorer(model, data);

    // oracle batch: outlier examples drawn from the true outliers
    TrainingBatch batch;
    Rng rng(17);
    for (std::size_t i = 0; i < data.rows && batch.outlier_examples.size() < 12; ++i) {
        if (data.labels[i]) batch.outlier_examples.push_back(static_cast<std::uint32_t>(i));
    }
    batch.unlabeled_examples = rng.sample_without_replacement(400, 72);

    TrainOptions opts;
    auto state = train_component(batch, scorer, opts);

    double relevant_mean = 0.0, noise_mean = 0.0;
    for (std::size_t k = 0; k < 30; ++k) {
        (k < 6 ? relevant_mean : noise_mean) += state.w.w[k];
    }
    relevant_mean /= 6.0;
    noise_mean /= 24.0;
    CHECK(relevant_mean > noise_mean);
}
