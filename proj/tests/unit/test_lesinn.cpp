#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "odefs/dataset.hpp"
#include "odefs/errors.hpp"
#include "odefs/lesinn.hpp"
#include "odefs/rng.hpp"

using namespace odefs;

namespace {

Dataset make_dataset(std::vector<std::vector<double>> rows) {
    Dataset data;
    data.rows = rows.size();
    data.cols = rows[0].size();
    for (std::size_t c = 0; c < data.cols; ++c) data.feature_names.push_back("f" + std::to_string(c));
    for (const auto& r : rows) data.values.insert(data.values.end(), r.begin(), r.end());
    return data;
}

Dataset random_dataset(std::size_t n, std::size_t d, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.n = n;
    spec.d = d;
    spec.d_relevant = std::max<std::size_t>(1, d / 2);
    spec.outlier_fraction = 0.1;
    spec.seed = seed;
    return generate_synthetic(spec);
}

// Model with hand-picked subsets, for exact-arithmetic cases.
LesinnModel manual_model(const Dataset& data, std::vector<std::vector<std::uint32_t>> subsets) {
    LesinnModel model;
    model.subsample_size = subsets[0].size();
    model.dims = data.cols;
    model.seed = 0;
    for (auto& subset : subsets) {
        std::sort(subset.begin(), subset.end());
        for (auto idx : subset) {
            model.member_index.push_back(idx);
            auto r = data.row(idx);
            model.member_rows.insert(model.member_rows.end(), r.begin(), r.end());
        }
        model.subsets.push_back(subset);
    }
    return model;
}

}  // namespace

TEST_CASE("build_lesinn draws distinct members deterministically") {
    auto data = random_dataset(10, 3, 1);
    auto model = build_lesinn(data, 50, 8, 99);
    CHECK(model.subset_count() == 50);
    for (const auto& subset : model.subsets) {
        REQUIRE(subset.size() == 8);
        std::set<std::uint32_t> unique(subset.begin(), subset.end());
        CHECK(unique.size() == 8);
        for (auto idx : subset) CHECK(idx < 10);
    }
    auto again = build_lesinn(data, 50, 8, 99);
    CHECK(again.subsets == model.subsets);
    auto other = build_lesinn(data, 50, 8, 100);
    CHECK(other.subsets != model.subsets);
}

TEST_CASE("build_lesinn with subsample_size == n uses every index") {
    auto data = random_dataset(6, 2, 2);
    auto model = build_lesinn(data, 5, 6, 7);
    for (const auto& subset : model.subsets) {
        std::set<std::uint32_t> unique(subset.begin(), subset.end());
        CHECK(unique == std::set<std::uint32_t>{0, 1, 2, 3, 4, 5});
    }
}

TEST_CASE("build_lesinn rejects oversized subsamples") {
    auto data = random_dataset(5, 2, 3);
    CHECK_THROWS_AS(build_lesinn(data, 3, 6, 1), Error);
    CHECK_THROWS_AS(build_lesinn(data, 0, 2, 1), Error);
}

TEST_CASE("weighted_distance") {
    FeatureWeights unit{{1.0, 1.0}};
    std::vector<double> x{1.0, 2.0}, origin{0.0, 0.0};
    CHECK(weighted_distance(x, origin, unit) == 5.0);

    FeatureWeights zero{{0.0, 0.0}};
    CHECK(weighted_distance(x, origin, zero) == 0.0);

    FeatureWeights skew{{2.0, 1.0}};
    CHECK(weighted_distance(x, origin, skew) == 6.0);  // 2*1 + 1*4

    FeatureWeights three{{1.0, 1.0, 1.0}};
    CHECK_THROWS_AS(weighted_distance(x, origin, three), Error);
}

TEST_CASE("score reduces to weighted_distance for a single singleton subset") {
    auto data = make_dataset({{0.0, 0.0}, {1.0, 2.0}});
    auto model = manual_model(data, {{0}});
    FeatureWeights w{{1.0, 1.0}};
    CHECK(lesinn_score(model, data.row(1), w) == 5.0);
}

TEST_CASE("score is the mean of per-subset nearest distances") {
    // subsets {row1} and {row2} at squared distances 2 and 4 from the query
    auto data = make_dataset({{0.0, 0.0}, {1.0, 1.0}, {2.0, 0.0}});
    auto model = manual_model(data, {{1}, {2}});
    FeatureWeights w{{1.0, 1.0}};
    std::vector<double> query{0.0, 0.0};
    CHECK(lesinn_score(model, query, w) == 3.0);
}

TEST_CASE("query matching a member of every subset scores zero") {
    auto data = make_dataset({{1.0, 2.0}, {3.0, 4.0}, {1.0, 2.0}});
    auto model = manual_model(data, {{0, 1}, {0, 2}});
    FeatureWeights w{{1.0, 1.0}};
    std::vector<double> query{1.0, 2.0};
    CHECK(lesinn_score(model, query, w) == 0.0);

    // gradient of a zero-residual argmin is zero
    std::vector<double> grad(2, 1.0);
    CHECK(lesinn_score_and_gradient(model, query, w, grad) == 0.0);
    CHECK(grad == std::vector<double>{0.0, 0.0});
}

TEST_CASE("self-exclusion removes the trivial zero score") {
    auto data = make_dataset({{0.0, 0.0}, {1.0, 2.0}});
    auto model = manual_model(data, {{0, 1}});
    FeatureWeights w{{1.0, 1.0}};
    CHECK(lesinn_score(model, data.row(0), w, 0) == 5.0);
    CHECK(lesinn_score(model, data.row(0), w) == 0.0);  // no exclusion: row 0 matches itself
}

TEST_CASE("exclusion that empties a subset skips it in the mean") {
    auto data = make_dataset({{0.0, 0.0}, {1.0, 0.0}});
    auto model = manual_model(data, {{0}, {1}});
    FeatureWeights w{{1.0, 1.0}};
    // subset {0} is emptied when scoring row 0; only subset {1} contributes
    CHECK(lesinn_score(model, data.row(0), w, 0) == 1.0);
}

TEST_CASE("score_subset equals score under indicator weights") {
    auto data = random_dataset(40, 8, 5);
    auto model = build_lesinn(data, 10, 5, 21);

    SUBCASE("full feature set equals the unweighted score") {
        std::vector<std::uint32_t> all{0, 1, 2, 3, 4, 5, 6, 7};
        for (std::uint32_t i = 0; i < 10; ++i) {
            CHECK(lesinn_score_subset(model, data.row(i), all, i) ==
                  lesinn_score(model, data.row(i), FeatureWeights::ones(8), i));
        }
    }
    SUBCASE("randomized feature sets") {
        Rng rng(123);
        for (int trial = 0; trial < 40; ++trial) {
            std::vector<std::uint32_t> features;
            for (std::uint32_t k = 0; k < 8; ++k) {
                if (rng.uniform01() < 0.5) features.push_back(k);
            }
            if (features.empty()) features.push_back(static_cast<std::uint32_t>(rng.below(8)));
            const auto i = static_cast<std::uint32_t>(rng.below(40));
            const double via_subset = lesinn_score_subset(model, data.row(i), features, i);
            const double via_weights = lesinn_score(
                model, data.row(i), FeatureWeights::indicator(features, 8), i);
            CHECK(via_subset == via_weights);
        }
    }
    SUBCASE("empty feature set is rejected") {
        std::vector<std::uint32_t> none;
        CHECK_THROWS_AS(lesinn_score_subset(model, data.row(0), none, 0), Error);
    }
}

TEST_CASE("single-subset analytic gradient") {
    auto data = make_dataset({{0.0, 0.0}, {1.0, 2.0}});
    auto model = manual_model(data, {{0}});
    std::vector<double> grad(2);
    FeatureWeights w{{0.7, 0.3}};
    lesinn_score_and_gradient(model, data.row(1), w, grad);
    CHECK(grad[0] == 1.0);
    CHECK(grad[1] == 4.0);
}

TEST_CASE("score gradient matches central finite differences at stable points") {
    auto data = random_dataset(60, 6, 9);
    auto model = build_lesinn(data, 8, 5, 33);
    Rng rng(71);
    const double h = 1e-6;

    int checked = 0;
    for (int trial = 0; trial < 200 && checked < 25; ++trial) {
        const auto i = static_cast<std::uint32_t>(rng.below(60));
        FeatureWeights w{{}};
        for (int k = 0; k < 6; ++k) w.w.push_back(0.2 + 1.8 * rng.uniform01());

        std::vector<double> grad(6);
        lesinn_score_and_gradient(model, data.row(i), w, grad, i);

        // stability filter: the argmin handing out the gradient must not
        // switch inside the finite-difference stencil
        bool stable = true;
        std::vector<double> fd(6);
        for (int k = 0; k < 6 && stable; ++k) {
            FeatureWeights lo = w, hi = w;
            lo.w[k] -= h;
            hi.w[k] += h;
            std::vector<double> glo(6), ghi(6);
            const double slo = lesinn_score_and_gradient(model, data.row(i), lo, glo, i);
            const double shi = lesinn_score_and_gradient(model, data.row(i), hi, ghi, i);
            for (int q = 0; q < 6; ++q) {
                if (std::fabs(glo[q] - ghi[q]) > 1e-9) stable = false;  // residuals moved
            }
            fd[k] = (shi - slo) / (2.0 * h);
        }
        if (!stable) continue;
        ++checked;

        double num = 0.0, den = 0.0;
        for (int k = 0; k < 6; ++k) {
            num += (fd[k] - grad[k]) * (fd[k] - grad[k]);
            den += fd[k] * fd[k];
        }
        CHECK(std::sqrt(num) <= 1e-5 * std::max(std::sqrt(den), 1e-12));
    }
    CHECK(checked >= 25);
}

TEST_CASE("score is monotone in the weights") {
    auto data = random_dataset(50, 5, 13);
    auto model = build_lesinn(data, 10, 6, 17);
    Rng rng(301);
    for (int trial = 0; trial < 50; ++trial) {
        const auto i = static_cast<std::uint32_t>(rng.below(50));
        FeatureWeights w{{}};
        for (int k = 0; k < 5; ++k) w.w.push_back(rng.uniform01());
        const double base = lesinn_score(model, data.row(i), w, i);
        const auto k = static_cast<std::size_t>(rng.below(5));
        FeatureWeights bumped = w;
        bumped.w[k] += 0.5;
        CHECK(lesinn_score(model, data.row(i), bumped, i) >= base - 1e-12);
    }
}

TEST_CASE("score is linear in w for a fixed single neighbor") {
    auto data = make_dataset({{0.0, 0.0, 0.0}, {1.0, 2.0, 3.0}});
    auto model = manual_model(data, {{0}});
    FeatureWeights w1{{0.3, 0.5, 0.1}}, w2{{0.2, 0.1, 0.9}};
    FeatureWeights sum{{0.5, 0.6, 1.0}};
    const double s1 = lesinn_score(model, data.row(1), w1);
    const double s2 = lesinn_score(model, data.row(1), w2);
    const double s12 = lesinn_score(model, data.row(1), sum);
    CHECK(s12 == doctest::Approx(s1 + s2).epsilon(1e-12));
}

TEST_CASE("optimized score_all paths agree with the reference implementation") {
    auto data = random_dataset(120, 9, 19);
    auto model = build_lesinn(data, 12, 6, 5);
    FeatureWeights w{{}};
    Rng rng(55);
    for (int k = 0; k < 9; ++k) w.w.push_back(rng.uniform01() * 2.0);

    auto reference = lesinn_score_all_reference(model, data, w);
    auto serial = lesinn_score_all(model, data, w, 1);
    auto parallel = lesinn_score_all(model, data, w, 0);

    REQUIRE(reference.size() == serial.size());
    for (std::size_t i = 0; i < reference.size(); ++i) {
        CHECK(std::fabs(serial[i] - reference[i]) <= 1e-12);
    }
    CHECK(serial == parallel);  // thread count must not change results

    // packed subset path vs indicator weights
    std::vector<std::uint32_t> features{0, 2, 3, 7};
    auto packed = lesinn_score_all_subset(model, data, features, 0);
    auto indicator = lesinn_score_all(model, data, FeatureWeights::indicator(features, 9), 1);
    for (std::size_t i = 0; i < packed.size(); ++i) {
        CHECK(std::fabs(packed[i] - indicator[i]) <= 1e-12);
    }
}
