#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "odefs/experiments.hpp"
#include "odefs/errors.hpp"

using namespace odefs;

namespace {

SyntheticSpec tiny_spec() {
    SyntheticSpec spec;
    spec.n = 220;
    spec.d = 10;
    spec.d_relevant = 4;
    spec.outlier_fraction = 0.05;
    return spec;
}

OdefsParams tiny_params(std::uint64_t seed) {
    OdefsParams params;
    params.seed = seed;
    params.m_star = 6;
    params.unlabeled_ratio = 4;
    params.lesinn.subsets = 12;
    params.lesinn.subsample_size = 6;
    params.train.inner_max_steps = 40;
    return params;
}

std::size_t count_lines(const std::filesystem::path& path) {
    std::ifstream f(path);
    std::string line;
    std::size_t count = 0;
    while (std::getline(f, line)) ++count;
    return count;
}

}  // namespace

TEST_CASE("degenerate single-row sweep") {
    auto result = sweep_unlabeled_ratio(tiny_spec(), tiny_params(3), {4}, 1, 1);
    REQUIRE(result.rows.size() == 1);
    CHECK(result.rows[0].param == 4.0);
    CHECK(result.rows[0].repeats == 1);
    CHECK(result.runs.size() == 1);
    CHECK(result.rows[0].mean_auc >= 0.0);
    CHECK(result.rows[0].mean_auc <= 1.0);
    CHECK(result.rows[0].mean_runtime_s > 0.0);
}

TEST_CASE("sweep outputs are deterministic given the seed ladder") {
    auto a = sweep_unlabeled_ratio(tiny_spec(), tiny_params(11), {2, 4}, 2, 1);
    auto b = sweep_unlabeled_ratio(tiny_spec(), tiny_params(11), {2, 4}, 2, 2);
    REQUIRE(a.runs.size() == b.runs.size());
    for (std::size_t i = 0; i < a.runs.size(); ++i) {
        CHECK(a.runs[i].auc_odefs == b.runs[i].auc_odefs);
        CHECK(a.runs[i].seed == b.runs[i].seed);
    }
}

TEST_CASE("noise_resilience pairs odefs with the bare baseline") {
    auto result = noise_resilience(tiny_spec(), tiny_params(5), {0.3, 1.0}, 2, 2);
    REQUIRE(result.rows.size() == 2);
    for (const auto& row : result.rows) {
        CHECK(!std::isnan(row.mean_auc));
        CHECK(!std::isnan(row.mean_auc_bare));
        CHECK(!std::isnan(row.mean_selected_relevant_frac));
        CHECK(row.mean_selected_count >= 1.0);
    }
    // with every feature relevant the recovery fraction is exactly 1
    CHECK(result.rows[1].mean_selected_relevant_frac == 1.0);
    CHECK_THROWS_AS(noise_resilience(tiny_spec(), tiny_params(5), {0.0}, 1, 1), Error);
}

TEST_CASE("scalability records one timing row per size") {
    auto result = scalability(tiny_params(9), {{150, 8}, {300, 8}}, 1, 1);
    REQUIRE(result.rows.size() == 2);
    CHECK(result.param_name == "n");
    CHECK(result.rows[0].n == 150);
    CHECK(result.rows[1].n == 300);
    for (const auto& row : result.rows) CHECK(row.mean_runtime_s > 0.0);
}

TEST_CASE("csv writers emit one line per run plus aggregates") {
    auto result = noise_resilience(tiny_spec(), tiny_params(7), {0.5}, 3, 2);
    auto dir = std::filesystem::temp_directory_path() / "odefs_tests";
    std::filesystem::create_directories(dir);

    write_runs_csv(result, dir / "runs.csv");
    write_aggregate_csv(result, dir / "agg.csv");
    CHECK(count_lines(dir / "runs.csv") == 1 + 3);
    CHECK(count_lines(dir / "agg.csv") == 1 + 1);

    std::ifstream f(dir / "runs.csv");
    std::string header;
    std::getline(f, header);
    CHECK(header.find("relevant_fraction") == 0);
    CHECK(header.find("auc_bare") != std::string::npos);
}
