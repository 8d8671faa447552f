#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "odefs/dataset.hpp"
#include "odefs/ensemble.hpp"

namespace odefs {

/// One detector run inside a sweep. Fields that do not apply to a given
/// experiment stay NaN and are left blank in the CSV output.
struct RunRecord {
    double param = 0.0;
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t repeat = 0;
    std::uint64_t seed = 0;
    double auc_odefs = std::numeric_limits<double>::quiet_NaN();
    double auc_bare = std::numeric_limits<double>::quiet_NaN();
    double runtime_s = std::numeric_limits<double>::quiet_NaN();
    double selected_relevant_frac = std::numeric_limits<double>::quiet_NaN();
    double selected_count = std::numeric_limits<double>::quiet_NaN();
};

struct SweepRow {
    double param = 0.0;
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t repeats = 0;
    double mean_auc = std::numeric_limits<double>::quiet_NaN();
    double std_auc = std::numeric_limits<double>::quiet_NaN();
    double mean_auc_bare = std::numeric_limits<double>::quiet_NaN();
    double std_auc_bare = std::numeric_limits<double>::quiet_NaN();
    double mean_runtime_s = std::numeric_limits<double>::quiet_NaN();
    double mean_selected_relevant_frac = std::numeric_limits<double>::quiet_NaN();
    double mean_selected_count = std::numeric_limits<double>::quiet_NaN();
};

struct SweepResult {
    std::string param_name;
    std::vector<SweepRow> rows;    // sorted by parameter value
    std::vector<RunRecord> runs;   // every individual run, row-major
};

/// Unlabeled-example budget sweep: for each ratio r, ODEFS runs with
/// m = r * m_star on freshly seeded synthetic data. Detector runs are timed
/// single-threaded; `workers` fans independent repeats out across threads.
SweepResult sweep_unlabeled_ratio(const SyntheticSpec& spec, const OdefsParams& params,
                                  const std::vector<std::size_t>& ratios, std::size_t repeats,
                                  std::size_t workers = 1);

/// Noise-resilience curve: for each relevant-feature fraction, d_relevant =
/// round(fraction * d); ODEFS and the bare baseline are evaluated on the same
/// datasets, and feature-recovery statistics are collected per component.
SweepResult noise_resilience(const SyntheticSpec& base_spec, const OdefsParams& params,
                             const std::vector<double>& relevant_fractions, std::size_t repeats,
                             std::size_t workers = 1);

/// Wall-clock scaling over (n, d) configurations (20% relevant features).
SweepResult scalability(const OdefsParams& params,
                        const std::vector<std::pair<std::size_t, std::size_t>>& sizes,
                        std::size_t repeats, std::size_t workers = 1);

void write_runs_csv(const SweepResult& result, const std::filesystem::path& path);
void write_aggregate_csv(const SweepResult& result, const std::filesystem::path& path);

}  // namespace odefs
