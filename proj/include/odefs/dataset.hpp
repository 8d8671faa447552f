#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace odefs {

/// In-memory numeric dataset: row-major n x d matrix, feature names, and
/// optional binary ground-truth labels (1 = outlier). Labels are only ever
/// read by evaluation and synthesis code, never by the detector itself.
/// Immutable after construction by convention; safe to share across threads.
struct Dataset {
    std::vector<double> values;  // row-major, rows * cols entries
    std::vector<std::string> feature_names;
    std::vector<std::uint8_t> labels;  // empty when unlabeled
    std::size_t rows = 0;
    std::size_t cols = 0;

    bool has_labels() const { return !labels.empty(); }

    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * cols, cols};
    }

    /// Throws Error(config) when any structural invariant is broken
    /// (n >= 2, d >= 1, finite values, binary labels of length n).
    void validate() const;
};

struct NormalizationParams {
    std::vector<double> min;
    std::vector<double> max;
};

/// Noisy-Gaussian benchmark family: the first d_relevant features separate
/// outliers (mean outlier_mean) from inliers (mean inlier_mean); remaining
/// features are pure noise drawn from the inlier distribution for every row.
struct SyntheticSpec {
    std::size_t n = 10000;
    std::size_t d = 100;
    std::size_t d_relevant = 20;
    double outlier_fraction = 0.02;
    double inlier_mean = 1.0;
    double outlier_mean = 1.2;
    double stddev = 0.2;
    std::uint64_t seed = 1;

    std::size_t outlier_count() const;
    void validate() const;
};

/// Reads a comma-separated file with a mandatory header row. When
/// label_column names a header, that column is removed from the values and
/// stored as labels (cells must be exactly 0 or 1). Cell errors report the
/// 1-based data row and the column name.
Dataset load_csv(const std::filesystem::path& path,
                 const std::optional<std::string>& label_column = std::nullopt);

/// Writes the dataset in the same format load_csv reads; when labels are
/// present they form a trailing column (default name "label").
void write_csv(const Dataset& data, const std::filesystem::path& path,
               const std::string& label_name = "label");

/// Maps each feature to [0,1] via (x - min) / (max - min); constant features
/// map to all zeros. Idempotent on already-normalized data.
std::pair<Dataset, NormalizationParams> minmax_normalize(const Dataset& data);

Dataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace odefs
