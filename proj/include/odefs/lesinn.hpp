#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "odefs/dataset.hpp"
#include "odefs/scorer.hpp"

namespace odefs {

/// LeSiNN ensemble structure: c random subsets of object indices, each of
/// exactly subsample_size distinct members. Member rows are gathered into a
/// contiguous buffer at build time so the scoring kernels stream cache-local
/// data. Immutable after build.
struct LesinnModel {
    std::size_t subsample_size = 0;
    std::size_t dims = 0;
    std::uint64_t seed = 0;
    std::vector<std::vector<std::uint32_t>> subsets;  // sorted ascending within a subset
    std::vector<std::uint32_t> member_index;          // flattened subsets
    std::vector<double> member_rows;                  // gathered rows, subset-major

    std::size_t subset_count() const { return subsets.size(); }
};

struct LesinnParams {
    std::size_t subsets = 50;        // c
    std::size_t subsample_size = 8;  // objects per subset
};

LesinnModel build_lesinn(const Dataset& data, std::size_t subsets, std::size_t subsample_size,
                         std::uint64_t seed);

/// dist(x, y, w) = sum_k w_k (x_k - y_k)^2. Throws on dimension mismatch.
double weighted_distance(std::span<const double> x, std::span<const double> y,
                         const FeatureWeights& w);

constexpr std::uint32_t kNoExclusion = 0xffffffffu;

/// Mean over subsets of the nearest weighted distance from x to the subset.
/// exclude names an object index whose occurrences are skipped (pass the
/// object's own index when scoring a dataset row); subsets emptied by the
/// exclusion do not contribute to the mean.
double lesinn_score(const LesinnModel& model, std::span<const double> x, const FeatureWeights& w,
                    std::uint32_t exclude = kNoExclusion);

/// Score under the 0/1 indicator weights of a feature subset.
double lesinn_score_subset(const LesinnModel& model, std::span<const double> x,
                           std::span<const std::uint32_t> features,
                           std::uint32_t exclude = kNoExclusion);

/// Subgradient of lesinn_score wrt w: nearest neighbors are fixed at the
/// current w (ties broken by lowest object index), giving the per-feature
/// mean squared residual (1/c) sum_i (x - y*_i)^2. Exact gradient wherever
/// every argmin is unique. Returns the score.
double lesinn_score_and_gradient(const LesinnModel& model, std::span<const double> x,
                                 const FeatureWeights& w, std::span<double> grad_out,
                                 std::uint32_t exclude = kNoExclusion);

/// Score that also records, per subset, the member slot of the nearest
/// neighbor (-1 when the exclusion empties the subset). Lets callers reuse
/// the neighbor assignment instead of re-searching.
double lesinn_score_with_argmins(const LesinnModel& model, std::span<const double> x,
                                 const FeatureWeights& w, std::uint32_t exclude,
                                 std::span<std::int32_t> argmins);

/// The fixed-neighbor subgradient given recorded argmin slots.
void lesinn_gradient_from_argmins(const LesinnModel& model, std::span<const double> x,
                                  std::span<const std::int32_t> argmins,
                                  std::span<double> grad_out);

/// Scores every dataset row (self-excluded). threads: 0 = all available,
/// 1 = serial; results are identical for any thread count.
std::vector<double> lesinn_score_all(const LesinnModel& model, const Dataset& data,
                                     const FeatureWeights& w, int threads = 0);

/// Indicator-weight scoring of every row, specialized to iterate only the
/// selected feature columns.
std::vector<double> lesinn_score_all_subset(const LesinnModel& model, const Dataset& data,
                                            std::span<const std::uint32_t> features,
                                            int threads = 0);

/// Naive single-threaded implementation kept as the reference the optimized
/// kernels are tested and benchmarked against.
std::vector<double> lesinn_score_all_reference(const LesinnModel& model, const Dataset& data,
                                               const FeatureWeights& w);

/// Scorer adapter over one model/dataset pair.
class LesinnScorer final : public Scorer {
public:
    LesinnScorer(const LesinnModel& model, const Dataset& data) : model_(model), data_(data) {}

    std::size_t object_count() const override { return data_.rows; }
    std::size_t feature_count() const override { return data_.cols; }

    double object_score(std::uint32_t index, const FeatureWeights& w) const override {
        return lesinn_score(model_, data_.row(index), w, index);
    }

    double object_score_and_gradient(std::uint32_t index, const FeatureWeights& w,
                                     std::span<double> grad_out) const override {
        return lesinn_score_and_gradient(model_, data_.row(index), w, grad_out, index);
    }

    const LesinnModel& model() const { return model_; }
    const Dataset& data() const { return data_; }

private:
    const LesinnModel& model_;
    const Dataset& data_;
};

}  // namespace odefs
