#include "odefs/lesinn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "odefs/errors.hpp"
#include "odefs/parallel.hpp"
#include "odefs/rng.hpp"

namespace odefs {

namespace {

// Two independent four-lane accumulators keep the FMA pipeline busy;
// summation order is fixed so results do not depend on thread count or
// call site.
double weighted_sq_dist(const double* x, const double* y, const double* w, std::size_t d) {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    double b0 = 0.0, b1 = 0.0, b2 = 0.0, b3 = 0.0;
    std::size_t k = 0;
    for (; k + 8 <= d; k += 8) {
        double t0 = x[k] - y[k];
        double t1 = x[k + 1] - y[k + 1];
        double t2 = x[k + 2] - y[k + 2];
        double t3 = x[k + 3] - y[k + 3];
        double t4 = x[k + 4] - y[k + 4];
        double t5 = x[k + 5] - y[k + 5];
        double t6 = x[k + 6] - y[k + 6];
        double t7 = x[k + 7] - y[k + 7];
        a0 += w[k] * t0 * t0;
        a1 += w[k + 1] * t1 * t1;
        a2 += w[k + 2] * t2 * t2;
        a3 += w[k + 3] * t3 * t3;
        b0 += w[k + 4] * t4 * t4;
        b1 += w[k + 5] * t5 * t5;
        b2 += w[k + 6] * t6 * t6;
        b3 += w[k + 7] * t7 * t7;
    }
    for (; k < d; ++k) {
        double t = x[k] - y[k];
        a0 += w[k] * t * t;
    }
    return ((a0 + b0) + (a1 + b1)) + ((a2 + b2) + (a3 + b3));
}

double plain_sq_dist(const double* x, const double* y, std::size_t d) {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    double b0 = 0.0, b1 = 0.0, b2 = 0.0, b3 = 0.0;
    std::size_t k = 0;
    for (; k + 8 <= d; k += 8) {
        double t0 = x[k] - y[k];
        double t1 = x[k + 1] - y[k + 1];
        double t2 = x[k + 2] - y[k + 2];
        double t3 = x[k + 3] - y[k + 3];
        double t4 = x[k + 4] - y[k + 4];
        double t5 = x[k + 5] - y[k + 5];
        double t6 = x[k + 6] - y[k + 6];
        double t7 = x[k + 7] - y[k + 7];
        a0 += t0 * t0;
        a1 += t1 * t1;
        a2 += t2 * t2;
        a3 += t3 * t3;
        b0 += t4 * t4;
        b1 += t5 * t5;
        b2 += t6 * t6;
        b3 += t7 * t7;
    }
    for (; k < d; ++k) {
        double t = x[k] - y[k];
        a0 += t * t;
    }
    return ((a0 + b0) + (a1 + b1)) + ((a2 + b2) + (a3 + b3));
}

void check_weights(const LesinnModel& model, const FeatureWeights& w) {
    if (w.size() != model.dims) {
        throw Error(ErrorCode::config, "feature weight length " + std::to_string(w.size()) +
                                           " does not match data dimension " +
                                           std::to_string(model.dims));
    }
}

}  // namespace

FeatureWeights FeatureWeights::indicator(std::span<const std::uint32_t> features, std::size_t d) {
    FeatureWeights out = FeatureWeights::zeros(d);
    for (auto f : features) out.w.at(f) = 1.0;
    return out;
}

LesinnModel build_lesinn(const Dataset& data, std::size_t subsets, std::size_t subsample_size,
                         std::uint64_t seed) {
    if (subsets < 1) throw Error(ErrorCode::config, "lesinn: need at least one subset");
    if (subsample_size < 1 || subsample_size > data.rows) {
        throw Error(ErrorCode::config, "lesinn: subsample_size " + std::to_string(subsample_size) +
                                           " must be in [1, n=" + std::to_string(data.rows) + "]");
    }

    LesinnModel model;
    model.subsample_size = subsample_size;
    model.dims = data.cols;
    model.seed = seed;
    model.subsets.reserve(subsets);
    model.member_index.reserve(subsets * subsample_size);
    model.member_rows.reserve(subsets * subsample_size * data.cols);

    Rng rng(seed);
    for (std::size_t s = 0; s < subsets; ++s) {
        auto members = rng.sample_without_replacement(static_cast<std::uint32_t>(data.rows),
                                                      static_cast<std::uint32_t>(subsample_size));
        std::sort(members.begin(), members.end());
        for (auto idx : members) {
            model.member_index.push_back(idx);
            auto r = data.row(idx);
            model.member_rows.insert(model.member_rows.end(), r.begin(), r.end());
        }
        model.subsets.push_back(std::move(members));
    }
    return model;
}

double weighted_distance(std::span<const double> x, std::span<const double> y,
                         const FeatureWeights& w) {
    if (x.size() != y.size() || x.size() != w.size()) {
        throw Error(ErrorCode::config, "weighted_distance: dimension mismatch");
    }
    return weighted_sq_dist(x.data(), y.data(), w.w.data(), x.size());
}

// Canonical score kernel. Kept out of line so every caller computes
// bit-identical values regardless of surrounding code. When argmins is
// non-null it receives, per subset, the member slot of the nearest
// neighbor (-1 for a subset emptied by the exclusion).
[[gnu::noinline]] double lesinn_score_core(const LesinnModel& model, const double* xp,
                                           const double* wp, std::uint32_t exclude,
                                           std::int32_t* argmins) {
    const std::size_t c = model.subset_count();
    const std::size_t s = model.subsample_size;
    const std::size_t d = model.dims;

    double total = 0.0;
    std::size_t used = 0;
    for (std::size_t si = 0; si < c; ++si) {
        const std::uint32_t* idx = model.member_index.data() + si * s;
        const double* rows = model.member_rows.data() + si * s * d;
        double best = std::numeric_limits<double>::infinity();
        std::int32_t best_slot = -1;
        for (std::size_t j = 0; j < s; ++j) {
            if (idx[j] == exclude) continue;
            double dist = weighted_sq_dist(xp, rows + j * d, wp, d);
            // strict <: members are sorted, so ties keep the lowest index
            if (dist < best) {
                best = dist;
                best_slot = static_cast<std::int32_t>(j);
            }
        }
        if (best_slot >= 0) {
            total += best;
            ++used;
        }
        if (argmins) argmins[si] = best_slot;
    }
    return used ? total / static_cast<double>(used) : 0.0;
}

double lesinn_score_with_argmins(const LesinnModel& model, std::span<const double> x,
                                 const FeatureWeights& w, std::uint32_t exclude,
                                 std::span<std::int32_t> argmins) {
    check_weights(model, w);
    if (argmins.size() != model.subset_count()) {
        throw Error(ErrorCode::config, "argmin buffer size mismatch");
    }
    return lesinn_score_core(model, x.data(), w.w.data(), exclude, argmins.data());
}

void lesinn_gradient_from_argmins(const LesinnModel& model, std::span<const double> x,
                                  std::span<const std::int32_t> argmins,
                                  std::span<double> grad_out) {
    const std::size_t c = model.subset_count();
    const std::size_t s = model.subsample_size;
    const std::size_t d = model.dims;
    if (argmins.size() != c || grad_out.size() != d) {
        throw Error(ErrorCode::config, "gradient buffer size mismatch");
    }
    std::fill(grad_out.begin(), grad_out.end(), 0.0);
    const double* xp = x.data();
    std::size_t used = 0;
    for (std::size_t si = 0; si < c; ++si) {
        if (argmins[si] < 0) continue;
        const double* y = model.member_rows.data() +
                          (si * s + static_cast<std::size_t>(argmins[si])) * d;
        for (std::size_t k = 0; k < d; ++k) {
            double t = xp[k] - y[k];
            grad_out[k] += t * t;
        }
        ++used;
    }
    if (used) {
        const double inv = 1.0 / static_cast<double>(used);
        for (std::size_t k = 0; k < d; ++k) grad_out[k] *= inv;
    }
}

double lesinn_score(const LesinnModel& model, std::span<const double> x, const FeatureWeights& w,
                    std::uint32_t exclude) {
    check_weights(model, w);
    return lesinn_score_core(model, x.data(), w.w.data(), exclude, nullptr);
}

double lesinn_score_and_gradient(const LesinnModel& model, std::span<const double> x,
                                 const FeatureWeights& w, std::span<double> grad_out,
                                 std::uint32_t exclude) {
    check_weights(model, w);
    if (grad_out.size() != model.dims) {
        throw Error(ErrorCode::config, "gradient buffer size mismatch");
    }
    std::vector<std::int32_t> argmins(model.subset_count());
    double score = lesinn_score_core(model, x.data(), w.w.data(), exclude, argmins.data());
    lesinn_gradient_from_argmins(model, x, argmins, grad_out);
    return score;
}

double lesinn_score_subset(const LesinnModel& model, std::span<const double> x,
                           std::span<const std::uint32_t> features, std::uint32_t exclude) {
    if (features.empty()) throw Error(ErrorCode::config, "score_subset: empty feature set");
    for (auto f : features) {
        if (f >= model.dims) throw Error(ErrorCode::config, "score_subset: feature index out of range");
    }
    return lesinn_score(model, x, FeatureWeights::indicator(features, model.dims), exclude);
}

std::vector<double> lesinn_score_all(const LesinnModel& model, const Dataset& data,
                                     const FeatureWeights& w, int threads) {
    check_weights(model, w);
    const std::int64_t n = static_cast<std::int64_t>(data.rows);
    std::vector<double> out(data.rows);
    const int t = resolve_threads(threads);
#pragma omp parallel for schedule(static) num_threads(t)
    for (std::int64_t i = 0; i < n; ++i) {
        out[i] = lesinn_score(model, data.row(static_cast<std::size_t>(i)), w,
                              static_cast<std::uint32_t>(i));
    }
    return out;
}

std::vector<double> lesinn_score_all_subset(const LesinnModel& model, const Dataset& data,
                                            std::span<const std::uint32_t> features, int threads) {
    if (features.empty()) throw Error(ErrorCode::config, "score_subset: empty feature set");
    for (auto f : features) {
        if (f >= model.dims) throw Error(ErrorCode::config, "score_subset: feature index out of range");
    }
    const std::size_t n = data.rows;
    const std::size_t dsub = features.size();
    const std::size_t c = model.subset_count();
    const std::size_t s = model.subsample_size;

    // Pack the selected columns once; the inner kernel then runs unit-stride.
    std::vector<double> packed_data(n * dsub);
    for (std::size_t i = 0; i < n; ++i) {
        const double* src = data.values.data() + i * data.cols;
        double* dst = packed_data.data() + i * dsub;
        for (std::size_t k = 0; k < dsub; ++k) dst[k] = src[features[k]];
    }
    std::vector<double> packed_members(c * s * dsub);
    for (std::size_t j = 0; j < c * s; ++j) {
        const double* src = model.member_rows.data() + j * model.dims;
        double* dst = packed_members.data() + j * dsub;
        for (std::size_t k = 0; k < dsub; ++k) dst[k] = src[features[k]];
    }

    std::vector<double> out(n);
    const int t = resolve_threads(threads);
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) num_threads(t)
    for (std::int64_t i = 0; i < nn; ++i) {
        const double* x = packed_data.data() + static_cast<std::size_t>(i) * dsub;
        const auto self = static_cast<std::uint32_t>(i);
        double total = 0.0;
        std::size_t used = 0;
        for (std::size_t si = 0; si < c; ++si) {
            const std::uint32_t* idx = model.member_index.data() + si * s;
            const double* rows = packed_members.data() + si * s * dsub;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < s; ++j) {
                if (idx[j] == self) continue;
                double dist = plain_sq_dist(x, rows + j * dsub, dsub);
                if (dist < best) best = dist;
            }
            if (best != std::numeric_limits<double>::infinity()) {
                total += best;
                ++used;
            }
        }
        out[i] = used ? total / static_cast<double>(used) : 0.0;
    }
    return out;
}

std::vector<double> lesinn_score_all_reference(const LesinnModel& model, const Dataset& data,
                                               const FeatureWeights& w) {
    std::vector<double> out(data.rows);
    for (std::size_t i = 0; i < data.rows; ++i) {
        auto x = data.row(i);
        double total = 0.0;
        std::size_t used = 0;
        for (const auto& subset : model.subsets) {
            double best = std::numeric_limits<double>::infinity();
            for (auto member : subset) {
                if (member == i) continue;
                auto y = data.row(member);
                double dist = 0.0;
                for (std::size_t k = 0; k < data.cols; ++k) {
                    const double t = x[k] - y[k];
                    dist += w.w[k] * t * t;
                }
                if (dist < best) best = dist;
            }
            if (best != std::numeric_limits<double>::infinity()) {
                total += best;
                ++used;
            }
        }
        out[i] = used ? total / static_cast<double>(used) : 0.0;
    }
    return out;
}

}  // namespace odefs
