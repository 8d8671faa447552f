#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "odefs/scorer.hpp"

namespace odefs {

/// One component's sampled examples: outlier examples are candidate-set
/// indices (may repeat when the candidate pool is smaller than m_star),
/// unlabeled examples are drawn from the whole dataset.
struct TrainingBatch {
    std::vector<std::uint32_t> outlier_examples;    // size m_star
    std::vector<std::uint32_t> unlabeled_examples;  // size m
};

struct TrainOptions {
    double theta = 1e-4;                // L1 coefficient
    std::size_t max_outer_iterations = 50;
    double outer_tolerance = 1e-6;      // relative objective change
    std::size_t inner_max_steps = 200;  // projected-gradient steps per w update
    double inner_initial_step = 0.1;
    double inner_tolerance = 1e-8;      // relative improvement early stop
    std::uint64_t seed = 0;             // reserved for stochastic w optimizers
};

struct TraceRow {
    std::size_t iteration = 0;
    double lambda = 0.0;
    std::size_t selected = 0;
    double objective = 0.0;
};

/// Per-component training result. objective_history holds the objective at
/// all three checkpoints of every outer iteration (after the lambda, v and w
/// updates, in that order); the sequence is non-increasing and > -2.
struct ComponentState {
    FeatureWeights w;
    std::vector<std::uint8_t> v;  // binary example weights
    double lambda = 0.0;
    std::size_t iterations = 0;
    std::vector<double> objective_history;
    double final_loss = 0.0;
    std::vector<TraceRow> trace;
};

/// Pairwise logistic ranking loss of one outlier example (position i in the
/// batch): mean over unlabeled examples of 1/(1+exp(s*_i - s_j)). Strictly in
/// (0,1); computed with an overflow-safe sigmoid.
double example_loss(std::size_t i, const FeatureWeights& w, const TrainingBatch& batch,
                    const Scorer& scorer);

/// Losses of all outlier examples under one set of weights.
std::vector<double> batch_losses(const FeatureWeights& w, const TrainingBatch& batch,
                                 const Scorer& scorer);

/// Self-paced objective: (1/m_star) sum_i v_i (L_i - lambda) + theta*||w||_1.
/// This is the one canonical evaluation every trainer code path compares,
/// which keeps recorded objective histories monotone at the bit level.
double objective_value(const FeatureWeights& w, std::span<const std::uint8_t> v, double lambda,
                       double theta, const TrainingBatch& batch, const Scorer& scorer);

/// Smooth part of the objective, (1/m_star) sum_i v_i L_i; the quantity whose
/// gradient optimize_w follows (useful for finite-difference checks).
double ranking_loss_value(const FeatureWeights& w, std::span<const std::uint8_t> v,
                          const TrainingBatch& batch, const Scorer& scorer);

/// Gradient of ranking_loss_value through the logistic surrogate and the
/// scorer's fixed-neighbor subgradient.
std::vector<double> ranking_loss_gradient(const FeatureWeights& w,
                                          std::span<const std::uint8_t> v,
                                          const TrainingBatch& batch, const Scorer& scorer);

/// In-batch ranking statistic: fraction of (outlier, unlabeled) pairs where
/// the outlier example scores at least as high. Diagnostic only.
double empirical_j_star(const FeatureWeights& w, const TrainingBatch& batch,
                        const Scorer& scorer);

/// Age parameter schedule: mu+sigma of the current losses on the first
/// iteration, afterwards the max with the previous lambda (never decreases).
double update_lambda(std::optional<double> previous_lambda, std::span<const double> losses);

/// Closed-form example selection: v_i = 1 iff L_i < lambda (strict).
std::vector<std::uint8_t> update_v(std::span<const double> losses, double lambda);

/// Projected gradient descent with backtracking line search on
/// (1/m_star) sum_i v_i L_i + theta*||w||_1 over the non-negative orthant.
/// Guaranteed not to increase the objective; returns w_init unchanged when no
/// example is selected. lambda only offsets the objective by a constant
/// (-lambda * sum v / m_star) so that acceptance tests compare the exact
/// self-paced objective value.
FeatureWeights optimize_w(const FeatureWeights& w_init, std::span<const std::uint8_t> v,
                          double theta, const TrainingBatch& batch, const Scorer& scorer,
                          const TrainOptions& opts, double lambda = 0.0);

/// Initial weights: optimize_w from the all-ones vector with every example
/// selected.
FeatureWeights init_w0(const TrainingBatch& batch, double theta, const Scorer& scorer,
                       const TrainOptions& opts);

/// Alternating loop: lambda update, closed-form v update, w update, until the
/// relative objective change drops below outer_tolerance or the iteration cap.
ComponentState train_component(const TrainingBatch& batch, const Scorer& scorer,
                               const TrainOptions& opts);

}  // namespace odefs
