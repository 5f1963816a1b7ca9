#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "weaklab/classifier.hpp"
#include "weaklab/corpus_io.hpp"
#include "weaklab/embedding.hpp"

namespace weaklab {

/// Row-major list of per-document distributions.
using Matrix = std::vector<Vector>;

struct SelfTrainConfig {
    std::size_t batch_size = 128;
    std::size_t update_interval = 50;
    std::size_t passes = 1;
    double learning_rate = 0.1;  // cosine-decayed over all self-training steps
    std::uint64_t seed = 0;
    bool record_step_losses = false;

    std::size_t portion_size() const noexcept { return batch_size * update_interval; }
};

/// Squares each prediction, divides by its column mass and renormalizes rows:
///   q_ij = (p_ij^2 / f_j) / sum_j' (p_ij'^2 / f_j'),  f_j = sum_i p_ij.
/// Throws InvariantError when a column carries zero mass.
Matrix soft_targets(const Matrix& predictions);

/// Sigmoid-head variant: the same sharpening applied to each class's
/// Bernoulli pair (p, 1-p), with column masses sum_i p_ij and sum_i (1-p_ij).
Matrix soft_targets_bernoulli(const Matrix& predictions);

/// sum_i sum_j q_ij log(q_ij / p_ij), with 0 log 0 = 0. Throws
/// InvariantError when q > 0 where p = 0.
double kl_divergence(const Matrix& targets, const Matrix& predictions);

/// Sum over rows and classes of KL between Bernoulli(q_ij) and Bernoulli(p_ij).
double bernoulli_kl_divergence(const Matrix& targets, const Matrix& predictions);

struct PortionLoss {
    std::size_t portion = 0;  // counts across passes
    double kl_before = 0.0;
    double kl_after = 0.0;
    std::vector<double> step_losses;  // portion KL after each step, when recorded
};

struct SelfTrainResult {
    std::vector<PortionLoss> trace;
};

/// Splits the (once-shuffled) corpus into portions of batch_size *
/// update_interval documents. Per portion: predict P, freeze Q =
/// soft_targets(P), take update_interval mini-batch steps towards Q.
/// Refines `model` in place.
SelfTrainResult self_train(TrainableClassifier& model, std::span<const Vector> features,
                           const SelfTrainConfig& config);

SelfTrainResult self_train(TrainableClassifier& model, const Dataset& corpus, EmbeddingProvider& provider,
                           const SelfTrainConfig& config);

/// Matrix of predict_proba rows.
Matrix predict_matrix(const TrainableClassifier& model, std::span<const Vector> features);

/// CSV: portion_index,kl_loss_before,kl_loss_after
void write_loss_trace(std::ostream& out, const std::vector<PortionLoss>& trace);

}  // namespace weaklab
