#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "weaklab/corpus_io.hpp"
#include "weaklab/embedding.hpp"

namespace weaklab {

/// Softmax for single-label tasks, independent sigmoids for multi-label.
enum class OutputMode { Softmax, Sigmoid };

OutputMode output_mode_for(TaskMode mode);
std::string_view to_string(OutputMode mode);
OutputMode parse_output_mode(std::string_view text);

struct ProbabilityDistribution {
    std::vector<double> values;
    OutputMode mode = OutputMode::Softmax;

    std::size_t argmax() const;
};

/// Stable softmax / sigmoid of a logit vector.
std::vector<double> softmax(std::span<const double> logits);
std::vector<double> sigmoid(std::span<const double> logits);

/// Per-example cross entropy of target q under logits z. Softmax:
/// -sum q log softmax(z). Sigmoid: sum of binary cross entropies.
double cross_entropy_from_logits(std::span<const double> logits, std::span<const double> target, OutputMode mode);

std::vector<double> one_hot(LabelId label, std::size_t n);
std::vector<double> multi_hot(std::span<const LabelId> labels, std::size_t n);

/// A classifier that maps a feature vector to class probabilities and can
/// take a gradient step against soft targets. Self-training only needs this.
class TrainableClassifier {
public:
    virtual ~TrainableClassifier() = default;

    virtual std::size_t label_count() const = 0;
    virtual std::size_t feature_dimension() const = 0;
    virtual OutputMode mode() const = 0;

    virtual ProbabilityDistribution predict_proba(std::span<const double> features) const = 0;

    /// Mean cross entropy of the batch against `targets`.
    virtual double loss(std::span<const Vector> features, std::span<const Vector> targets) const = 0;

    /// One descent step on the mean cross entropy of the batch. Returns the
    /// loss before the step.
    virtual double gradient_step(std::span<const Vector> features, std::span<const Vector> targets,
                                 double learning_rate) = 0;
};

struct LinearGradient {
    std::vector<double> weights;  // n x d, row-major
    std::vector<double> bias;     // n
};

/// p = act(W h + b). Parameters start at zero.
class LinearClassifier final : public TrainableClassifier {
public:
    LinearClassifier() = default;
    LinearClassifier(std::size_t labels, std::size_t dimension, OutputMode mode);

    std::size_t label_count() const override { return labels_; }
    std::size_t feature_dimension() const override { return dimension_; }
    OutputMode mode() const override { return mode_; }

    std::span<double> weights() noexcept { return weights_; }
    std::span<const double> weights() const noexcept { return weights_; }
    std::span<double> bias() noexcept { return bias_; }
    std::span<const double> bias() const noexcept { return bias_; }
    double& weight(LabelId label, std::size_t feature) { return weights_[label * dimension_ + feature]; }

    std::vector<double> logits(std::span<const double> features) const;
    ProbabilityDistribution predict_proba(std::span<const double> features) const override;
    double loss(std::span<const Vector> features, std::span<const Vector> targets) const override;
    double gradient_step(std::span<const Vector> features, std::span<const Vector> targets,
                         double learning_rate) override;

    /// Mean loss over the batch; fills `gradient` (same shape as W, b).
    double loss_and_gradient(std::span<const Vector> features, std::span<const Vector> targets,
                             LinearGradient& gradient) const;

    bool parameters_finite() const;

    friend bool operator==(const LinearClassifier& a, const LinearClassifier& b) {
        return a.labels_ == b.labels_ && a.dimension_ == b.dimension_ && a.mode_ == b.mode_ &&
               a.weights_ == b.weights_ && a.bias_ == b.bias_;
    }

private:
    void check_features(std::span<const double> features) const;

    std::size_t labels_ = 0;
    std::size_t dimension_ = 0;
    OutputMode mode_ = OutputMode::Softmax;
    std::vector<double> weights_;
    std::vector<double> bias_;
};

struct TrainingConfig {
    double learning_rate = 0.1;  // peak; cosine-decayed to 0 over all steps
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
};

/// lr * (1 + cos(pi * step / total_steps)) / 2
double cosine_decay(double base_learning_rate, std::size_t step, std::size_t total_steps);

struct TrainingResult {
    LinearClassifier model;
    std::vector<double> epoch_losses;  // full training-set mean loss after each epoch
};

/// Mini-batch gradient descent from zero parameters. Targets are
/// distributions (softmax) or per-class probabilities (sigmoid).
TrainingResult train(std::span<const Vector> features, std::span<const Vector> targets, std::size_t labels,
                     OutputMode mode, const TrainingConfig& config);

/// Labels with probability strictly above threshold. Sigmoid models only.
std::vector<LabelId> predict_multilabel(const TrainableClassifier& model, std::span<const double> features,
                                        double threshold = 0.5);

/// Hard decision for either head: argmax for softmax, thresholded set for
/// sigmoid.
std::vector<LabelId> predict_labels(const TrainableClassifier& model, std::span<const double> features,
                                    double threshold = 0.5);

/// Unit-norm embedding of the document's normalized text.
Vector featurize(const Document& doc, EmbeddingProvider& provider);
std::vector<Vector> featurize_all(const Dataset& dataset, EmbeddingProvider& provider);

struct ModelFile {
    LinearClassifier model;
    std::string provider;
    nlohmann::json manifest;
};

/// Model file: {"dimension","labels","mode","weights" (row-major),"bias","provider","manifest"}.
void write_model(std::ostream& out, const LinearClassifier& model, std::string_view provider_name,
                 const nlohmann::json& manifest);
ModelFile read_model(std::istream& in);

}  // namespace weaklab
