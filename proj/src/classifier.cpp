#include "weaklab/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>

#include "weaklab/errors.hpp"
#include "weaklab/random.hpp"

namespace weaklab {

namespace {

double log_sum_exp(std::span<const double> z) {
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    return m + std::log(s);
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

void check_batch(std::span<const Vector> features, std::span<const Vector> targets, std::size_t labels) {
    if (features.size() != targets.size()) throw InputError("batch: features and targets differ in length");
    if (features.empty()) throw InputError("batch: empty");
    for (const auto& t : targets) {
        if (t.size() != labels) throw InputError("batch: target length does not match the label count");
    }
}

}  // namespace

OutputMode output_mode_for(TaskMode mode) {
    return mode == TaskMode::SingleLabel ? OutputMode::Softmax : OutputMode::Sigmoid;
}

std::string_view to_string(OutputMode mode) { return mode == OutputMode::Softmax ? "softmax" : "sigmoid"; }

OutputMode parse_output_mode(std::string_view text) {
    if (text == "softmax") return OutputMode::Softmax;
    if (text == "sigmoid") return OutputMode::Sigmoid;
    throw InputError("unknown output mode '" + std::string(text) + "'");
}

std::size_t ProbabilityDistribution::argmax() const {
    return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

std::vector<double> softmax(std::span<const double> logits) {
    const double lse = log_sum_exp(logits);
    std::vector<double> p(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) p[i] = std::exp(logits[i] - lse);
    return p;
}

std::vector<double> sigmoid(std::span<const double> logits) {
    std::vector<double> p(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double z = logits[i];
        p[i] = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    }
    return p;
}

double cross_entropy_from_logits(std::span<const double> logits, std::span<const double> target, OutputMode mode) {
    double loss = 0.0;
    if (mode == OutputMode::Softmax) {
        const double lse = log_sum_exp(logits);
        for (std::size_t j = 0; j < logits.size(); ++j) {
            if (target[j] != 0.0) loss += target[j] * (lse - logits[j]);
        }
    } else {
        for (std::size_t j = 0; j < logits.size(); ++j) loss += softplus(logits[j]) - target[j] * logits[j];
    }
    return loss;
}

std::vector<double> one_hot(LabelId label, std::size_t n) {
    if (label >= n) throw InputError("one_hot: label out of range");
    std::vector<double> v(n, 0.0);
    v[label] = 1.0;
    return v;
}

std::vector<double> multi_hot(std::span<const LabelId> labels, std::size_t n) {
    std::vector<double> v(n, 0.0);
    for (auto l : labels) {
        if (l >= n) throw InputError("multi_hot: label out of range");
        v[l] = 1.0;
    }
    return v;
}

LinearClassifier::LinearClassifier(std::size_t labels, std::size_t dimension, OutputMode mode)
    : labels_(labels), dimension_(dimension), mode_(mode), weights_(labels * dimension, 0.0), bias_(labels, 0.0) {
    if (labels == 0 || dimension == 0) throw InputError("LinearClassifier: labels and dimension must be positive");
}

void LinearClassifier::check_features(std::span<const double> features) const {
    if (features.size() != dimension_) {
        throw InputError("classifier: feature dimension " + std::to_string(features.size()) + ", model expects " +
                         std::to_string(dimension_));
    }
}

std::vector<double> LinearClassifier::logits(std::span<const double> features) const {
    check_features(features);
    std::vector<double> z(labels_);
    for (std::size_t i = 0; i < labels_; ++i) {
        z[i] = bias_[i] + dot(std::span(weights_).subspan(i * dimension_, dimension_), features);
    }
    return z;
}

ProbabilityDistribution LinearClassifier::predict_proba(std::span<const double> features) const {
    const auto z = logits(features);
    return {mode_ == OutputMode::Softmax ? softmax(z) : sigmoid(z), mode_};
}

double LinearClassifier::loss(std::span<const Vector> features, std::span<const Vector> targets) const {
    check_batch(features, targets, labels_);
    double total = 0.0;
    for (std::size_t k = 0; k < features.size(); ++k) {
        total += cross_entropy_from_logits(logits(features[k]), targets[k], mode_);
    }
    return total / static_cast<double>(features.size());
}

double LinearClassifier::loss_and_gradient(std::span<const Vector> features, std::span<const Vector> targets,
                                           LinearGradient& gradient) const {
    check_batch(features, targets, labels_);
    gradient.weights.assign(weights_.size(), 0.0);
    gradient.bias.assign(bias_.size(), 0.0);
    const double scale = 1.0 / static_cast<double>(features.size());
    double total = 0.0;
    for (std::size_t k = 0; k < features.size(); ++k) {
        const auto z = logits(features[k]);
        total += cross_entropy_from_logits(z, targets[k], mode_);
        const auto p = mode_ == OutputMode::Softmax ? softmax(z) : sigmoid(z);
        for (std::size_t i = 0; i < labels_; ++i) {
            // d loss / d z_i = p_i - q_i for both heads
            const double g = (p[i] - targets[k][i]) * scale;
            gradient.bias[i] += g;
            double* row = gradient.weights.data() + i * dimension_;
            for (std::size_t f = 0; f < dimension_; ++f) row[f] += g * features[k][f];
        }
    }
    return total * scale;
}

double LinearClassifier::gradient_step(std::span<const Vector> features, std::span<const Vector> targets,
                                       double learning_rate) {
    LinearGradient gradient;
    const double before = loss_and_gradient(features, targets, gradient);
    if (!std::isfinite(before)) throw InvariantError("non-finite training loss (learning rate too large?)");
    for (std::size_t i = 0; i < weights_.size(); ++i) weights_[i] -= learning_rate * gradient.weights[i];
    for (std::size_t i = 0; i < bias_.size(); ++i) bias_[i] -= learning_rate * gradient.bias[i];
    if (!parameters_finite()) throw InvariantError("non-finite parameters after gradient step");
    return before;
}

bool LinearClassifier::parameters_finite() const {
    auto finite = [](double x) { return std::isfinite(x); };
    return std::all_of(weights_.begin(), weights_.end(), finite) && std::all_of(bias_.begin(), bias_.end(), finite);
}

double cosine_decay(double base_learning_rate, std::size_t step, std::size_t total_steps) {
    if (total_steps == 0) return base_learning_rate;
    const double progress = static_cast<double>(step) / static_cast<double>(total_steps);
    return base_learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

TrainingResult train(std::span<const Vector> features, std::span<const Vector> targets, std::size_t labels,
                     OutputMode mode, const TrainingConfig& config) {
    if (features.empty()) throw InputError("train: no examples");
    if (config.batch_size == 0) throw InputError("train: batch size must be positive");
    check_batch(features, targets, labels);
    const std::size_t dim = features.front().size();
    for (const auto& f : features) {
        if (f.size() != dim) throw InputError("train: examples have differing feature dimensions");
    }

    TrainingResult result{LinearClassifier(labels, dim, mode), {}};
    const std::size_t count = features.size();
    const std::size_t batches_per_epoch = (count + config.batch_size - 1) / config.batch_size;
    const std::size_t total_steps = batches_per_epoch * config.epochs;

    CounterRng rng(config.seed);
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::vector<Vector> batch_x, batch_q;
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(std::span(order));
        for (std::size_t start = 0; start < count; start += config.batch_size) {
            const std::size_t end = std::min(count, start + config.batch_size);
            batch_x.clear();
            batch_q.clear();
            for (std::size_t k = start; k < end; ++k) {
                batch_x.push_back(features[order[k]]);
                batch_q.push_back(targets[order[k]]);
            }
            result.model.gradient_step(batch_x, batch_q, cosine_decay(config.learning_rate, step++, total_steps));
        }
        const double epoch_loss = result.model.loss(features, targets);
        if (!std::isfinite(epoch_loss)) throw InvariantError("non-finite training loss at epoch " + std::to_string(epoch));
        result.epoch_losses.push_back(epoch_loss);
    }
    return result;
}

std::vector<LabelId> predict_multilabel(const TrainableClassifier& model, std::span<const double> features,
                                        double threshold) {
    if (model.mode() != OutputMode::Sigmoid) throw InputError("predict_multilabel requires a sigmoid-head model");
    const auto p = model.predict_proba(features);
    std::vector<LabelId> labels;
    for (LabelId i = 0; i < p.values.size(); ++i) {
        if (p.values[i] > threshold) labels.push_back(i);
    }
    return labels;
}

std::vector<LabelId> predict_labels(const TrainableClassifier& model, std::span<const double> features,
                                    double threshold) {
    if (model.mode() == OutputMode::Sigmoid) return predict_multilabel(model, features, threshold);
    return {model.predict_proba(features).argmax()};
}

Vector featurize(const Document& doc, EmbeddingProvider& provider) {
    if (doc.text.empty()) throw InputError("featurize: document '" + doc.id + "' has empty text");
    return provider.embed(doc.text);
}

std::vector<Vector> featurize_all(const Dataset& dataset, EmbeddingProvider& provider) {
    std::vector<std::string> texts;
    texts.reserve(dataset.size());
    for (const auto& doc : dataset.documents) {
        if (doc.text.empty()) throw InputError("featurize: document '" + doc.id + "' has empty text");
        texts.push_back(doc.text);
    }
    return provider.embed_batch(texts);
}

void write_model(std::ostream& out, const LinearClassifier& model, std::string_view provider_name,
                 const nlohmann::json& manifest) {
    const nlohmann::json doc = {
        {"dimension", model.feature_dimension()},
        {"labels", model.label_count()},
        {"mode", std::string(to_string(model.mode()))},
        {"weights", std::vector<double>(model.weights().begin(), model.weights().end())},
        {"bias", std::vector<double>(model.bias().begin(), model.bias().end())},
        {"provider", std::string(provider_name)},
        {"manifest", manifest},
    };
    out << doc.dump() << '\n';
}

ModelFile read_model(std::istream& in) {
    try {
        const auto doc = nlohmann::json::parse(in);
        const auto dim = doc.at("dimension").get<std::size_t>();
        const auto labels = doc.at("labels").get<std::size_t>();
        LinearClassifier model(labels, dim, parse_output_mode(doc.at("mode").get<std::string>()));
        const auto w = doc.at("weights").get<std::vector<double>>();
        const auto b = doc.at("bias").get<std::vector<double>>();
        if (w.size() != labels * dim || b.size() != labels) throw InputError("model file: parameter shape mismatch");
        std::copy(w.begin(), w.end(), model.weights().begin());
        std::copy(b.begin(), b.end(), model.bias().begin());
        return {std::move(model), doc.at("provider").get<std::string>(), doc.value("manifest", nlohmann::json::object())};
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("model file: ") + e.what());
    }
}

}  // namespace weaklab
