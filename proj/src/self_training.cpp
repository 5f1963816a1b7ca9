#include "weaklab/self_training.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "weaklab/errors.hpp"
#include "weaklab/random.hpp"

namespace weaklab {

namespace {

std::size_t check_rectangular(const Matrix& m, const char* what) {
    if (m.empty()) throw InputError(std::string(what) + ": empty matrix");
    const std::size_t cols = m.front().size();
    for (const auto& row : m) {
        if (row.size() != cols) throw InputError(std::string(what) + ": ragged matrix");
    }
    return cols;
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.size() != b.size()) throw InputError(std::string(what) + ": row count mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != b[i].size()) throw InputError(std::string(what) + ": column count mismatch");
    }
}

double kl_term(double q, double p) {
    if (q == 0.0) return 0.0;
    if (p <= 0.0) throw InvariantError("KL divergence: target has mass where prediction is zero");
    return q * std::log(q / p);
}

}  // namespace

Matrix soft_targets(const Matrix& predictions) {
    const std::size_t n = check_rectangular(predictions, "soft_targets");
    std::vector<double> column_mass(n, 0.0);
    for (const auto& row : predictions) {
        for (std::size_t j = 0; j < n; ++j) column_mass[j] += row[j];
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (!(column_mass[j] > 0.0)) {
            throw InvariantError("soft_targets: class " + std::to_string(j) + " has zero predicted mass");
        }
    }
    Matrix targets(predictions.size(), Vector(n));
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double p = predictions[i][j];
            targets[i][j] = p * p / column_mass[j];
            row_sum += targets[i][j];
        }
        if (!(row_sum > 0.0)) throw InvariantError("soft_targets: row " + std::to_string(i) + " has zero mass");
        for (auto& q : targets[i]) q /= row_sum;
    }
    return targets;
}

Matrix soft_targets_bernoulli(const Matrix& predictions) {
    const std::size_t n = check_rectangular(predictions, "soft_targets_bernoulli");
    std::vector<double> positive(n, 0.0), negative(n, 0.0);
    for (const auto& row : predictions) {
        for (std::size_t j = 0; j < n; ++j) {
            positive[j] += row[j];
            negative[j] += 1.0 - row[j];
        }
    }
    Matrix targets(predictions.size(), Vector(n));
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double p = predictions[i][j];
            const double on = positive[j] > 0.0 ? p * p / positive[j] : 0.0;
            const double off = negative[j] > 0.0 ? (1.0 - p) * (1.0 - p) / negative[j] : 0.0;
            if (!(on + off > 0.0)) {
                throw InvariantError("soft_targets_bernoulli: class " + std::to_string(j) + " has zero mass");
            }
            targets[i][j] = on / (on + off);
        }
    }
    return targets;
}

double kl_divergence(const Matrix& targets, const Matrix& predictions) {
    check_same_shape(targets, predictions, "kl_divergence");
    double total = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        for (std::size_t j = 0; j < targets[i].size(); ++j) total += kl_term(targets[i][j], predictions[i][j]);
    }
    // Rounding can push an exact zero slightly negative.
    return std::max(total, 0.0);
}

double bernoulli_kl_divergence(const Matrix& targets, const Matrix& predictions) {
    check_same_shape(targets, predictions, "bernoulli_kl_divergence");
    double total = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        for (std::size_t j = 0; j < targets[i].size(); ++j) {
            const double q = targets[i][j], p = predictions[i][j];
            total += kl_term(q, p) + kl_term(1.0 - q, 1.0 - p);
        }
    }
    return std::max(total, 0.0);
}

Matrix predict_matrix(const TrainableClassifier& model, std::span<const Vector> features) {
    Matrix out;
    out.reserve(features.size());
    for (const auto& f : features) out.push_back(model.predict_proba(f).values);
    return out;
}

SelfTrainResult self_train(TrainableClassifier& model, std::span<const Vector> features,
                           const SelfTrainConfig& config) {
    if (config.batch_size == 0 || config.update_interval == 0) {
        throw InputError("self_train: batch_size and update_interval must be positive");
    }
    SelfTrainResult result;
    if (config.passes == 0) return result;
    if (features.empty()) throw InputError("self_train: empty corpus");

    const bool sigmoid_head = model.mode() == OutputMode::Sigmoid;
    auto sharpen = [&](const Matrix& p) { return sigmoid_head ? soft_targets_bernoulli(p) : soft_targets(p); };
    auto divergence = [&](const Matrix& q, const Matrix& p) {
        return sigmoid_head ? bernoulli_kl_divergence(q, p) : kl_divergence(q, p);
    };

    std::vector<std::size_t> order(features.size());
    std::iota(order.begin(), order.end(), 0);
    CounterRng rng(config.seed);
    rng.shuffle(std::span(order));

    const std::size_t portion_size = config.portion_size();
    const std::size_t portions_per_pass = (features.size() + portion_size - 1) / portion_size;
    const std::size_t total_steps = config.passes * portions_per_pass * config.update_interval;
    std::size_t step = 0;

    std::vector<Vector> batch_x, batch_q;
    for (std::size_t pass = 0; pass < config.passes; ++pass) {
        for (std::size_t start = 0; start < features.size(); start += portion_size) {
            const std::size_t end = std::min(features.size(), start + portion_size);
            std::vector<Vector> portion;
            portion.reserve(end - start);
            for (std::size_t k = start; k < end; ++k) portion.push_back(features[order[k]]);

            const Matrix predictions = predict_matrix(model, portion);
            const Matrix targets = sharpen(predictions);
            PortionLoss record{.portion = result.trace.size(),
                               .kl_before = divergence(targets, predictions),
                               .kl_after = 0.0,
                               .step_losses = {}};

            const std::size_t m = portion.size();
            const std::size_t batch = std::min(config.batch_size, m);
            for (std::size_t s = 0; s < config.update_interval; ++s) {
                batch_x.clear();
                batch_q.clear();
                const std::size_t offset = (s * config.batch_size) % m;
                for (std::size_t k = 0; k < batch; ++k) {
                    const std::size_t idx = (offset + k) % m;
                    batch_x.push_back(portion[idx]);
                    batch_q.push_back(targets[idx]);
                }
                model.gradient_step(batch_x, batch_q, cosine_decay(config.learning_rate, step++, total_steps));
                if (config.record_step_losses) {
                    record.step_losses.push_back(divergence(targets, predict_matrix(model, portion)));
                }
            }
            record.kl_after = divergence(targets, predict_matrix(model, portion));
            result.trace.push_back(std::move(record));
        }
    }
    return result;
}

SelfTrainResult self_train(TrainableClassifier& model, const Dataset& corpus, EmbeddingProvider& provider,
                           const SelfTrainConfig& config) {
    if (config.passes == 0) return {};
    const auto features = featurize_all(corpus, provider);
    return self_train(model, features, config);
}

void write_loss_trace(std::ostream& out, const std::vector<PortionLoss>& trace) {
    out << "portion_index,kl_loss_before,kl_loss_after\n";
    char buf[128];
    for (const auto& row : trace) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", row.portion, row.kl_before, row.kl_after);
        out << buf;
    }
}

}  // namespace weaklab
