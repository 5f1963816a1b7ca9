#include "weaklab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "weaklab/errors.hpp"

namespace weaklab {

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double f1_of(const ClassCounts& c) {
    return ratio(static_cast<double>(c.tp), static_cast<double>(c.tp) + 0.5 * static_cast<double>(c.fp + c.fn));
}

void check_lengths(std::size_t a, std::size_t b) {
    if (a != b) throw InputError("metrics: predicted and gold differ in length (" + std::to_string(a) + " vs " +
                                 std::to_string(b) + ")");
}

void check_label(LabelId id, std::size_t n) {
    if (id >= n) throw InputError("metrics: label id " + std::to_string(id) + " out of range");
}

double dcg(std::span<const double> gains, std::size_t k) {
    double total = 0.0;
    for (std::size_t r = 0; r < std::min(k, gains.size()); ++r) total += gains[r] / std::log2(static_cast<double>(r) + 2.0);
    return total;
}

}  // namespace

ConfusionCounts confusion_counts(std::span<const LabelId> predicted, std::span<const LabelId> gold, std::size_t n) {
    check_lengths(predicted.size(), gold.size());
    ConfusionCounts counts{std::vector<ClassCounts>(n), predicted.size()};
    for (std::size_t k = 0; k < predicted.size(); ++k) {
        check_label(predicted[k], n);
        check_label(gold[k], n);
        if (predicted[k] == gold[k]) {
            ++counts.per_class[gold[k]].tp;
        } else {
            ++counts.per_class[predicted[k]].fp;
            ++counts.per_class[gold[k]].fn;
        }
    }
    for (auto& c : counts.per_class) c.tn = counts.total - c.tp - c.fp - c.fn;
    return counts;
}

ConfusionCounts confusion_counts(const LabelSetList& predicted, const LabelSetList& gold, std::size_t n) {
    check_lengths(predicted.size(), gold.size());
    ConfusionCounts counts{std::vector<ClassCounts>(n), predicted.size()};
    std::vector<char> in_pred(n), in_gold(n);
    for (std::size_t k = 0; k < predicted.size(); ++k) {
        std::fill(in_pred.begin(), in_pred.end(), 0);
        std::fill(in_gold.begin(), in_gold.end(), 0);
        for (auto l : predicted[k]) check_label(l, n), in_pred[l] = 1;
        for (auto l : gold[k]) check_label(l, n), in_gold[l] = 1;
        for (std::size_t i = 0; i < n; ++i) {
            auto& c = counts.per_class[i];
            if (in_pred[i] && in_gold[i]) ++c.tp;
            else if (in_pred[i]) ++c.fp;
            else if (in_gold[i]) ++c.fn;
            else ++c.tn;
        }
    }
    return counts;
}

double accuracy(std::span<const LabelId> predicted, std::span<const LabelId> gold) {
    check_lengths(predicted.size(), gold.size());
    if (gold.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < gold.size(); ++k) hits += predicted[k] == gold[k];
    return static_cast<double>(hits) / static_cast<double>(gold.size());
}

double accuracy(const LabelSetList& predicted, const LabelSetList& gold) {
    check_lengths(predicted.size(), gold.size());
    if (gold.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < gold.size(); ++k) {
        auto p = predicted[k], g = gold[k];
        std::sort(p.begin(), p.end());
        std::sort(g.begin(), g.end());
        p.erase(std::unique(p.begin(), p.end()), p.end());
        g.erase(std::unique(g.begin(), g.end()), g.end());
        hits += p == g;
    }
    return static_cast<double>(hits) / static_cast<double>(gold.size());
}

F1Scores f1_scores(const ConfusionCounts& counts) {
    const std::size_t n = counts.per_class.size();
    F1Scores s;
    s.precision.resize(n);
    s.recall.resize(n);
    s.f1.resize(n);
    s.support.resize(n);
    ClassCounts sum;
    double total_support = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = counts.per_class[i];
        s.precision[i] = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
        s.recall[i] = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
        s.f1[i] = f1_of(c);
        s.support[i] = static_cast<double>(c.support());
        total_support += s.support[i];
        sum.tp += c.tp;
        sum.fp += c.fp;
        sum.fn += c.fn;
    }
    s.micro = f1_of(sum);
    if (n > 0) {
        double macro = 0.0, weighted = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            macro += s.f1[i];
            weighted += ratio(s.support[i], total_support) * s.f1[i];
        }
        s.macro = macro / static_cast<double>(n);
        s.weighted = weighted;
    }
    return s;
}

double labelwise_weighted_f1(const LabelSetList& predicted, const LabelSetList& gold, std::size_t n) {
    return f1_scores(confusion_counts(predicted, gold, n)).weighted;
}

double ndcg_at_k(const std::vector<std::vector<double>>& ranked_gains, std::size_t k) {
    if (k == 0) throw InputError("ndcg_at_k: k must be positive");
    if (ranked_gains.empty()) return 0.0;
    double total = 0.0;
    for (const auto& gains : ranked_gains) {
        for (double g : gains) {
            if (!(g >= 0.0)) throw InputError("ndcg_at_k: gains must be non-negative");
        }
        auto ideal = gains;
        std::sort(ideal.begin(), ideal.end(), std::greater<>());
        const double idcg = dcg(ideal, k);
        total += idcg > 0.0 ? dcg(gains, k) / idcg : 1.0;
    }
    return total / static_cast<double>(ranked_gains.size());
}

nlohmann::json EvalReport::to_json() const {
    nlohmann::json per_class = nlohmann::json::array();
    for (std::size_t i = 0; i < scores.f1.size(); ++i) {
        per_class.push_back({{"label", i < label_names.size() ? label_names[i] : std::to_string(i)},
                             {"precision", scores.precision[i]},
                             {"recall", scores.recall[i]},
                             {"f1", scores.f1[i]},
                             {"support", scores.support[i]}});
    }
    nlohmann::json j = {{"examples", examples},       {"accuracy", accuracy},       {"micro_f1", scores.micro},
                        {"macro_f1", scores.macro},   {"weighted_f1", scores.weighted}, {"per_class", per_class}};
    if (labelwise_weighted_f1) j["labelwise_weighted_f1"] = *labelwise_weighted_f1;
    if (ndcg) j["ndcg"] = *ndcg;
    return j;
}

std::string EvalReport::to_text() const {
    std::size_t width = 5;
    for (const auto& name : label_names) width = std::max(width, name.size());
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-*s %9s %9s %9s %9s\n", static_cast<int>(width), "label", "precision", "recall",
                  "f1", "support");
    out << buf;
    for (std::size_t i = 0; i < scores.f1.size(); ++i) {
        const std::string name = i < label_names.size() ? label_names[i] : std::to_string(i);
        std::snprintf(buf, sizeof buf, "%-*s %9.4f %9.4f %9.4f %9.0f\n", static_cast<int>(width), name.c_str(),
                      scores.precision[i], scores.recall[i], scores.f1[i], scores.support[i]);
        out << buf;
    }
    out << '\n';
    auto line = [&](const char* key, double value) {
        std::snprintf(buf, sizeof buf, "%-*s %9.4f\n", static_cast<int>(std::max<std::size_t>(width, 21)), key, value);
        out << buf;
    };
    line("accuracy", accuracy);
    line("micro_f1", scores.micro);
    line("macro_f1", scores.macro);
    line("weighted_f1", scores.weighted);
    if (labelwise_weighted_f1) line("labelwise_weighted_f1", *labelwise_weighted_f1);
    if (ndcg) line("ndcg", *ndcg);
    return out.str();
}

EvalReport evaluate(std::span<const LabelId> predicted, std::span<const LabelId> gold, const LabelSet& labels) {
    EvalReport report;
    report.label_names = labels.names();
    report.examples = gold.size();
    report.accuracy = accuracy(predicted, gold);
    report.scores = f1_scores(confusion_counts(predicted, gold, labels.size()));
    return report;
}

EvalReport evaluate(const LabelSetList& predicted, const LabelSetList& gold, const LabelSet& labels) {
    EvalReport report;
    report.label_names = labels.names();
    report.examples = gold.size();
    report.accuracy = accuracy(predicted, gold);
    report.scores = f1_scores(confusion_counts(predicted, gold, labels.size()));
    report.labelwise_weighted_f1 = report.scores.weighted;
    return report;
}

}  // namespace weaklab
