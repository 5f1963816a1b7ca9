#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "weaklab/corpus_io.hpp"

namespace weaklab {

using LabelSetList = std::vector<std::vector<LabelId>>;

struct ClassCounts {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

    std::size_t support() const noexcept { return tp + fn; }
};

/// One-vs-rest counts per class.
struct ConfusionCounts {
    std::vector<ClassCounts> per_class;
    std::size_t total = 0;  // examples
};

ConfusionCounts confusion_counts(std::span<const LabelId> predicted, std::span<const LabelId> gold, std::size_t n);
/// Multi-label: each label is an independent binary task.
ConfusionCounts confusion_counts(const LabelSetList& predicted, const LabelSetList& gold, std::size_t n);

double accuracy(std::span<const LabelId> predicted, std::span<const LabelId> gold);
/// Exact-set-match ratio.
double accuracy(const LabelSetList& predicted, const LabelSetList& gold);

struct F1Scores {
    std::vector<double> precision, recall, f1, support;
    double micro = 0.0;
    double macro = 0.0;
    double weighted = 0.0;  // sum_i r_i F1_i, r_i = support_i / sum of supports
};

/// F1 = TP / (TP + (FP + FN) / 2); every empty denominator yields 0.
F1Scores f1_scores(const ConfusionCounts& counts);

/// Per-label binary F1 weighted by gold support, normalized by the total
/// number of gold assignments.
double labelwise_weighted_f1(const LabelSetList& predicted, const LabelSetList& gold, std::size_t n);

/// Mean over events of DCG@k / IDCG@k with log2(rank + 1) discount. Each
/// inner list holds the relevance gains of one event's documents in
/// submitted order. Events with no ideal gain score 1. Throws on k == 0.
double ndcg_at_k(const std::vector<std::vector<double>>& ranked_gains, std::size_t k = 100);

struct EvalReport {
    std::vector<std::string> label_names;
    double accuracy = 0.0;
    F1Scores scores;
    std::optional<double> labelwise_weighted_f1;
    std::optional<double> ndcg;
    std::size_t examples = 0;

    nlohmann::json to_json() const;
    /// Aligned-column text table.
    std::string to_text() const;
};

EvalReport evaluate(std::span<const LabelId> predicted, std::span<const LabelId> gold, const LabelSet& labels);
EvalReport evaluate(const LabelSetList& predicted, const LabelSetList& gold, const LabelSet& labels);

}  // namespace weaklab
