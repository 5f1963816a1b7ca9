#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "weaklab/corpus_io.hpp"
#include "weaklab/label_expansion.hpp"

namespace weaklab {

struct MatchScoreRow {
    std::string document_id;
    std::vector<double> scores;  // one per label
};

struct PseudoLabeledExample {
    std::string document_id;
    std::vector<LabelId> labels;  // sorted, non-empty
    std::vector<double> scores;
};

/// Cumulative matching score: sum of discounted scores of the vocabulary
/// phrases present in the document's n-gram set.
double match_score(const NGramSet& document_ngrams, const LabelVocabulary& vocabulary);

inline constexpr std::size_t kSmallVocabularySize = 10;

/// ln(n), halved when the smallest vocabulary has fewer than 10 phrases.
double compute_epsilon(const std::vector<LabelVocabulary>& vocabularies, std::size_t n);

/// Labels whose score clears epsilon (strictly). Single-label: the argmax
/// (lowest id on ties) if it clears. Empty when the document is rejected.
std::vector<LabelId> assign_labels(std::span<const double> scores, double epsilon, TaskMode mode);

struct PseudoLabelResult {
    double epsilon = 0.0;
    std::vector<PseudoLabeledExample> labelled;
    std::vector<MatchScoreRow> residual;  // documents no label cleared epsilon for
};

/// Matches every document against every vocabulary. `epsilon_override`
/// replaces the computed threshold when set.
PseudoLabelResult pseudo_label_corpus(const Dataset& dataset, const NGramIndex& index,
                                      const std::vector<LabelVocabulary>& vocabularies, TaskMode mode,
                                      std::optional<double> epsilon_override = std::nullopt);

/// JSONL {"id","labels":[int],"scores":[number]}.
void write_pseudo_labels(std::ostream& out, const std::vector<PseudoLabeledExample>& examples);
std::vector<PseudoLabeledExample> read_pseudo_labels(std::istream& in);

/// JSONL {"id","scores":[number]}.
void write_residual(std::ostream& out, const std::vector<MatchScoreRow>& rows);

}  // namespace weaklab
