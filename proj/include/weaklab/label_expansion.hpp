#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "weaklab/corpus_io.hpp"
#include "weaklab/embedding.hpp"

namespace weaklab {

struct ScoredPhrase {
    std::string phrase;
    double raw_score = 0.0;  // cosine to the label name
};

struct VocabularyEntry {
    std::string phrase;
    double raw_score = 0.0;
    double score = 0.0;  // raw_score * ln(n / LF(phrase))
};

struct LabelVocabulary {
    LabelId label_id = 0;
    std::string name;
    std::vector<VocabularyEntry> entries;  // raw_score descending, ties by phrase

    std::size_t size() const noexcept { return entries.size(); }
};

/// phrase → number of label vocabularies containing it.
using LabelFrequencyTable = std::map<std::string, std::size_t>;

struct ExpansionParams {
    double threshold = 0.7;
    std::size_t min_k = 2;
    std::size_t max_k = 100;
    /// Drop hapax n-grams from the candidate pool once the corpus has more
    /// than this many documents. 0 disables the filter.
    std::size_t rare_filter_min_docs = 10'000;
};

/// Orders by raw score descending, breaking ties by phrase.
void sort_ranked(std::vector<ScoredPhrase>& ranked);

/// Scores every pool phrase by cosine to the label name; returns the full
/// ranked list.
std::vector<ScoredPhrase> rank_candidates(std::string_view label_name, std::span<const std::string> pool,
                                          EmbeddingProvider& provider);

/// Candidate phrases from the global n-gram pool, in lexicographic order.
std::vector<std::string> candidate_pool(const NGramIndex& index, std::size_t corpus_size,
                                        const ExpansionParams& params);

struct PreprocessResult {
    std::vector<LabelVocabulary> vocabularies;
    LabelFrequencyTable label_frequency;
};

/// Threshold, min/max cut, then cross-label discounting against the
/// post-cut vocabularies. `ranked[i]` must be sorted (see sort_ranked).
PreprocessResult preprocess_vocabularies(const std::vector<std::vector<ScoredPhrase>>& ranked,
                                         const LabelSet& labels, const ExpansionParams& params = {});

/// s = raw * ln(n / lf); exactly 0 when lf == n.
double discounted_score(double raw_score, std::size_t n, std::size_t lf);

/// Full stage: pool → per-label ranking → preprocessing.
PreprocessResult expand_labels(const LabelSet& labels, const NGramIndex& index, std::size_t corpus_size,
                               EmbeddingProvider& provider, const ExpansionParams& params = {});

/// Vocabulary file (JSON):
/// {"labels":[{"id","name","entries":[{"phrase","raw","score"}]}],"n","provider"}
void write_vocabularies(std::ostream& out, const std::vector<LabelVocabulary>& vocabularies,
                        std::string_view provider_name);
std::vector<LabelVocabulary> read_vocabularies(std::istream& in);

}  // namespace weaklab
