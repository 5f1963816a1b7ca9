#include "weaklab/label_expansion.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "weaklab/errors.hpp"

namespace weaklab {

void sort_ranked(std::vector<ScoredPhrase>& ranked) {
    std::sort(ranked.begin(), ranked.end(), [](const ScoredPhrase& a, const ScoredPhrase& b) {
        if (a.raw_score != b.raw_score) return a.raw_score > b.raw_score;
        return a.phrase < b.phrase;
    });
}

std::vector<ScoredPhrase> rank_candidates(std::string_view label_name, std::span<const std::string> pool,
                                          EmbeddingProvider& provider) {
    if (pool.empty()) throw InputError("rank_candidates: empty candidate pool");
    const Vector label_vec = provider.embed(std::string(label_name));
    const auto phrase_vecs = provider.embed_batch(pool);
    std::vector<ScoredPhrase> ranked;
    ranked.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        ranked.push_back({pool[i], cosine(label_vec, phrase_vecs[i])});
    }
    sort_ranked(ranked);
    return ranked;
}

std::vector<std::string> candidate_pool(const NGramIndex& index, std::size_t corpus_size,
                                        const ExpansionParams& params) {
    const bool drop_hapax = params.rare_filter_min_docs > 0 && corpus_size > params.rare_filter_min_docs;
    std::vector<std::string> pool;
    pool.reserve(index.global_pool.size());
    for (const auto& [gram, freq] : index.global_pool) {
        if (drop_hapax && freq < 2) continue;
        pool.push_back(gram);
    }
    return pool;
}

double discounted_score(double raw_score, std::size_t n, std::size_t lf) {
    if (lf == n) return 0.0;
    return raw_score * std::log(static_cast<double>(n) / static_cast<double>(lf));
}

PreprocessResult preprocess_vocabularies(const std::vector<std::vector<ScoredPhrase>>& ranked,
                                         const LabelSet& labels, const ExpansionParams& params) {
    const std::size_t n = labels.size();
    if (n < 2) throw InputError("label expansion needs at least 2 labels (discounting is undefined for one)");
    if (ranked.size() != n) throw InputError("preprocess_vocabularies: one ranked list per label required");
    if (params.min_k > params.max_k) throw InputError("preprocess_vocabularies: min_k exceeds max_k");

    PreprocessResult result;
    result.vocabularies.reserve(n);
    for (LabelId id = 0; id < n; ++id) {
        const auto& list = ranked[id];
        if (list.empty()) throw InputError("no candidate phrases for label '" + labels.name(id) + "'");
        const auto above = static_cast<std::size_t>(
            std::count_if(list.begin(), list.end(), [&](const ScoredPhrase& p) { return p.raw_score >= params.threshold; }));
        const std::size_t keep = std::min({std::max(above, params.min_k), params.max_k, list.size()});

        LabelVocabulary vocab{.label_id = id, .name = labels.name(id), .entries = {}};
        vocab.entries.reserve(keep);
        for (std::size_t k = 0; k < keep; ++k) vocab.entries.push_back({list[k].phrase, list[k].raw_score, 0.0});
        for (const auto& e : vocab.entries) ++result.label_frequency[e.phrase];
        result.vocabularies.push_back(std::move(vocab));
    }

    for (auto& vocab : result.vocabularies) {
        for (auto& e : vocab.entries) e.score = discounted_score(e.raw_score, n, result.label_frequency.at(e.phrase));
    }
    return result;
}

PreprocessResult expand_labels(const LabelSet& labels, const NGramIndex& index, std::size_t corpus_size,
                               EmbeddingProvider& provider, const ExpansionParams& params) {
    const auto pool = candidate_pool(index, corpus_size, params);
    std::vector<std::vector<ScoredPhrase>> ranked;
    ranked.reserve(labels.size());
    for (LabelId id = 0; id < labels.size(); ++id) ranked.push_back(rank_candidates(labels.name(id), pool, provider));
    return preprocess_vocabularies(ranked, labels, params);
}

void write_vocabularies(std::ostream& out, const std::vector<LabelVocabulary>& vocabularies,
                        std::string_view provider_name) {
    nlohmann::json labels = nlohmann::json::array();
    for (const auto& vocab : vocabularies) {
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& e : vocab.entries) {
            entries.push_back({{"phrase", e.phrase}, {"raw", e.raw_score}, {"score", e.score}});
        }
        labels.push_back({{"id", vocab.label_id}, {"name", vocab.name}, {"entries", std::move(entries)}});
    }
    const nlohmann::json doc = {
        {"labels", std::move(labels)}, {"n", vocabularies.size()}, {"provider", std::string(provider_name)}};
    out << doc.dump(2) << '\n';
}

std::vector<LabelVocabulary> read_vocabularies(std::istream& in) {
    try {
        const auto doc = nlohmann::json::parse(in);
        std::vector<LabelVocabulary> vocabularies;
        for (const auto& label : doc.at("labels")) {
            LabelVocabulary vocab;
            vocab.label_id = label.at("id").get<LabelId>();
            vocab.name = label.at("name").get<std::string>();
            for (const auto& e : label.at("entries")) {
                vocab.entries.push_back(
                    {e.at("phrase").get<std::string>(), e.at("raw").get<double>(), e.at("score").get<double>()});
            }
            vocabularies.push_back(std::move(vocab));
        }
        if (vocabularies.size() != doc.at("n").get<std::size_t>()) {
            throw InputError("vocabulary file: 'n' disagrees with the number of labels");
        }
        for (std::size_t i = 0; i < vocabularies.size(); ++i) {
            if (vocabularies[i].label_id != i) throw InputError("vocabulary file: label ids must be 0..n-1 in order");
        }
        return vocabularies;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("vocabulary file: ") + e.what());
    }
}

}  // namespace weaklab
