#include "weaklab/pseudo_label.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "weaklab/errors.hpp"

namespace weaklab {

double match_score(const NGramSet& document_ngrams, const LabelVocabulary& vocabulary) {
    double total = 0.0;
    for (const auto& entry : vocabulary.entries) {
        if (document_ngrams.contains(entry.phrase)) total += entry.score;
    }
    return total;
}

double compute_epsilon(const std::vector<LabelVocabulary>& vocabularies, std::size_t n) {
    if (n < 2) throw InputError("compute_epsilon: need at least 2 labels");
    const double base = std::log(static_cast<double>(n));
    const bool small = std::any_of(vocabularies.begin(), vocabularies.end(),
                                   [](const LabelVocabulary& v) { return v.size() < kSmallVocabularySize; });
    return small ? base / 2.0 : base;
}

std::vector<LabelId> assign_labels(std::span<const double> scores, double epsilon, TaskMode mode) {
    std::vector<LabelId> labels;
    if (scores.empty()) return labels;
    if (mode == TaskMode::SingleLabel) {
        const auto best = static_cast<LabelId>(std::max_element(scores.begin(), scores.end()) - scores.begin());
        if (scores[best] > epsilon) labels.push_back(best);
    } else {
        for (LabelId i = 0; i < scores.size(); ++i) {
            if (scores[i] > epsilon) labels.push_back(i);
        }
    }
    return labels;
}

PseudoLabelResult pseudo_label_corpus(const Dataset& dataset, const NGramIndex& index,
                                      const std::vector<LabelVocabulary>& vocabularies, TaskMode mode,
                                      std::optional<double> epsilon_override) {
    const std::size_t n = dataset.labels.size();
    if (vocabularies.size() != n) {
        throw InputError("pseudo_label_corpus: " + std::to_string(vocabularies.size()) + " vocabularies for " +
                         std::to_string(n) + " labels");
    }
    PseudoLabelResult result;
    result.epsilon = epsilon_override ? *epsilon_override : compute_epsilon(vocabularies, n);

    for (const auto& doc : dataset.documents) {
        const NGramSet* grams = index.find(doc.id);
        if (!grams) throw InputError("pseudo_label_corpus: document '" + doc.id + "' missing from n-gram index");
        std::vector<double> scores(n);
        for (LabelId i = 0; i < n; ++i) scores[i] = match_score(*grams, vocabularies[i]);
        auto labels = assign_labels(scores, result.epsilon, mode);
        if (labels.empty()) {
            result.residual.push_back({doc.id, std::move(scores)});
        } else {
            result.labelled.push_back({doc.id, std::move(labels), std::move(scores)});
        }
    }
    return result;
}

void write_pseudo_labels(std::ostream& out, const std::vector<PseudoLabeledExample>& examples) {
    for (const auto& ex : examples) {
        const nlohmann::json j = {{"id", ex.document_id}, {"labels", ex.labels}, {"scores", ex.scores}};
        out << j.dump() << '\n';
    }
}

std::vector<PseudoLabeledExample> read_pseudo_labels(std::istream& in) {
    std::vector<PseudoLabeledExample> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            PseudoLabeledExample ex{j.at("id").get<std::string>(), j.at("labels").get<std::vector<LabelId>>(),
                                    j.at("scores").get<std::vector<double>>()};
            if (ex.labels.empty()) throw InputError("pseudo-label file line " + std::to_string(line_no) + ": no labels");
            out.push_back(std::move(ex));
        } catch (const nlohmann::json::exception& e) {
            throw InputError("pseudo-label file line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void write_residual(std::ostream& out, const std::vector<MatchScoreRow>& rows) {
    for (const auto& row : rows) {
        const nlohmann::json j = {{"id", row.document_id}, {"scores", row.scores}};
        out << j.dump() << '\n';
    }
}

}  // namespace weaklab
