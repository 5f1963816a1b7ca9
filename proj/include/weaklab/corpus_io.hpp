#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace weaklab {

using LabelId = std::size_t;

enum class TaskMode { SingleLabel, MultiLabel };

std::string_view to_string(TaskMode mode);
TaskMode parse_task_mode(std::string_view text);

/// Lowercase, NFC-normalize, drop URLs, replace punctuation and symbols by
/// spaces (apostrophes and hyphens between two word characters survive),
/// collapse whitespace. Idempotent. May return an empty string.
std::string normalize_text(std::string_view raw);

/// Whitespace split of already-normalized text.
std::vector<std::string> tokenize(std::string_view normalized);

/// Ordered label surface names. A label's id is its position.
class LabelSet {
public:
    LabelSet() = default;
    explicit LabelSet(std::vector<std::string> surface_names);

    /// One surface name per line; blank lines and lines starting with '#'
    /// are skipped.
    static LabelSet load(const std::filesystem::path& path);

    std::size_t size() const noexcept { return names_.size(); }
    bool empty() const noexcept { return names_.empty(); }
    const std::string& name(LabelId id) const { return names_.at(id); }
    const std::vector<std::string>& names() const noexcept { return names_; }

    /// Lookup by surface name; the query is normalized first.
    std::optional<LabelId> find(std::string_view surface_name) const;

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, LabelId> index_;
};

struct Document {
    std::string id;
    std::string text;  // normalized
    std::optional<std::vector<LabelId>> gold_labels;  // sorted, unique
    std::optional<std::string> event_id;
};

struct Dataset {
    std::vector<Document> documents;
    LabelSet labels;
    TaskMode mode = TaskMode::SingleLabel;

    std::size_t size() const noexcept { return documents.size(); }
    bool fully_labelled() const;
};

enum class CorpusFormat { Jsonl, Tsv };

/// .tsv → Tsv, everything else → Jsonl.
CorpusFormat format_from_path(const std::filesystem::path& path);

/// Throws InputError naming the line for malformed records, unknown label
/// names, duplicate ids, and texts that normalize to nothing.
Dataset load_corpus(const std::filesystem::path& path, CorpusFormat format, const LabelSet& labels,
                    TaskMode mode);
Dataset read_corpus(std::istream& in, CorpusFormat format, const LabelSet& labels, TaskMode mode,
                    std::string_view source_name = "<stream>");

/// JSONL, one document per line, labels written by surface name.
void write_corpus(std::ostream& out, const Dataset& dataset);

using NGramSet = std::unordered_set<std::string>;

struct NGramIndex {
    std::size_t n_max = 3;
    std::vector<std::string> document_ids;  // dataset order
    std::vector<NGramSet> per_document;     // aligned with document_ids
    std::map<std::string, std::size_t> global_pool;  // n-gram → number of documents containing it

    const NGramSet* find(std::string_view document_id) const;

private:
    friend NGramIndex extract_ngrams(const Dataset&, std::size_t, std::size_t);
    std::unordered_map<std::string, std::size_t> position_;
};

inline constexpr std::size_t kMaxMiningTokens = 512;

/// Every contiguous window of 1..n_max tokens, as a set.
NGramSet document_ngrams(const std::vector<std::string>& tokens, std::size_t n_max);

NGramIndex extract_ngrams(const Dataset& dataset, std::size_t n_max = 3,
                          std::size_t max_tokens = kMaxMiningTokens);

}  // namespace weaklab
