#include "weaklab/corpus_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "weaklab/errors.hpp"

namespace weaklab {

namespace {

bool is_word_char(UChar32 c) {
    const auto mask = U_GET_GC_MASK(c);
    return (mask & (U_GC_L_MASK | U_GC_M_MASK | U_GC_N_MASK)) != 0;
}

bool is_url_chunk(std::string_view chunk) {
    return chunk.find("://") != std::string_view::npos || chunk.starts_with("www.");
}

std::string nfc_lower(std::string_view raw) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) throw InvariantError("ICU NFC normalizer unavailable");
    icu::UnicodeString text = icu::UnicodeString::fromUTF8(icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
    text = nfc->normalize(text, status);
    text.toLower(icu::Locale::getRoot());
    text = nfc->normalize(text, status);
    if (U_FAILURE(status)) throw InvariantError("ICU normalization failed");
    std::string out;
    text.toUTF8String(out);
    return out;
}

std::string strip_punctuation(const icu::UnicodeString& text) {
    icu::UnicodeString out;
    const int32_t length = text.length();
    UChar32 prev = 0;
    for (int32_t i = 0; i < length;) {
        const UChar32 c = text.char32At(i);
        const int32_t next_index = text.moveIndex32(i, 1);
        const UChar32 next = next_index < length ? text.char32At(next_index) : 0;
        if (is_word_char(c)) {
            out.append(c);
        } else if ((c == u'\'' || c == 0x2019 || c == u'-') && i > 0 && next_index < length &&
                   is_word_char(prev) && is_word_char(next)) {
            out.append(c == 0x2019 ? UChar32{u'\''} : c);
        } else {
            out.append(UChar32{u' '});
        }
        prev = c;
        i = next_index;
    }
    std::string utf8;
    out.toUTF8String(utf8);
    return utf8;
}

std::string join_chunks(std::string_view text, bool drop_urls) {
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        std::size_t end = pos;
        while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
        if (end > pos) {
            const auto chunk = text.substr(pos, end - pos);
            if (!(drop_urls && is_url_chunk(chunk))) {
                if (!out.empty()) out.push_back(' ');
                out.append(chunk);
            }
        }
        pos = end;
    }
    return out;
}

std::vector<LabelId> resolve_labels(const std::vector<std::string>& names, const LabelSet& labels,
                                    std::string_view where) {
    std::vector<LabelId> ids;
    ids.reserve(names.size());
    for (const auto& name : names) {
        const auto id = labels.find(name);
        if (!id) throw InputError(std::string(where) + ": unknown label '" + name + "'");
        ids.push_back(*id);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = text.find(sep, start);
        parts.emplace_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

struct RawRecord {
    std::string id;
    std::string text;
    std::optional<std::vector<std::string>> labels;
    std::optional<std::string> event;
};

RawRecord parse_jsonl_record(std::string_view line, std::string_view where) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string(where) + ": malformed JSON (" + e.what() + ")");
    }
    if (!j.is_object()) throw InputError(std::string(where) + ": record is not a JSON object");
    RawRecord rec;
    try {
        if (!j.contains("id") || !j.contains("text")) throw InputError(std::string(where) + ": missing 'id' or 'text'");
        const auto& id = j.at("id");
        rec.id = id.is_string() ? id.get<std::string>() : id.dump();
        rec.text = j.at("text").get<std::string>();
        if (j.contains("labels") && !j.at("labels").is_null()) {
            rec.labels = j.at("labels").get<std::vector<std::string>>();
        }
        if (j.contains("event") && !j.at("event").is_null()) rec.event = j.at("event").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string(where) + ": bad field type (" + e.what() + ")");
    }
    return rec;
}

}  // namespace

std::string_view to_string(TaskMode mode) {
    return mode == TaskMode::SingleLabel ? "single-label" : "multi-label";
}

TaskMode parse_task_mode(std::string_view text) {
    if (text == "single-label" || text == "single") return TaskMode::SingleLabel;
    if (text == "multi-label" || text == "multi") return TaskMode::MultiLabel;
    throw InputError("unknown task mode '" + std::string(text) + "'");
}

std::string normalize_text(std::string_view raw) {
    const std::string lowered = nfc_lower(raw);
    const std::string without_urls = join_chunks(lowered, true);
    const auto unicode = icu::UnicodeString::fromUTF8(
        icu::StringPiece(without_urls.data(), static_cast<int32_t>(without_urls.size())));
    return join_chunks(strip_punctuation(unicode), false);
}

std::vector<std::string> tokenize(std::string_view normalized) {
    std::vector<std::string> tokens;
    std::size_t pos = 0;
    while (pos < normalized.size()) {
        while (pos < normalized.size() && normalized[pos] == ' ') ++pos;
        std::size_t end = pos;
        while (end < normalized.size() && normalized[end] != ' ') ++end;
        if (end > pos) tokens.emplace_back(normalized.substr(pos, end - pos));
        pos = end;
    }
    return tokens;
}

LabelSet::LabelSet(std::vector<std::string> surface_names) {
    names_.reserve(surface_names.size());
    for (auto& raw : surface_names) {
        std::string name = normalize_text(raw);
        if (name.empty()) throw InputError("label surface name '" + raw + "' is empty after normalization");
        if (!index_.emplace(name, names_.size()).second) {
            throw InputError("duplicate label surface name '" + name + "'");
        }
        names_.push_back(std::move(name));
    }
}

LabelSet LabelSet::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open label file " + path.string());
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        names.push_back(t);
    }
    if (names.empty()) throw InputError("label file " + path.string() + " contains no labels");
    return LabelSet(std::move(names));
}

std::optional<LabelId> LabelSet::find(std::string_view surface_name) const {
    auto it = index_.find(normalize_text(surface_name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

bool Dataset::fully_labelled() const {
    return std::all_of(documents.begin(), documents.end(),
                       [](const Document& d) { return d.gold_labels.has_value(); });
}

CorpusFormat format_from_path(const std::filesystem::path& path) {
    return path.extension() == ".tsv" ? CorpusFormat::Tsv : CorpusFormat::Jsonl;
}

Dataset read_corpus(std::istream& in, CorpusFormat format, const LabelSet& labels, TaskMode mode,
                    std::string_view source_name) {
    Dataset dataset{.documents = {}, .labels = labels, .mode = mode};
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;

    // TSV column positions, resolved from the header.
    std::size_t col_id = 0, col_text = 0;
    std::optional<std::size_t> col_labels, col_event;
    std::size_t columns = 0;
    if (format == CorpusFormat::Tsv) {
        if (!std::getline(in, line)) throw InputError(std::string(source_name) + ": missing TSV header");
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto header = split(line, '\t');
        columns = header.size();
        std::optional<std::size_t> id_pos, text_pos;
        for (std::size_t i = 0; i < header.size(); ++i) {
            const auto name = trim(header[i]);
            if (name == "id") id_pos = i;
            else if (name == "text") text_pos = i;
            else if (name == "labels") col_labels = i;
            else if (name == "event_id") col_event = i;
        }
        if (!id_pos || !text_pos) {
            throw InputError(std::string(source_name) + ":1: TSV header must name 'id' and 'text' columns");
        }
        col_id = *id_pos;
        col_text = *text_pos;
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const std::string where = std::string(source_name) + ":" + std::to_string(line_no);

        RawRecord rec;
        if (format == CorpusFormat::Jsonl) {
            rec = parse_jsonl_record(line, where);
        } else {
            const auto fields = split(line, '\t');
            if (fields.size() != columns) {
                throw InputError(where + ": expected " + std::to_string(columns) + " TSV fields, found " +
                                 std::to_string(fields.size()));
            }
            rec.id = trim(fields[col_id]);
            rec.text = fields[col_text];
            if (col_labels) {
                const auto cell = trim(fields[*col_labels]);
                if (!cell.empty()) {
                    std::vector<std::string> names;
                    for (const auto& part : split(cell, ',')) {
                        if (auto t = trim(part); !t.empty()) names.push_back(std::move(t));
                    }
                    rec.labels = std::move(names);
                }
            }
            if (col_event) {
                if (auto e = trim(fields[*col_event]); !e.empty()) rec.event = std::move(e);
            }
        }

        if (rec.id.empty()) throw InputError(where + ": empty document id");
        if (!seen.insert(rec.id).second) throw InputError(where + ": duplicate document id '" + rec.id + "'");

        Document doc;
        doc.id = std::move(rec.id);
        doc.text = normalize_text(rec.text);
        if (doc.text.empty()) throw InputError(where + ": text of document '" + doc.id + "' is empty after normalization");
        if (rec.labels) {
            doc.gold_labels = resolve_labels(*rec.labels, labels, where);
            if (mode == TaskMode::SingleLabel && doc.gold_labels->size() != 1) {
                throw InputError(where + ": single-label document '" + doc.id + "' must carry exactly one label");
            }
        }
        doc.event_id = std::move(rec.event);
        dataset.documents.push_back(std::move(doc));
    }
    return dataset;
}

Dataset load_corpus(const std::filesystem::path& path, CorpusFormat format, const LabelSet& labels,
                    TaskMode mode) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open corpus " + path.string());
    return read_corpus(in, format, labels, mode, path.string());
}

void write_corpus(std::ostream& out, const Dataset& dataset) {
    for (const auto& doc : dataset.documents) {
        nlohmann::json j = {{"id", doc.id}, {"text", doc.text}};
        if (doc.gold_labels) {
            auto names = nlohmann::json::array();
            for (auto id : *doc.gold_labels) names.push_back(dataset.labels.name(id));
            j["labels"] = std::move(names);
        }
        if (doc.event_id) j["event"] = *doc.event_id;
        out << j.dump() << '\n';
    }
}

const NGramSet* NGramIndex::find(std::string_view document_id) const {
    auto it = position_.find(std::string(document_id));
    return it == position_.end() ? nullptr : &per_document[it->second];
}

NGramSet document_ngrams(const std::vector<std::string>& tokens, std::size_t n_max) {
    NGramSet grams;
    for (std::size_t start = 0; start < tokens.size(); ++start) {
        std::string gram;
        for (std::size_t width = 1; width <= n_max && start + width <= tokens.size(); ++width) {
            if (width > 1) gram.push_back(' ');
            gram += tokens[start + width - 1];
            grams.insert(gram);
        }
    }
    return grams;
}

NGramIndex extract_ngrams(const Dataset& dataset, std::size_t n_max, std::size_t max_tokens) {
    if (n_max < 1 || n_max > 3) throw InputError("n_max must be in [1, 3]");
    if (dataset.documents.empty()) throw InputError("cannot extract n-grams from an empty dataset");
    NGramIndex index;
    index.n_max = n_max;
    index.document_ids.reserve(dataset.size());
    index.per_document.reserve(dataset.size());
    for (const auto& doc : dataset.documents) {
        auto tokens = tokenize(doc.text);
        if (tokens.size() > max_tokens) tokens.resize(max_tokens);
        auto grams = document_ngrams(tokens, n_max);
        for (const auto& g : grams) ++index.global_pool[g];
        index.position_.emplace(doc.id, index.per_document.size());
        index.document_ids.push_back(doc.id);
        index.per_document.push_back(std::move(grams));
    }
    return index;
}

}  // namespace weaklab
