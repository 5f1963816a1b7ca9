#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace weaklab {

/// Topical-pool corpus generator for the zero-shot benchmark. Each label
/// owns a disjoint pool of topical tokens; documents mix tokens from their
/// label's pool, sometimes the label name itself, and shared filler.
struct SyntheticSpec {
    struct Topic {
        std::string name;
        std::vector<std::string> pool;  // excludes the name
    };

    std::vector<Topic> topics;
    std::vector<std::string> filler;
    std::size_t corpus_documents = 300;
    std::size_t test_documents = 300;
    std::size_t min_topical = 4, max_topical = 6;
    std::size_t min_filler = 3, max_filler = 5;
    double name_probability = 0.65;  // chance the surface name appears
    double noise_probability = 0.1;  // chance of one token from another pool

    static SyntheticSpec crisis_default();
};

struct SyntheticDocument {
    std::string id;
    std::string text;
    std::size_t label = 0;
};

std::vector<SyntheticDocument> generate_documents(const SyntheticSpec& spec, std::size_t count,
                                                  std::string_view id_prefix, std::uint64_t seed);

/// Writes labels.txt, corpus.jsonl, test.jsonl and config.json into `dir`.
void write_synthetic_fixture(const std::filesystem::path& dir, const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace weaklab
