#include "weaklab/synthetic.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "weaklab/errors.hpp"
#include "weaklab/io_util.hpp"
#include "weaklab/random.hpp"

namespace weaklab {

SyntheticSpec SyntheticSpec::crisis_default() {
    SyntheticSpec spec;
    spec.topics = {
        {"water",
         {"drinking", "thirst", "bottled", "wells", "purification", "tanker", "dehydration", "pipes", "hydration",
          "jerrycans", "sanitation", "reservoir", "tap"}},
        {"shelter",
         {"tents", "housing", "blankets", "camp", "roof", "homeless", "tarpaulin", "beds", "sleeping",
          "accommodation", "mattresses", "refuge", "dormitory"}},
        {"medical",
         {"doctors", "hospital", "injuries", "medicine", "nurses", "clinic", "ambulance", "surgery", "wounded",
          "vaccines", "bandages", "paramedics", "fever"}},
    };
    spec.filler = {"please", "urgent", "need", "help", "people", "today", "area", "city", "families", "now",
                   "many", "still", "we", "our", "the", "in", "for", "after", "storm", "flood"};
    return spec;
}

std::vector<SyntheticDocument> generate_documents(const SyntheticSpec& spec, std::size_t count,
                                                  std::string_view id_prefix, std::uint64_t seed) {
    if (spec.topics.empty()) throw InputError("synthetic spec has no topics");
    CounterRng rng(seed);
    auto pick = [&](const std::vector<std::string>& from) -> const std::string& { return from[rng.below(from.size())]; };
    auto between = [&](std::size_t lo, std::size_t hi) { return lo + static_cast<std::size_t>(rng.below(hi - lo + 1)); };

    std::vector<SyntheticDocument> docs;
    docs.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t label = k % spec.topics.size();
        const auto& topic = spec.topics[label];
        std::vector<std::string> tokens;
        if (rng.bernoulli(spec.name_probability)) tokens.push_back(topic.name);
        const std::size_t topical = between(spec.min_topical, spec.max_topical);
        for (std::size_t t = 0; t < topical; ++t) tokens.push_back(pick(topic.pool));
        const std::size_t filler = between(spec.min_filler, spec.max_filler);
        for (std::size_t t = 0; t < filler; ++t) tokens.push_back(pick(spec.filler));
        if (spec.topics.size() > 1 && rng.bernoulli(spec.noise_probability)) {
            std::size_t other = rng.below(spec.topics.size() - 1);
            if (other >= label) ++other;
            tokens.push_back(pick(spec.topics[other].pool));
        }
        rng.shuffle(std::span(tokens));

        std::string text;
        for (const auto& t : tokens) {
            if (!text.empty()) text.push_back(' ');
            text += t;
        }
        docs.push_back({std::string(id_prefix) + std::to_string(k), std::move(text), label});
    }
    return docs;
}

void write_synthetic_fixture(const std::filesystem::path& dir, const SyntheticSpec& spec, std::uint64_t seed) {
    auto jsonl = [&](const std::vector<SyntheticDocument>& docs) {
        std::ostringstream out;
        for (const auto& d : docs) {
            out << nlohmann::json{{"id", d.id}, {"text", d.text}, {"labels", {spec.topics[d.label].name}}}.dump()
                << '\n';
        }
        return out.str();
    };
    std::string labels;
    for (const auto& t : spec.topics) labels += t.name + "\n";

    const nlohmann::json config = {{"corpus", "corpus.jsonl"}, {"labels", "labels.txt"}, {"test", "test.jsonl"},
                                   {"mode", "single-label"},   {"provider", "builtin"},  {"seed", seed},
                                   {"output_dir", "out"}};
    write_file_atomic(dir / "labels.txt", labels);
    write_file_atomic(dir / "corpus.jsonl", jsonl(generate_documents(spec, spec.corpus_documents, "c", mix64(seed))));
    write_file_atomic(dir / "test.jsonl", jsonl(generate_documents(spec, spec.test_documents, "t", mix64(seed + 1))));
    write_file_atomic(dir / "config.json", config.dump(2) + "\n");
}

}  // namespace weaklab
