// Acceptance suite: one PASS/FAIL line per criterion, each checked against
// its tolerance and wall-clock limit. Exit status is non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "weaklab/classifier.hpp"
#include "weaklab/label_expansion.hpp"
#include "weaklab/metrics.hpp"
#include "weaklab/pipeline.hpp"
#include "weaklab/pseudo_label.hpp"
#include "weaklab/self_training.hpp"
#include "weaklab/triage_ensemble.hpp"

namespace fs = std::filesystem;
using namespace weaklab;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Check {
public:
    explicit Check(Outcome& out) : out_(out) {}
    void require(bool condition, const std::string& what) {
        if (!condition && out_.pass) {
            out_.pass = false;
            out_.detail = what;
        }
    }

private:
    Outcome& out_;
};

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

std::size_t below(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> p(n);
    double total = 0.0;
    for (auto& v : p) total += (v = uniform(rng, 0.01, 1.0));
    for (auto& v : p) v /= total;
    return p;
}

fs::path fixture_dir() { return WEAKLAB_FIXTURE_DIR; }

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("weaklab_acceptance_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

PipelineConfig fixture_config(std::uint64_t seed, const fs::path& out) {
    auto config = PipelineConfig::load(fixture_dir() / "config.json");
    config.seed = seed;
    config.output_dir = out;
    return config;
}

// ---------------------------------------------------------------------------

Outcome discounting_exactness() {
    Outcome out;
    Check check(out);
    std::mt19937_64 rng(11);
    double worst = 0.0;
    for (int t = 0; t < 500; ++t) {
        const std::size_t n = 2 + below(rng, 49);
        const std::size_t lf = 2 + below(rng, n - 1);
        const double raw = uniform(rng, -1.0, 1.0);
        const double expected = static_cast<double>(static_cast<long double>(raw) *
                                                    (std::log(static_cast<long double>(n)) -
                                                     std::log(static_cast<long double>(lf))));
        const double got = discounted_score(raw, n, lf);
        worst = std::max(worst, std::abs(got - expected));
        check.require(std::abs(got - expected) <= 1e-12, "s != raw*ln(n/LF) for n=" + std::to_string(n));
        check.require(discounted_score(raw, n, n) == 0.0, "LF = n did not give exactly 0");
    }
    if (out.pass) out.detail = "max |err| " + std::to_string(worst);
    return out;
}

std::vector<LabelVocabulary> vocabularies_with_sizes(const std::vector<std::size_t>& sizes) {
    std::vector<LabelVocabulary> vocabs;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        LabelVocabulary v;
        v.label_id = i;
        v.name = "l" + std::to_string(i);
        for (std::size_t k = 0; k < sizes[i]; ++k) v.entries.push_back({"p" + std::to_string(k), 0.9, 0.5});
        vocabs.push_back(std::move(v));
    }
    return vocabs;
}

Outcome epsilon_rule() {
    Outcome out;
    Check check(out);
    for (std::size_t n = 2; n <= 25; ++n) {
        const double ln_n = std::log(static_cast<double>(n));
        std::vector<std::size_t> sizes(n, 10);
        check.require(std::abs(compute_epsilon(vocabularies_with_sizes(sizes), n) - ln_n) <= 1e-12,
                      "K = 10 everywhere should give ln n at n=" + std::to_string(n));
        sizes[n - 1] = 9;
        check.require(std::abs(compute_epsilon(vocabularies_with_sizes(sizes), n) - ln_n / 2.0) <= 1e-12,
                      "K = 9 should halve at n=" + std::to_string(n));
        std::vector<std::size_t> large(n, 100);
        large[0] = 10;
        check.require(std::abs(compute_epsilon(vocabularies_with_sizes(large), n) - ln_n) <= 1e-12,
                      "min K = 10 must not halve at n=" + std::to_string(n));
    }
    check.require(std::abs(compute_epsilon(vocabularies_with_sizes(std::vector<std::size_t>(11, 12)), 11) - 2.397895) <
                      1e-6,
                  "ln 11 example");
    if (out.pass) out.detail = "n = 2..25, K in {9, 10}";
    return out;
}

// Brute-force pseudo-labelling: slide every phrase over the token list.
bool phrase_occurs(const std::vector<std::string>& tokens, const std::vector<std::string>& phrase) {
    if (phrase.size() > tokens.size()) return false;
    for (std::size_t start = 0; start + phrase.size() <= tokens.size(); ++start) {
        bool all = true;
        for (std::size_t k = 0; k < phrase.size() && all; ++k) all = tokens[start + k] == phrase[k];
        if (all) return true;
    }
    return false;
}

Outcome pla_oracle_equivalence() {
    Outcome out;
    Check check(out);
    std::mt19937_64 rng(23);
    const std::vector<std::string> alphabet = {"a", "b", "c", "d", "e", "f", "g", "h"};
    std::size_t labelled_total = 0;
    for (int instance = 0; instance < 200; ++instance) {
        const std::size_t n_labels = 2 + below(rng, 4);
        const std::size_t n_docs = 1 + below(rng, 50);
        const TaskMode mode = instance % 2 == 0 ? TaskMode::SingleLabel : TaskMode::MultiLabel;
        std::vector<std::string> names;
        for (std::size_t i = 0; i < n_labels; ++i) names.push_back("label" + std::to_string(i));
        Dataset dataset{{}, LabelSet(names), mode};
        std::vector<std::vector<std::string>> doc_tokens;
        for (std::size_t d = 0; d < n_docs; ++d) {
            std::vector<std::string> tokens(1 + below(rng, 12));
            std::string text;
            for (auto& t : tokens) {
                t = alphabet[below(rng, alphabet.size())];
                text += (text.empty() ? "" : " ") + t;
            }
            doc_tokens.push_back(tokens);
            dataset.documents.push_back({"d" + std::to_string(d), text, std::nullopt, std::nullopt});
        }

        std::vector<LabelVocabulary> vocabs;
        std::vector<std::vector<std::pair<std::vector<std::string>, double>>> oracle_vocab;
        for (std::size_t i = 0; i < n_labels; ++i) {
            LabelVocabulary v;
            v.label_id = i;
            v.name = names[i];
            std::set<std::string> seen;
            std::vector<std::pair<std::vector<std::string>, double>> phrases;
            const std::size_t k = 1 + below(rng, 20);
            while (v.entries.size() < k) {
                std::vector<std::string> words(1 + below(rng, 3));
                std::string phrase;
                for (auto& w : words) {
                    w = alphabet[below(rng, alphabet.size())];
                    phrase += (phrase.empty() ? "" : " ") + w;
                }
                if (!seen.insert(phrase).second) continue;
                const double score = uniform(rng, 0.0, 1.5);
                v.entries.push_back({phrase, score, score});
                phrases.emplace_back(words, score);
            }
            vocabs.push_back(std::move(v));
            oracle_vocab.push_back(std::move(phrases));
        }

        const auto index = extract_ngrams(dataset);
        const auto result = pseudo_label_corpus(dataset, index, vocabs, mode);

        std::size_t min_k = SIZE_MAX;
        for (const auto& v : oracle_vocab) min_k = std::min(min_k, v.size());
        double eps = std::log(static_cast<double>(n_labels));
        if (min_k < 10) eps /= 2.0;
        check.require(std::abs(result.epsilon - eps) <= 1e-12, "epsilon mismatch");

        std::map<std::string, std::pair<std::vector<LabelId>, std::vector<double>>> expected;
        std::set<std::string> expected_residual;
        for (std::size_t d = 0; d < n_docs; ++d) {
            std::vector<double> scores(n_labels, 0.0);
            for (std::size_t i = 0; i < n_labels; ++i) {
                for (const auto& [words, s] : oracle_vocab[i]) {
                    if (phrase_occurs(doc_tokens[d], words)) scores[i] += s;
                }
            }
            std::vector<LabelId> labels;
            if (mode == TaskMode::SingleLabel) {
                std::size_t best = 0;
                for (std::size_t i = 1; i < n_labels; ++i) {
                    if (scores[i] > scores[best]) best = i;
                }
                if (scores[best] > eps) labels.push_back(best);
            } else {
                for (std::size_t i = 0; i < n_labels; ++i) {
                    if (scores[i] > eps) labels.push_back(i);
                }
            }
            const auto id = "d" + std::to_string(d);
            if (labels.empty()) {
                expected_residual.insert(id);
            } else {
                expected[id] = {labels, scores};
            }
        }

        check.require(result.labelled.size() == expected.size(), "labelled count mismatch");
        check.require(result.residual.size() == expected_residual.size(), "residual count mismatch");
        labelled_total += result.labelled.size();
        for (const auto& ex : result.labelled) {
            const auto it = expected.find(ex.document_id);
            if (it == expected.end()) {
                check.require(false, "unexpected pseudo-labelled document " + ex.document_id);
                continue;
            }
            check.require(ex.labels == it->second.first, "label assignment mismatch for " + ex.document_id);
            for (std::size_t i = 0; i < n_labels; ++i) {
                check.require(std::abs(ex.scores.at(i) - it->second.second[i]) <= 1e-9, "score mismatch");
            }
        }
        for (const auto& row : result.residual) {
            check.require(expected_residual.count(row.document_id) == 1, "unexpected residual " + row.document_id);
        }
    }
    if (out.pass) out.detail = "200 instances, " + std::to_string(labelled_total) + " labelled documents";
    return out;
}

Outcome soft_target_identities() {
    Outcome out;
    Check check(out);
    std::mt19937_64 rng(31);
    for (int t = 0; t < 100; ++t) {
        const Matrix p = {random_distribution(rng, 2 + below(rng, 6))};
        const auto q = soft_targets(p);
        for (std::size_t j = 0; j < p[0].size(); ++j) {
            check.require(std::abs(q[0][j] - p[0][j]) <= 1e-12, "M = 1 did not reproduce P");
        }
    }
    for (std::size_t n = 2; n <= 6; ++n) {
        const Matrix p(7, Vector(n, 1.0 / static_cast<double>(n)));
        for (const auto& row : soft_targets(p)) {
            for (double v : row) check.require(std::abs(v - 1.0 / static_cast<double>(n)) <= 1e-12, "uniform P");
        }
    }
    // Worked 2x2 example, recomputed by hand: f = (1.2, 0.8).
    const auto q = soft_targets({{0.8, 0.2}, {0.4, 0.6}});
    const double r0a = 0.64 / 1.2, r0b = 0.04 / 0.8, r1a = 0.16 / 1.2, r1b = 0.36 / 0.8;
    check.require(std::abs(q[0][0] - 0.91429) <= 1e-5 && std::abs(q[0][0] - r0a / (r0a + r0b)) <= 1e-6, "q00");
    check.require(std::abs(q[0][1] - 0.08571) <= 1e-5 && std::abs(q[0][1] - r0b / (r0a + r0b)) <= 1e-6, "q01");
    check.require(std::abs(q[1][0] - 0.22857) <= 1e-5 && std::abs(q[1][0] - r1a / (r1a + r1b)) <= 1e-6, "q10");
    check.require(std::abs(q[1][1] - 0.77143) <= 1e-5 && std::abs(q[1][1] - r1b / (r1a + r1b)) <= 1e-6, "q11");

    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t m = 1 + below(rng, 40), n = 2 + below(rng, 6);
        Matrix p(m);
        for (auto& row : p) row = random_distribution(rng, n);
        for (const auto& row : soft_targets(p)) {
            double sum = 0.0;
            for (double v : row) {
                check.require(v >= 0.0, "negative soft target");
                sum += v;
            }
            worst = std::max(worst, std::abs(sum - 1.0));
        }
    }
    check.require(worst <= 1e-9, "row sum off by " + std::to_string(worst));
    if (out.pass) out.detail = "worst row-sum error " + std::to_string(worst);
    return out;
}

Outcome kl_properties() {
    Outcome out;
    Check check(out);
    std::mt19937_64 rng(37);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t m = 1 + below(rng, 10), n = 2 + below(rng, 6);
        Matrix q(m), p(m);
        for (std::size_t i = 0; i < m; ++i) {
            q[i] = random_distribution(rng, n);
            p[i] = random_distribution(rng, n);
            if (rng() % 4 == 0) {
                std::fill(q[i].begin(), q[i].end(), 0.0);
                q[i][below(rng, n)] = 1.0;
            }
        }
        check.require(kl_divergence(q, p) >= 0.0, "negative KL");
        check.require(std::abs(kl_divergence(p, p)) <= 1e-12, "KL(P, P) != 0");
    }
    check.require(std::abs(kl_divergence({{1.0, 0.0}}, {{0.5, 0.5}}) - std::log(2.0)) <= 1e-9, "ln 2 case");
    for (std::size_t n = 2; n <= 12; ++n) {
        Vector one_hot_row(n, 0.0);
        one_hot_row[n - 1] = 1.0;
        const Vector uniform_row(n, 1.0 / static_cast<double>(n));
        const double per_row = std::log(static_cast<double>(n));
        check.require(std::abs(kl_divergence({one_hot_row}, {uniform_row}) - per_row) <= 1e-9, "ln n case");
        check.require(std::abs(kl_divergence({one_hot_row, one_hot_row, one_hot_row},
                                             {uniform_row, uniform_row, uniform_row}) -
                               3.0 * per_row) <= 1e-9,
                      "ln n summed over rows");
    }
    if (out.pass) out.detail = "1000 random pairs, ln 2 and ln n for n = 2..12";
    return out;
}

Outcome gradient_check() {
    Outcome out;
    Check check(out);
    std::mt19937_64 rng(41);
    double worst = 0.0;
    for (const auto mode : {OutputMode::Softmax, OutputMode::Sigmoid}) {
        for (int t = 0; t < 50; ++t) {
            const std::size_t n = 2 + below(rng, 3), d = 1 + below(rng, 8), m = 1 + below(rng, 6);
            LinearClassifier model(n, d, mode);
            for (auto& w : model.weights()) w = uniform(rng, -1.0, 1.0);
            for (auto& b : model.bias()) b = uniform(rng, -1.0, 1.0);
            std::vector<Vector> x(m), y(m);
            for (std::size_t i = 0; i < m; ++i) {
                x[i].resize(d);
                for (auto& v : x[i]) v = uniform(rng, -1.0, 1.0);
                if (mode == OutputMode::Softmax) {
                    y[i] = random_distribution(rng, n);
                } else {
                    y[i].resize(n);
                    for (auto& v : y[i]) v = uniform(rng, 0.0, 1.0);
                }
            }
            LinearGradient analytic;
            model.loss_and_gradient(x, y, analytic);

            const double h = 1e-5;
            auto numeric = [&](double& param) {
                const double saved = param;
                param = saved + h;
                const double up = model.loss(x, y);
                param = saved - h;
                const double down = model.loss(x, y);
                param = saved;
                return (up - down) / (2.0 * h);
            };
            double diff = 0.0, scale = 0.0;
            auto accumulate = [&](double a, double f) {
                diff += (a - f) * (a - f);
                scale += a * a + f * f;
            };
            auto weights = model.weights();
            for (std::size_t k = 0; k < weights.size(); ++k) accumulate(analytic.weights[k], numeric(weights[k]));
            auto bias = model.bias();
            for (std::size_t k = 0; k < bias.size(); ++k) accumulate(analytic.bias[k], numeric(bias[k]));
            const double rel = scale > 0.0 ? std::sqrt(diff) / std::sqrt(scale) : 0.0;
            worst = std::max(worst, rel);
            check.require(rel <= 1e-4, std::string(to_string(mode)) + " gradient relative error " + std::to_string(rel));
        }
    }
    if (out.pass) out.detail = "worst relative error " + std::to_string(worst);
    return out;
}

struct BenchmarkRun {
    RunSummary summary;
    double surface_accuracy = 0.0;
};

BenchmarkRun run_benchmark(std::uint64_t seed, const std::string& tag) {
    const auto config = fixture_config(seed, scratch_dir(tag + std::to_string(seed)));
    auto provider = make_provider(config);
    BenchmarkRun run;
    run.summary = run_pipeline(config, *provider);
    const auto test = load_dataset(config, config.test);
    const auto surface = surface_name_predictions(test, *provider);
    std::vector<LabelId> gold;
    for (const auto& d : test.documents) gold.push_back(d.gold_labels->front());
    run.surface_accuracy = accuracy(surface, gold);
    return run;
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(4);
    s << std::fixed << v;
    return s.str();
}

Outcome synthetic_benchmark() {
    Outcome out;
    Check check(out);
    double precision = 0, coverage = 0, acc = 0, delta = 0;
    const int seeds = 5;
    for (int seed = 1; seed <= seeds; ++seed) {
        const auto run = run_benchmark(static_cast<std::uint64_t>(seed), "bench");
        precision += run.summary.pseudo.precision / seeds;
        coverage += run.summary.pseudo.coverage / seeds;
        acc += run.summary.accuracy_final / seeds;
        delta += (run.summary.accuracy_final - run.summary.accuracy_pretrained) / seeds;
    }
    check.require(precision >= 0.90, "pseudo-label precision " + fmt(precision) + " < 0.90");
    check.require(coverage >= 0.30, "coverage " + fmt(coverage) + " < 0.30");
    check.require(acc >= 0.90, "accuracy " + fmt(acc) + " < 0.90");
    check.require(delta >= -0.01, "self-training delta " + fmt(delta) + " < -0.01");
    if (out.pass) {
        out.detail = "precision " + fmt(precision) + ", coverage " + fmt(coverage) + ", accuracy " + fmt(acc) +
                     ", delta " + fmt(delta);
    }
    return out;
}

Outcome ablation_ordering() {
    Outcome out;
    Check check(out);
    double full = 0, no_self = 0, surface = 0;
    const int seeds = 5;
    for (int seed = 1; seed <= seeds; ++seed) {
        const auto run = run_benchmark(static_cast<std::uint64_t>(seed), "ablation");
        full += run.summary.accuracy_final / seeds;
        no_self += run.summary.accuracy_pretrained / seeds;
        surface += run.surface_accuracy / seeds;
    }
    check.require(full >= no_self, "full " + fmt(full) + " < no-self-training " + fmt(no_self));
    check.require(no_self >= surface, "no-self-training " + fmt(no_self) + " < surface-name " + fmt(surface));
    if (out.pass) {
        out.detail = "full " + fmt(full) + " >= no-self-training " + fmt(no_self) + " >= surface-name " + fmt(surface);
    }
    return out;
}

Outcome metrics_oracle() {
    Outcome out;
    Check check(out);
    std::mt19937_64 rng(53);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + below(rng, 5), m = 1 + below(rng, 100);
        std::vector<LabelId> pred(m), gold(m);
        for (std::size_t i = 0; i < m; ++i) {
            gold[i] = below(rng, n);
            pred[i] = rng() % 3 == 0 ? below(rng, n) : gold[i];
        }
        std::size_t correct = 0;
        for (std::size_t i = 0; i < m; ++i) correct += pred[i] == gold[i];
        const double naive_acc = static_cast<double>(correct) / static_cast<double>(m);

        std::vector<double> f1(n), support(n);
        double sum_tp = 0, sum_fp = 0, sum_fn = 0;
        for (std::size_t c = 0; c < n; ++c) {
            double tp = 0, fp = 0, fn = 0;
            for (std::size_t i = 0; i < m; ++i) {
                if (pred[i] == c && gold[i] == c) ++tp;
                if (pred[i] == c && gold[i] != c) ++fp;
                if (pred[i] != c && gold[i] == c) ++fn;
            }
            f1[c] = tp + fp + fn == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
            support[c] = tp + fn;
            sum_tp += tp, sum_fp += fp, sum_fn += fn;
        }
        double macro = 0, weighted = 0;
        for (std::size_t c = 0; c < n; ++c) {
            macro += f1[c] / static_cast<double>(n);
            weighted += f1[c] * support[c] / static_cast<double>(m);
        }
        const double micro = 2 * sum_tp / (2 * sum_tp + sum_fp + sum_fn);

        const auto scores = f1_scores(confusion_counts(pred, gold, n));
        check.require(std::abs(accuracy(pred, gold) - naive_acc) <= 1e-9, "accuracy");
        check.require(std::abs(scores.micro - micro) <= 1e-9, "micro-F1");
        check.require(std::abs(scores.macro - macro) <= 1e-9, "macro-F1");
        check.require(std::abs(scores.weighted - weighted) <= 1e-9, "weighted-F1");
        for (std::size_t c = 0; c < n; ++c) check.require(std::abs(scores.f1[c] - f1[c]) <= 1e-9, "per-class F1");
        check.require(std::abs(scores.micro - naive_acc) <= 1e-9, "micro-F1 != accuracy");
    }

    // Two classes with F1 (1, 0) and supports (9, 1).
    LabelSetList gold(10, {0}), pred(10, {0});
    gold[9] = {1};
    pred[9] = {};
    const auto worked = f1_scores(confusion_counts(pred, gold, 2));
    check.require(worked.f1[0] == 1.0 && worked.f1[1] == 0.0, "worked example per-class F1");
    check.require(worked.macro == 0.5, "worked example macro " + std::to_string(worked.macro));
    check.require(worked.weighted == 0.9, "worked example weighted " + std::to_string(worked.weighted));
    if (out.pass) out.detail = "200 random instances, worked example macro 0.5 / weighted 0.9";
    return out;
}

std::vector<TriagePrediction> random_predictions(std::mt19937_64& rng, std::size_t count) {
    std::vector<TriagePrediction> preds;
    for (std::size_t k = 0; k < count; ++k) {
        TriagePrediction p;
        p.document_id = "doc";
        for (InfoTypeId t = 0; t < 8; ++t) {
            if (rng() % 2 == 0) p.info_types.insert(t);
        }
        p.priority = static_cast<PriorityLevel>(below(rng, 4));
        preds.push_back(std::move(p));
    }
    return preds;
}

Outcome ensemble_semantics() {
    Outcome out;
    Check check(out);
    std::mt19937_64 rng(59);
    for (int t = 0; t < 500; ++t) {
        const auto preds = random_predictions(rng, 1 + below(rng, 5));
        const auto uni = merge_info_types(preds, InfoTypeStrategy::Union);
        const auto inter = merge_info_types(preds, InfoTypeStrategy::Intersection);
        for (const auto& p : preds) {
            check.require(std::includes(uni.begin(), uni.end(), p.info_types.begin(), p.info_types.end()),
                          "union is not a superset");
            check.require(std::includes(p.info_types.begin(), p.info_types.end(), inter.begin(), inter.end()),
                          "intersection is not a subset");
        }
    }
    for (int t = 0; t < 500; ++t) {
        const auto preds = random_predictions(rng, 1 + below(rng, 6));
        const auto hi = merge_priorities(preds, PriorityStrategy::Highest);
        const auto avg = merge_priorities(preds, PriorityStrategy::Average);
        const auto lo = merge_priorities(preds, PriorityStrategy::Lowest);
        check.require(hi >= avg && avg >= lo, "Highest >= Average >= Lowest violated");
    }

    const std::map<PriorityLevel, double> schema = {{PriorityLevel::Critical, 1.0},
                                                    {PriorityLevel::High, 0.75},
                                                    {PriorityLevel::Medium, 0.5},
                                                    {PriorityLevel::Low, 0.25}};
    for (int t = 0; t < 200; ++t) {
        InfoTypeWeightTable table;
        for (InfoTypeId type = 0; type < 6; ++type) table.set(type, uniform(rng, 0.25, 1.0));
        InfoTypeSet types;
        for (InfoTypeId type = 0; type < 8; ++type) {
            if (rng() % 2 == 0) types.insert(type);
        }
        const auto level = static_cast<PriorityLevel>(below(rng, 4));
        double w = 0.25;
        if (!types.empty()) {
            double sum = 0.0;
            for (auto type : types) sum += table.weights().count(type) ? table.weights().at(type) : 0.25;
            w = sum / static_cast<double>(types.size());
        }
        check.require(combine_priority(types, table, level, 1.0) == schema.at(level), "lambda = 1 identity");
        check.require(combine_priority(types, table, level, 0.0) == w, "lambda = 0 identity");
    }
    check.require(map_score_to_level(0.75) == PriorityLevel::Critical, "0.75 must map to Critical");
    check.require(map_score_to_level(std::nextafter(0.75, 0.0)) == PriorityLevel::High, "just below 0.75");
    std::vector<TriagePrediction> pair(2);
    pair[0].priority = PriorityLevel::Critical;
    pair[1].priority = PriorityLevel::Medium;
    check.require(merge_priorities(pair, PriorityStrategy::Average) == PriorityLevel::Critical,
                  "{Critical, Medium} average must be Critical");
    if (out.pass) out.detail = "500 set merges, 500 priority multisets, boundary 0.75 -> Critical";
    return out;
}

Outcome determinism() {
    Outcome out;
    Check check(out);
    std::vector<fs::path> dirs;
    for (const char* tag : {"det_a", "det_b"}) {
        const auto config = fixture_config(7, scratch_dir(tag));
        auto provider = make_provider(config);
        run_pipeline(config, *provider);
        dirs.push_back(config.output_dir);
    }
    const std::vector<std::string> compared = {files::kVocabulary,  files::kPseudoLabels,       files::kResidual,
                                               files::kModel,       files::kSelfTrainedModel,   files::kLossTrace,
                                               files::kPredictions, files::kReportJson,         files::kReportText};
    for (const auto& name : compared) {
        auto slurp = [](const fs::path& p) {
            std::ifstream in(p, std::ios::binary);
            return std::string(std::istreambuf_iterator<char>(in), {});
        };
        const auto a = slurp(dirs[0] / name), b = slurp(dirs[1] / name);
        check.require(!a.empty(), name + " missing or empty");
        check.require(a == b, name + " differs between runs");
    }
    if (out.pass) out.detail = std::to_string(compared.size()) + " files byte-identical";
    return out;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        double limit_seconds;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {"discounting exactness", 1.0, discounting_exactness},
        {"epsilon rule", 1.0, epsilon_rule},
        {"pseudo-label oracle equivalence", 10.0, pla_oracle_equivalence},
        {"soft-target identities", 5.0, soft_target_identities},
        {"KL properties", 2.0, kl_properties},
        {"classifier gradient check", 10.0, gradient_check},
        {"end-to-end synthetic benchmark", 60.0, synthetic_benchmark},
        {"ablation ordering", 120.0, ablation_ordering},
        {"metrics oracle", 5.0, metrics_oracle},
        {"ensemble semantics", 2.0, ensemble_semantics},
        {"determinism", 120.0, determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (elapsed > c.limit_seconds) {
            outcome.pass = false;
            outcome.detail += " [runtime " + fmt(elapsed) + "s exceeds " + fmt(c.limit_seconds) + "s]";
        }
        failures += outcome.pass ? 0 : 1;
        std::cout << (outcome.pass ? "PASS" : "FAIL") << "  " << c.name << "  (" << outcome.detail << "; "
                  << fmt(elapsed) << "s of " << fmt(c.limit_seconds) << "s)\n";
    }
    fs::remove_all(fs::temp_directory_path() / ("weaklab_acceptance_" + std::to_string(::getpid())));
    std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
              << '\n';
    return failures == 0 ? 0 : 1;
}
