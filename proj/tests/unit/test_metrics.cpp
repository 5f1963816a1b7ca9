#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "weaklab/errors.hpp"
#include "weaklab/metrics.hpp"

using namespace weaklab;

namespace {

std::vector<LabelId> ids(std::initializer_list<LabelId> v) { return v; }

}  // namespace

TEST_CASE("accuracy examples") {
    CHECK(accuracy(ids({0, 1, 2}), ids({0, 1, 2})) == 1.0);
    CHECK(accuracy(ids({1, 2, 0}), ids({0, 1, 2})) == 0.0);
    CHECK(accuracy(ids({0, 1, 2, 2}), ids({0, 1, 2, 0})) == 0.75);
    CHECK_THROWS_AS(accuracy(ids({0}), ids({0, 1})), InputError);
    CHECK(accuracy(LabelSetList{{0, 1}, {2}}, LabelSetList{{0, 1}, {1}}) == 0.5);
}

TEST_CASE("F1 worked examples") {
    ConfusionCounts counts{{ClassCounts{2, 1, 1, 0}}, 4};
    CHECK(f1_scores(counts).f1[0] == doctest::Approx(2.0 / 3.0));

    const auto perfect = f1_scores(confusion_counts(ids({0, 1, 1, 2}), ids({0, 1, 1, 2}), 3));
    CHECK(perfect.micro == 1.0);
    CHECK(perfect.macro == 1.0);
    CHECK(perfect.weighted == 1.0);

    ConfusionCounts skew{{ClassCounts{9, 0, 0, 1}, ClassCounts{0, 0, 1, 9}}, 10};
    const auto s = f1_scores(skew);
    CHECK(s.macro == 0.5);
    CHECK(s.weighted == 0.9);
}

TEST_CASE("empty classes score zero") {
    const auto s = f1_scores(confusion_counts(ids({0, 0}), ids({0, 0}), 3));
    CHECK(s.f1[1] == 0.0);
    CHECK(s.precision[2] == 0.0);
    CHECK(s.recall[2] == 0.0);
    CHECK(s.weighted == 1.0);
    CHECK(s.macro == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("label-wise weighted F1 examples") {
    LabelSetList gold = {{0}, {0, 1}, {0}, {}};
    CHECK(labelwise_weighted_f1(gold, gold, 2) == 1.0);
    CHECK(labelwise_weighted_f1(LabelSetList(4), gold, 2) == 0.0);
    // Label A perfect over 3 occurrences; label B has TP=1, FP=2 -> F1 = 0.5.
    const LabelSetList pred = {{0, 1}, {0, 1}, {0, 1}, {}};
    CHECK(labelwise_weighted_f1(pred, gold, 2) == doctest::Approx(0.875).epsilon(1e-15));
}

TEST_CASE("label-wise weighted F1 equals support-weighted binary F1") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 2 + testing::below(rng, 4), m = 1 + testing::below(rng, 40);
        LabelSetList pred(m), gold(m);
        for (std::size_t i = 0; i < m; ++i) {
            for (LabelId l = 0; l < n; ++l) {
                if (testing::below(rng, 3) == 0) gold[i].push_back(l);
                if (testing::below(rng, 3) == 0) pred[i].push_back(l);
            }
        }
        double numerator = 0.0, total = 0.0;
        for (LabelId l = 0; l < n; ++l) {
            double tp = 0, fp = 0, fn = 0;
            for (std::size_t i = 0; i < m; ++i) {
                const bool p = std::count(pred[i].begin(), pred[i].end(), l) > 0;
                const bool g = std::count(gold[i].begin(), gold[i].end(), l) > 0;
                tp += p && g;
                fp += p && !g;
                fn += !p && g;
            }
            const double f1 = tp + fp + fn == 0 ? 0.0 : tp / (tp + 0.5 * (fp + fn));
            numerator += (tp + fn) * f1;
            total += tp + fn;
        }
        const double expected = total == 0 ? 0.0 : numerator / total;
        CHECK(labelwise_weighted_f1(pred, gold, n) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("metric invariants on random single-label predictions") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + testing::below(rng, 5), m = 1 + testing::below(rng, 100);
        std::vector<LabelId> pred(m), gold(m);
        for (std::size_t i = 0; i < m; ++i) {
            gold[i] = testing::below(rng, n);
            pred[i] = testing::below(rng, 2) ? gold[i] : testing::below(rng, n);
        }
        const auto counts = confusion_counts(pred, gold, n);
        for (const auto& c : counts.per_class) CHECK(c.tp + c.fp + c.fn + c.tn == m);
        const auto s = f1_scores(counts);
        CHECK(s.micro == doctest::Approx(accuracy(pred, gold)).epsilon(1e-12));
        std::vector<double> present;
        for (std::size_t c = 0; c < n; ++c) {
            if (s.support[c] > 0) present.push_back(s.f1[c]);
        }
        CHECK(s.weighted >= *std::min_element(present.begin(), present.end()) - 1e-12);
        CHECK(s.weighted <= *std::max_element(present.begin(), present.end()) + 1e-12);
        for (double v : {s.micro, s.macro, s.weighted}) CHECK((v >= 0.0 && v <= 1.0));

        // Relabelling both sides by the same permutation changes nothing.
        std::vector<LabelId> perm(n);
        for (std::size_t c = 0; c < n; ++c) perm[c] = (c + 1) % n;
        std::vector<LabelId> pp(m), gp(m);
        for (std::size_t i = 0; i < m; ++i) pp[i] = perm[pred[i]], gp[i] = perm[gold[i]];
        const auto sp = f1_scores(confusion_counts(pp, gp, n));
        CHECK(sp.micro == doctest::Approx(s.micro).epsilon(1e-12));
        CHECK(sp.macro == doctest::Approx(s.macro).epsilon(1e-12));
        CHECK(sp.weighted == doctest::Approx(s.weighted).epsilon(1e-12));
    }
}

TEST_CASE("macro equals weighted under equal supports") {
    const auto s = f1_scores(confusion_counts(ids({0, 1, 1, 2, 0, 2}), ids({0, 0, 1, 1, 2, 2}), 3));
    CHECK(s.macro == doctest::Approx(s.weighted).epsilon(1e-15));
}

TEST_CASE("NDCG examples") {
    CHECK(ndcg_at_k({{3, 2, 1, 0}}) == 1.0);
    CHECK(ndcg_at_k({{0, 1}}) == doctest::Approx(1.0 / std::log2(3.0)).epsilon(1e-15));
    CHECK(ndcg_at_k({{0, 1}}) == doctest::Approx(0.6309).epsilon(1e-4));
    CHECK(ndcg_at_k({{0, 0, 0}}) == 1.0);
    CHECK(ndcg_at_k({{0, 1}, {1, 0}}) == doctest::Approx((1.0 / std::log2(3.0) + 1.0) / 2));
    // Only the first k positions count.
    CHECK(ndcg_at_k({{0, 1}}, 1) == 0.0);
    CHECK_THROWS_AS(ndcg_at_k({{1.0}}, 0), InputError);
    CHECK_THROWS_AS(ndcg_at_k({{-1.0}}), InputError);
}

TEST_CASE("EvalReport renders JSON and text") {
    const LabelSet labels({"water", "shelter"});
    const auto report = evaluate(ids({0, 1, 1}), ids({0, 1, 0}), labels);
    const auto j = report.to_json();
    CHECK(j.at("accuracy").get<double>() == doctest::Approx(2.0 / 3.0));
    CHECK(j.at("per_class").size() == 2);
    CHECK(j.at("per_class")[0].at("label") == "water");
    CHECK_FALSE(j.contains("labelwise_weighted_f1"));
    const auto text = report.to_text();
    CHECK(text.find("shelter") != std::string::npos);
    CHECK(text.find("accuracy") != std::string::npos);

    const auto multi = evaluate(LabelSetList{{0, 1}, {1}}, LabelSetList{{0, 1}, {0}}, labels);
    CHECK(multi.to_json().contains("labelwise_weighted_f1"));
}
