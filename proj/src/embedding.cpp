#include "weaklab/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <optional>
#include <unordered_map>

#include <httplib.h>
#include <json.hpp>

#include "weaklab/corpus_io.hpp"
#include "weaklab/errors.hpp"
#include "weaklab/random.hpp"

namespace weaklab {

double dot(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

void normalize_in_place(std::span<double> v) {
    const double norm = l2_norm(v);
    if (norm == 0.0) return;
    for (auto& x : v) x /= norm;
}

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw InputError("cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
    }
    const double na = l2_norm(a);
    const double nb = l2_norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

Vector builtin_token_vector(std::string_view token, std::size_t dimension, std::uint64_t seed) {
    if (token.empty()) throw InputError("builtin_token_vector: empty token");
    if (dimension == 0) throw InputError("builtin_token_vector: dimension must be positive");
    const CounterRng rng(mix64(seed) ^ stable_hash64(token));
    Vector v(dimension);
    for (std::size_t i = 0; i < dimension; ++i) {
        const double u = static_cast<double>(rng.at(i) >> 11) * 0x1.0p-53;
        v[i] = 2.0 * u - 1.0;
    }
    normalize_in_place(v);
    return v;
}

EmbeddingProvider::EmbeddingProvider(std::size_t cache_capacity) : cache_(cache_capacity) {}

std::vector<Vector> EmbeddingProvider::embed_batch(std::span<const std::string> texts) {
    std::vector<std::optional<Vector>> slots(texts.size());
    std::vector<std::string> missing;
    std::unordered_map<std::string, std::size_t> missing_index;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (texts[i].empty()) throw InputError("embed_batch: empty input string at position " + std::to_string(i));
        if (auto hit = cache_.get(texts[i])) {
            slots[i] = std::move(*hit);
        } else if (missing_index.emplace(texts[i], missing.size()).second) {
            missing.push_back(texts[i]);
        }
    }

    if (!missing.empty()) {
        auto computed = compute(missing);
        if (computed.size() != missing.size()) {
            throw ServiceError(name() + ": returned " + std::to_string(computed.size()) + " vectors for " +
                               std::to_string(missing.size()) + " inputs");
        }
        const std::size_t dim = dimension();
        for (std::size_t k = 0; k < computed.size(); ++k) {
            auto& v = computed[k];
            if (v.size() != dim) {
                throw ServiceError(name() + ": vector of dimension " + std::to_string(v.size()) + ", expected " +
                                   std::to_string(dim));
            }
            if (!std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); })) {
                throw ServiceError(name() + ": non-finite embedding for '" + missing[k] + "'");
            }
            normalize_in_place(v);
            cache_.put(missing[k], v);
        }
        for (std::size_t i = 0; i < texts.size(); ++i) {
            if (!slots[i]) slots[i] = computed[missing_index.at(texts[i])];
        }
    }

    std::vector<Vector> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

Vector EmbeddingProvider::embed(const std::string& text) {
    return std::move(embed_batch(std::span(&text, 1)).front());
}

BuiltinProvider::BuiltinProvider(std::uint64_t seed, std::size_t dimension, std::size_t cache_capacity)
    : EmbeddingProvider(cache_capacity), dimension_(dimension), seed_(seed) {
    if (dimension_ == 0) throw InputError("builtin provider dimension must be positive");
}

std::string BuiltinProvider::name() const {
    return "builtin-d" + std::to_string(dimension_) + "-s" + std::to_string(seed_);
}

std::vector<Vector> BuiltinProvider::compute(std::span<const std::string> texts) {
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        const auto tokens = tokenize(normalize_text(text));
        if (tokens.empty()) throw InputError("builtin provider: '" + text + "' has no tokens");
        Vector mean(dimension_, 0.0);
        for (const auto& tok : tokens) {
            const auto v = builtin_token_vector(tok, dimension_, seed_);
            for (std::size_t i = 0; i < dimension_; ++i) mean[i] += v[i];
        }
        for (auto& x : mean) x /= static_cast<double>(tokens.size());
        out.push_back(std::move(mean));
    }
    return out;
}

struct RemoteProvider::State {
    std::mutex mutex;
    std::optional<std::size_t> dimension;
    std::string model;
};

RemoteProvider::RemoteProvider(std::string base_url) : RemoteProvider(std::move(base_url), Options{}) {}

RemoteProvider::RemoteProvider(std::string base_url, Options options)
    : EmbeddingProvider(options.cache_capacity),
      base_url_(std::move(base_url)),
      options_(options),
      state_(std::make_unique<State>()) {
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
    if (!base_url_.starts_with("http://")) {
        throw InputError("remote provider: expected 'builtin' or an http:// URL, got '" + base_url_ + "'");
    }
    if (options_.max_batch == 0) throw InputError("remote provider: max_batch must be positive");
}

RemoteProvider::~RemoteProvider() = default;

namespace {

httplib::Client make_client(const std::string& base_url, std::chrono::milliseconds timeout) {
    httplib::Client client(base_url);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    return client;
}

nlohmann::json parse_body(const httplib::Result& res, const std::string& what) {
    if (!res) throw ServiceError(what + ": " + httplib::to_string(res.error()));
    if (res->status != 200) throw ServiceError(what + ": HTTP " + std::to_string(res->status));
    try {
        return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        throw ServiceError(what + ": invalid JSON response (" + e.what() + ")");
    }
}

}  // namespace

std::size_t RemoteProvider::dimension() {
    std::lock_guard lock(state_->mutex);
    if (state_->dimension) return *state_->dimension;
    auto client = make_client(base_url_, options_.timeout);
    const auto body = parse_body(client.Get("/health"), base_url_ + "/health");
    try {
        if (body.at("status").get<std::string>() != "ok") throw ServiceError(base_url_ + ": sidecar not ready");
        const auto dim = body.at("dimension").get<std::int64_t>();
        if (dim <= 0) throw ServiceError(base_url_ + ": non-positive dimension reported");
        state_->dimension = static_cast<std::size_t>(dim);
    } catch (const nlohmann::json::exception& e) {
        throw ServiceError(base_url_ + "/health: unexpected response (" + e.what() + ")");
    }
    return *state_->dimension;
}

std::string RemoteProvider::name() const {
    std::lock_guard lock(state_->mutex);
    return state_->model.empty() ? "remote:" + base_url_ : "remote:" + state_->model;
}

std::vector<Vector> RemoteProvider::compute(std::span<const std::string> texts) {
    const std::size_t dim = dimension();
    auto client = make_client(base_url_, options_.timeout);
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += options_.max_batch) {
        const auto count = std::min(options_.max_batch, texts.size() - start);
        const nlohmann::json request = {{"texts", texts.subspan(start, count)}};
        const auto body =
            parse_body(client.Post("/embed", request.dump(), "application/json"), base_url_ + "/embed");
        try {
            const auto reported = body.at("dimension").get<std::size_t>();
            if (reported != dim) {
                throw ServiceError(base_url_ + ": /embed dimension " + std::to_string(reported) +
                                   " differs from /health dimension " + std::to_string(dim));
            }
            const auto& vectors = body.at("vectors");
            if (vectors.size() != count) {
                throw ServiceError(base_url_ + ": /embed returned " + std::to_string(vectors.size()) +
                                   " vectors for " + std::to_string(count) + " texts");
            }
            for (const auto& v : vectors) out.push_back(v.get<Vector>());
            if (body.contains("model")) {
                std::lock_guard lock(state_->mutex);
                state_->model = body.at("model").get<std::string>();
            }
        } catch (const nlohmann::json::exception& e) {
            throw ServiceError(base_url_ + "/embed: unexpected response (" + e.what() + ")");
        }
    }
    return out;
}

std::unique_ptr<EmbeddingProvider> make_provider(const std::string& spec, std::uint64_t seed,
                                                 std::size_t builtin_dimension) {
    if (spec.empty() || spec == "builtin") return std::make_unique<BuiltinProvider>(seed, builtin_dimension);
    return std::make_unique<RemoteProvider>(spec);
}

}  // namespace weaklab
