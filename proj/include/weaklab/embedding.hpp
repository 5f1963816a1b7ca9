#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "weaklab/lru_cache.hpp"

namespace weaklab {

using Vector = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

/// Scales to unit Euclidean norm. The zero vector is left untouched.
void normalize_in_place(std::span<double> v);

/// dot(a,b) / (|a| |b|), clamped to [-1, 1]. Zero against anything is 0.
/// Throws InputError on a dimension mismatch.
double cosine(std::span<const double> a, std::span<const double> b);

inline constexpr std::size_t kDefaultBuiltinDimension = 256;
inline constexpr std::size_t kDefaultCacheCapacity = 100'000;

/// Unit vector whose components are drawn uniform in [-1, 1] from a
/// counter-based generator keyed by (seed, stable hash of token). Bit-stable
/// across runs and platforms.
Vector builtin_token_vector(std::string_view token, std::size_t dimension, std::uint64_t seed);

/// Sentence/phrase embedder. Subclasses implement compute(); the base class
/// owns the exact-string LRU cache and result validation.
class EmbeddingProvider {
public:
    explicit EmbeddingProvider(std::size_t cache_capacity = kDefaultCacheCapacity);
    virtual ~EmbeddingProvider() = default;
    EmbeddingProvider(const EmbeddingProvider&) = delete;
    EmbeddingProvider& operator=(const EmbeddingProvider&) = delete;

    virtual std::size_t dimension() = 0;
    virtual std::string name() const = 0;

    /// One unit-norm vector per input, in input order. Thread-safe.
    std::vector<Vector> embed_batch(std::span<const std::string> texts);
    Vector embed(const std::string& text);

    std::size_t cache_size() const { return cache_.size(); }

protected:
    virtual std::vector<Vector> compute(std::span<const std::string> texts) = 0;

private:
    LruCache<std::string, Vector> cache_;
};

/// Deterministic offline provider: mean of per-token vectors, normalized.
/// Token order does not matter.
class BuiltinProvider final : public EmbeddingProvider {
public:
    explicit BuiltinProvider(std::uint64_t seed, std::size_t dimension = kDefaultBuiltinDimension,
                             std::size_t cache_capacity = kDefaultCacheCapacity);

    std::size_t dimension() override { return dimension_; }
    std::string name() const override;
    std::uint64_t seed() const noexcept { return seed_; }

protected:
    std::vector<Vector> compute(std::span<const std::string> texts) override;

private:
    std::size_t dimension_;
    std::uint64_t seed_;
};

/// Client for the embedding sidecar:
///   POST /embed {"texts": [...]} -> {"vectors": [[...]], "dimension": d, "model": m}
///   GET /health -> {"status": "ok", "dimension": d}
/// Every transport or protocol failure is a ServiceError.
class RemoteProvider final : public EmbeddingProvider {
public:
    struct Options {
        std::chrono::milliseconds timeout{30'000};
        std::size_t max_batch = 64;
        std::size_t cache_capacity = kDefaultCacheCapacity;
    };

    explicit RemoteProvider(std::string base_url);
    RemoteProvider(std::string base_url, Options options);
    ~RemoteProvider() override;

    /// Queries /health on first use.
    std::size_t dimension() override;
    std::string name() const override;
    const std::string& base_url() const noexcept { return base_url_; }

protected:
    std::vector<Vector> compute(std::span<const std::string> texts) override;

private:
    struct State;
    std::string base_url_;
    Options options_;
    std::unique_ptr<State> state_;
};

/// "builtin" → BuiltinProvider(seed, dimension); anything else is treated as
/// a sidecar base URL.
std::unique_ptr<EmbeddingProvider> make_provider(const std::string& spec, std::uint64_t seed,
                                                 std::size_t builtin_dimension = kDefaultBuiltinDimension);

}  // namespace weaklab
