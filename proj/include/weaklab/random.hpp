#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace weaklab {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// FNV-1a over the UTF-8 bytes. Stable across platforms and processes,
/// unlike std::hash.
constexpr std::uint64_t stable_hash64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Counter-based generator: the i-th output depends only on (key, i).
/// std::mt19937 + std distributions are not portable across standard
/// libraries, so every seeded operation in the pipeline goes through this.
class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(mix64(key)) {}

    constexpr std::uint64_t at(std::uint64_t counter) const noexcept {
        return mix64(key_ + (counter + 1) * 0x9e3779b97f4a7c15ULL);
    }

    constexpr std::uint64_t next() noexcept { return at(counter_++); }

    /// Uniform in [0, 1) with 53 bits of precision.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
    std::uint64_t below(std::uint64_t bound) noexcept {
        if (bound == 0) return 0;
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t x = next();
            const __uint128_t m = static_cast<__uint128_t>(x) * bound;
            if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
        }
    }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    template <typename T>
    void shuffle(std::span<T> items) noexcept {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace weaklab
