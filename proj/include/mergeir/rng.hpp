#pragma once

#include <cstdint>
#include <cstddef>
#include <string_view>
#include <vector>

namespace mergeir {

/// FNV-1a 64-bit hash. Stable across platforms; used for token ids and
/// per-tensor seed derivation.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

/// SplitMix64 step (Steele, Lea & Flood). Seeds the main generator and
/// decorrelates derived seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// xoshiro256** (Blackman & Vigna), seeded via SplitMix64. All randomness in
/// the library flows through this generator so outputs are bit-reproducible
/// for a given seed on any platform.
class Xoshiro256 {
  public:
    explicit Xoshiro256(std::uint64_t seed) {
        for (auto& word : state_) {
            word = splitmix64(seed);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform float in [0,1) from the top 24 bits; every arithmetic step is
    /// exact, so the value is identical on all IEEE platforms.
    float unit_float() { return static_cast<float>(next() >> 40) * 0x1.0p-24f; }

    /// Uniform float in [-range, range).
    float symmetric_float(float range) {
        return (unit_float() * 2.0f - 1.0f) * range;
    }

    double unit_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Unbiased integer in [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
        std::uint64_t v = next();
        while (v >= limit) {
            v = next();
        }
        return v % bound;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

/// Derives an independent stream for a named object under one master seed.
inline Xoshiro256 seeded_stream(std::uint64_t seed, std::string_view name) {
    std::uint64_t mix = seed ^ fnv1a64(name);
    splitmix64(mix);
    return Xoshiro256(mix);
}

/// First k positions of a seeded Fisher-Yates shuffle of {0..n-1}.
/// Deterministic for a given (n, k, seed).
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k,
                                               std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) {
        idx[i] = i;
    }
    if (k > n) {
        k = n;
    }
    Xoshiro256 rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

}  // namespace mergeir
