#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>

namespace moonshot {

// SplitMix64 (Steele, Lea, Flood 2014). Chosen over std::mt19937_64 because
// every draw here must be bit-identical across platforms and standard-library
// versions; std distributions make no such promise, so sampling is integer-only.
class SplitMix64 {
  public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform draw in [0, bound) by rejection; bound = 0 yields 0.
    uint64_t uniform(uint64_t bound) {
        if (bound < 2) return 0;
        uint64_t limit = ~uint64_t{0} - ~uint64_t{0} % bound;
        uint64_t v = next();
        while (v >= limit) v = next();
        return v % bound;
    }

  private:
    uint64_t state_;
};

// Exact probability as num/den so drop/duplicate decisions never touch floats.
struct Rational {
    uint64_t num = 0;
    uint64_t den = 1;

    bool zero() const { return num == 0; }
};

inline bool chance(SplitMix64& rng, const Rational& p) {
    if (p.num == 0) return false;
    if (p.num >= p.den) return true;
    return rng.uniform(p.den) < p.num;
}

inline uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ULL) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Streaming FNV-1a accumulator used for block ids and state fingerprints.
// Two independently seeded lanes advance over the same bytes in one pass:
// value() is the primary 64-bit digest, pair() widens to 128 bits for keys
// where collisions across millions of entries must stay negligible.
class Fnv {
  public:
    explicit Fnv(uint64_t seed = 0xcbf29ce484222325ULL,
                 uint64_t seed2 = 0x9ae16a3b2f90404fULL)
        : h_(seed), g_(seed2) {}

    void bytes(const void* data, size_t len) {
        const unsigned char* p = static_cast<const unsigned char*>(data);
        uint64_t h = h_, g = g_;
        for (size_t i = 0; i < len; ++i) {
            h = (h ^ p[i]) * 0x100000001b3ULL;
            g = (g ^ p[i]) * 0x100000001b3ULL;
        }
        h_ = h;
        g_ = g;
    }

    void u64(uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        bytes(b, 8);
    }

    uint64_t value() const { return h_; }
    std::pair<uint64_t, uint64_t> pair() const { return {h_, g_}; }

  private:
    uint64_t h_;
    uint64_t g_;
};

}  // namespace moonshot
