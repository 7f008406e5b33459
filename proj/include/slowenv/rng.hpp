#pragma once

#include <cmath>
#include <cstdint>

// Counter-based random numbers: every draw is a pure function of
// (seed, stream, hi, lo), so replica parallelism and evaluation order cannot
// change sampled values. hi is typically a period index, lo a node index.

namespace slowenv::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

inline std::uint64_t hash4(std::uint64_t seed, std::uint64_t stream, std::uint64_t hi,
                           std::uint64_t lo) {
    std::uint64_t h = mix64(seed + kGolden);
    h = mix64(h + stream);
    h = mix64(h + hi);
    h = mix64(h + lo);
    return h;
}

// Derive a child stream id; used to keep e.g. burn-in and evaluation noise
// on provably disjoint streams.
inline std::uint64_t substream(std::uint64_t parent, std::uint64_t tag) {
    return mix64(parent + kGolden * (tag + 1));
}

// uniform in [0,1)
inline double u01(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1p-53; }

// uniform in (0,1]
inline double u01_open(std::uint64_t h) {
    return (static_cast<double>(h >> 11) + 1.0) * 0x1p-53;
}

struct Key {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    double uniform(std::uint64_t hi, std::uint64_t lo) const {
        return u01(hash4(seed, stream, hi, lo));
    }
    // standard normal via Box-Muller; one draw per (hi, lo)
    double normal(std::uint64_t hi, std::uint64_t lo) const {
        double u1 = u01_open(hash4(seed, stream, hi, 2 * lo));
        double u2 = u01(hash4(seed, stream, hi, 2 * lo + 1));
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }
    // +1 or -1
    double sign(std::uint64_t hi, std::uint64_t lo) const {
        return (hash4(seed, stream, hi, lo) & 1u) ? 1.0 : -1.0;
    }
    Key with_stream(std::uint64_t tag) const { return Key{seed, substream(stream, tag)}; }
};

}  // namespace slowenv::rng
