#pragma once

#include <cstdint>

namespace ppcon {

// splitmix64 finalizer; also used as the stable hash for stream derivation.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic, platform-independent generator (splitmix64 sequence).
// One instance per logical stream; streams never share state.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1), 53-bit resolution.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo,hi).
    double next_real(double lo, double hi) { return lo + next_unit() * (hi - lo); }

    // Uniform integer in [lo,hi] inclusive, unbiased.
    std::uint64_t next_int(std::uint64_t lo, std::uint64_t hi) {
        const std::uint64_t n = hi - lo + 1;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return lo + v % n;
    }

    // Uniform index in [0,n).
    std::size_t next_index(std::size_t n) {
        return static_cast<std::size_t>(next_int(0, static_cast<std::uint64_t>(n) - 1));
    }

private:
    std::uint64_t state_;
};

// Stream purposes, kept distinct so unrelated draws never alias.
enum class StreamPurpose : std::uint64_t {
    node_init = 1,      // polynomial coefficients at t=0
    handshake = 2,      // per-round handshake pairs
    keydist_init = 3,   // initial real-valued key vectors
    keydist_resample = 4,
    initial_states = 5, // CLI-generated x0
    spectral = 6,       // power-iteration start vector
    instance = 7,       // test-harness instance generation
};

// Stable derivation of a stream from (seed, purpose, node, round).
// Node iteration order never influences the draws of another node.
inline RngStream derive_stream(std::uint64_t seed, StreamPurpose purpose,
                               std::uint64_t node = 0, std::uint64_t round = 0) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ static_cast<std::uint64_t>(purpose));
    h = mix64(h ^ node);
    h = mix64(h ^ round);
    return RngStream(h);
}

} // namespace ppcon
