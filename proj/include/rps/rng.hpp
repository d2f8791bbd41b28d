#pragma once

#include <cstdint>

namespace rps {

// Counter-based generator built on the SplitMix64 finalizer. A draw is a pure
// function of (seed, stream, slot), so per-agent streams can be evaluated in
// any order and still reproduce the sequential results.
//
// Stream layout used by the game simulator, per agent and per step:
//   slot 0 - thinning (does this agent initiate a game?)
//   slot 1 - opponent index
//   slot 2 - initiator's choice
//   slot 3 - opponent's choice
// The per-step seed is derived from the run seed and step index with mix_seed.
namespace rng {

inline uint64_t mix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline uint64_t draw(uint64_t seed, uint64_t stream, uint64_t slot) {
    return mix64(mix64(mix64(seed) ^ stream) ^ (0xD6E8FEB86659FD93ull * (slot + 1)));
}

inline uint64_t mix_seed(uint64_t seed, uint64_t tag) {
    return mix64(seed ^ mix64(tag));
}

/// Uniform double in [0, 1) with 53-bit resolution.
inline double to_unit(uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound) (Lemire reduction; bias < 2^-64 * bound).
inline uint64_t bounded(uint64_t bits, uint64_t bound) {
    return static_cast<uint64_t>((static_cast<__uint128_t>(bits) * bound) >> 64);
}

} // namespace rng
} // namespace rps
