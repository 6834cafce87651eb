#pragma once

// Counter-based random numbers. Every normal variate is a pure function of
// (key, counter), so any draw can be produced in any order or on any thread
// with identical results.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace spde::rng {

/// Identifies the sampler in dataset provenance.
inline constexpr const char* kSamplerName = "philox4x32-10/box-muller";

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

namespace detail {

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void round(Counter& c, const Key& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace detail

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
inline Counter philox4x32_10(Counter ctr, Key key) {
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            key[0] += detail::kWeyl0;
            key[1] += detail::kWeyl1;
        }
        detail::round(ctr, key);
    }
    return ctr;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline Key key_from_seed(std::uint64_t seed) {
    const std::uint64_t h = splitmix64(seed);
    return {static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
}

/// Seed of replication `rep` in a study with base seed `base`.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t rep) {
    return splitmix64(base ^ splitmix64(rep ^ 0x5DEECE66Dull));
}

/// Uniform on the open interval (0, 1) with 52 random bits.
inline double to_open_unit(std::uint32_t lo, std::uint32_t hi) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 12;
    // 52 bits: with 53 the top value rounds to exactly 1
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

/// Two independent standard normals from one Philox block.
/// `stream` separates independent families (e.g. spectral mode index),
/// `index` walks along a stream.
inline std::pair<double, double> normal_pair(const Key& key, std::uint32_t stream, std::uint64_t index) {
    const Counter out = philox4x32_10(
        {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), stream, 0u}, key);
    const double u1 = to_open_unit(out[0], out[1]);
    const double u2 = to_open_unit(out[2], out[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(angle), r * std::sin(angle)};
}

}  // namespace spde::rng
