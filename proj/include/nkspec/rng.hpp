#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace nkspec {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// The rotation keeps hash_key(a, {b}) distinct from hash_key(b, {a}).
constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) noexcept {
    return mix64(std::rotl(h, 23) ^ mix64(v));
}

constexpr std::uint64_t hash_key(std::uint64_t seed, std::initializer_list<std::uint64_t> counters) noexcept {
    std::uint64_t h = mix64(seed);
    for (auto c : counters) {
        h = hash_combine(h, c);
    }
    return h;
}

/// Uniform in the open interval (0, 1) from the top 52 bits.
constexpr double to_unit_open(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Standard normal variate determined entirely by `key` (Box–Muller).  No
/// generator state: the same key always yields the same value, so draws can
/// be partitioned across workers freely.
inline double keyed_normal(std::uint64_t key) noexcept {
    const double u1 = to_unit_open(mix64(key ^ 0x5851f42d4c957f2dULL));
    const double u2 = to_unit_open(mix64(key ^ 0x14057b7ef767814fULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace nkspec
