#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace itecal::rng {

// Philox4x32-10 (Salmon et al., SC'11). Stateless: the output block is a pure
// function of (counter, key).
using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline Counter philox4x32(Counter ctr, Key key) noexcept {
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

// Uniform on the open interval (0,1): 52 random bits plus a half step, so
// neither end is reachable (with 53 bits the top value rounds to 1.0).
inline double to_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

inline Key key_from_seed(std::uint64_t seed) noexcept {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

// Four uniforms addressed by (seed, stream, index, lane). `stream` is a 64-bit
// identifier such as a replicate number; `lane` separates independent uses of
// the same index.
inline std::array<double, 4> uniforms4(std::uint64_t seed, std::uint64_t stream, std::uint32_t index,
                                       std::uint32_t lane) noexcept {
    const Key key = key_from_seed(seed);
    const Counter a = philox4x32({index, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                                  2 * lane},
                                 key);
    const Counter b = philox4x32({index, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                                  2 * lane + 1},
                                 key);
    return {to_unit(a[0], a[1]), to_unit(a[2], a[3]), to_unit(b[0], b[1]), to_unit(b[2], b[3])};
}

// Box-Muller pair from two open-interval uniforms.
inline std::array<double, 2> normal_pair(double u1, double u2) noexcept {
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace itecal::rng
