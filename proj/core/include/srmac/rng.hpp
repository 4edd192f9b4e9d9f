#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace srmac {

/// Stateless 64-bit mixer (splitmix64 finalizer). Used to derive independent
/// stream seeds from a base seed without correlated sequences.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Uniform draw in [low, high) built from the raw 64-bit engine output.
/// std::uniform_real_distribution is implementation-defined; this mapping is
/// identical on every platform, which keeps seeded outputs byte-stable.
inline double portable_uniform(std::mt19937_64& rng, double low, double high) {
    // 53 top bits -> [0, 1) on the dyadic grid; no distribution object.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    double v = low + u * (high - low);
    if (v >= high) v = std::nextafter(high, low);
    if (v < low) v = low;
    return v;
}

/// Standard normal deviate via Box-Muller on portable uniforms. Consumes two
/// engine outputs per call; same portability contract as portable_uniform.
inline double portable_normal(std::mt19937_64& rng) {
    const double u1 = 1.0 - portable_uniform(rng, 0.0, 1.0);  // (0, 1]
    const double u2 = portable_uniform(rng, 0.0, 1.0);
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace srmac
