#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace stathyp {

// Counter-based substreams: stream(index) seeds mt19937_64 from
// seed_seq{seed lo, seed hi, index lo, index hi}; derive(domain) mixes a domain tag
// into the master seed with splitmix64. Output depends only on (seed, domain, index).
class RngSpec {
public:
    using Engine = std::mt19937_64;

    explicit RngSpec(std::uint64_t master_seed = 0) : seed_(master_seed) {}

    std::uint64_t master_seed() const { return seed_; }

    Engine stream(std::uint64_t index) const {
        std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                          static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
        return Engine(seq);
    }

    RngSpec derive(std::uint64_t domain) const { return RngSpec(splitmix64(seed_ ^ splitmix64(domain + 1))); }

    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

private:
    std::uint64_t seed_;
};

// Fixed conversions so results do not depend on the standard library's distributions.
inline double uniform01(RngSpec::Engine& e) { return static_cast<double>(e() >> 11) * 0x1.0p-53; }

inline double standard_normal(RngSpec::Engine& e) {
    double u = uniform01(e);
    while (u == 0.0) u = uniform01(e);
    const double v = uniform01(e);
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
}

// Stream domains used across the library.
namespace domain {
inline constexpr std::uint64_t forward = 1;
inline constexpr std::uint64_t backward = 2;
inline constexpr std::uint64_t pair_first = 3;
inline constexpr std::uint64_t pair_second = 4;
inline constexpr std::uint64_t shadow_centers = 5;
inline constexpr std::uint64_t shadow_boundary = 6;
inline constexpr std::uint64_t paths = 7;
}  // namespace domain

}  // namespace stathyp
