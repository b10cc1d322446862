#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sodcal {

// SplitMix64. The state is a plain u64 so callers can thread it explicitly
// through generation steps.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t state) noexcept : state_(state) {}

    constexpr std::uint64_t next() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1) with 53 bits of resolution.
    constexpr double uniform() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Uniform in (0,1]; safe as a log() argument.
    constexpr double uniform_open_zero() noexcept {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    // Box-Muller, cosine branch only: draws u1 then u2, one normal per pair.
    double normal() noexcept {
        const double u1 = uniform_open_zero();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    // Integer in [0, bound) as next() % bound; bound > 0. The modulo bias is
    // below 2^-40 for the bounds used here.
    constexpr std::uint64_t below(std::uint64_t bound) noexcept { return next() % bound; }

    constexpr std::uint64_t state() const noexcept { return state_; }

private:
    std::uint64_t state_;
};

}  // namespace sodcal
