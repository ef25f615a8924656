#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "steermux/types.hpp"

namespace steermux {

// Counter-based random streams. Every draw is a pure function of
// (seed, role, a, b, counter), so adding a transmitter or changing the slot
// budget never perturbs draws made by unrelated streams. Noise is keyed per
// slot, packets and fading per transmitter, selections per trial.
enum class RngRole : std::uint64_t {
    Noise = 1,
    Packet = 2,
    Fading = 3,
    Selection = 4,
    Arrival = 5,
    Offset = 6,
    Gain = 7,
};

namespace detail {

// SplitMix64 finalizer; the multipliers are the standard Stafford mix13 set.
inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace detail

class RngStream {
public:
    RngStream(std::uint64_t seed, RngRole role, std::uint64_t a = 0, std::uint64_t b = 0) {
        std::uint64_t k = detail::mix64(seed + detail::kGolden);
        k = detail::mix64(k ^ (static_cast<std::uint64_t>(role) * detail::kGolden));
        k = detail::mix64(k ^ (a * detail::kGolden));
        key_ = detail::mix64(k ^ (b * detail::kGolden));
    }

    std::uint64_t next_word() { return detail::mix64(key_ + (++counter_) * detail::kGolden); }

    // Uniform in [0, 1), 53-bit resolution.
    double next_unit() { return static_cast<double>(next_word() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; safe as a log() argument.
    double next_unit_open() {
        return static_cast<double>((next_word() >> 11) + 1) * 0x1.0p-53;
    }

    // Unbiased integer in [0, bound).
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        for (;;) {
            std::uint64_t w = next_word();
            if (w < limit) return w % bound;
        }
    }

    // Circularly symmetric complex Gaussian with E|z|^2 = variance, i.e. the
    // power is split equally between real and imaginary parts.
    Complex next_complex_gaussian(double variance) {
        double u = next_unit_open();
        double v = next_unit();
        double radius = std::sqrt(-variance * std::log(u));
        double phase = 2.0 * std::numbers::pi * v;
        return {radius * std::cos(phase), radius * std::sin(phase)};
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Seed for a child domain (e.g. one sweep trial) derived from a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return detail::mix64(master ^ (index + 1) * detail::kGolden);
}

}  // namespace steermux
