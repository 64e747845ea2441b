#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>

#include "spdsysid/data/trajectory.hpp"
#include "spdsysid/errors.hpp"

namespace spdsysid::data {

/// Hours in the benchmark year of hourly measurements.
inline constexpr std::size_t default_series_length = 8759;

/// Synthetic climate: mean + seasonal sine + diurnal sine + Gaussian noise.
struct ForcingProfile {
    double mean = 284.0;               // K
    double seasonal_amplitude = 8.0;   // K, period 8760 h
    double diurnal_amplitude = 4.0;    // K, period 24 h
    double noise_std = 1.0;            // K
    std::uint64_t seed = 0;
    std::size_t length = default_series_length;

    /// Mild maritime climate.
    static ForcingProfile london(std::uint64_t seed = 0) { return {284.0, 8.0, 4.0, 1.0, seed}; }
    /// Continental climate with wider seasonal extremes.
    static ForcingProfile chicago(std::uint64_t seed = 0) { return {283.0, 15.0, 5.0, 1.5, seed}; }
};

/**
 * @brief Hourly ambient temperatures for the profile, deterministic per seed.
 *
 * The seasonal term bottoms out at hour 0 (mid-winter start) and the diurnal
 * term at 03:00.
 */
inline ForcingSeries synth_forcing(const ForcingProfile& p) {
    if (p.seasonal_amplitude < 0.0 || p.diurnal_amplitude < 0.0 || p.noise_std < 0.0) {
        throw InvalidArgument("forcing amplitudes must be non-negative");
    }
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::mt19937_64 rng(p.seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    ForcingSeries out;
    out.values.resize(p.length);
    for (std::size_t h = 0; h < p.length; ++h) {
        const double t = static_cast<double>(h);
        double v = p.mean - p.seasonal_amplitude * std::cos(two_pi * t / 8760.0) -
                   p.diurnal_amplitude * std::cos(two_pi * (t - 3.0) / 24.0);
        if (p.noise_std > 0.0) v += p.noise_std * noise(rng);
        out.values[h] = v;
    }
    return out;
}

}  // namespace spdsysid::data
