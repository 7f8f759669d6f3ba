#pragma once

// Seeded synthetic half-hourly price fixtures with known spike locations,
// used by the demo subcommand and the test suites.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "spikeguard/series.hpp"

namespace spikeguard::synthetic {

struct FixtureOptions {
    std::size_t length = 70'000;
    double level = 100.0;
    double daily_amplitude = 15.0;    // period 48
    double weekly_amplitude = 10.0;   // period 336
    double monthly_amplitude = 8.0;   // period 1440
    double noise_sd = 4.0;
    double spike_rate = 0.01;
    double spike_sigmas = 8.0;        // spike height in units of noise_sd
    series::Timestamp start = series::parse_timestamp("2020-01-06T00:00");  // a Monday
};

struct Fixture {
    series::TimeSeries clean;     // seasonal signal + noise
    series::TimeSeries observed;  // clean + injected spikes
    series::ExogenousFrame exogenous;
    std::vector<std::size_t> spike_indices;
};

// Additive seasonal signal with Gaussian noise; each index independently
// receives an upward spike of spike_sigmas * noise_sd with probability
// spike_rate.
Fixture make_price_fixture(const FixtureOptions& options, std::uint64_t seed);

// Log-normal price: exp of a seasonal log-level plus AR(1) noise with
// occasional multiplicative jumps, giving a right-skewed, heavy-tailed series.
series::TimeSeries make_heavy_tailed_series(std::size_t length, std::uint64_t seed);

}  // namespace spikeguard::synthetic
