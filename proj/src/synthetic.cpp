#include "spikeguard/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace spikeguard::synthetic {

namespace {

double wave(std::size_t i, double period) {
    return std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / period);
}

}  // namespace

Fixture make_price_fixture(const FixtureOptions& o, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const std::size_t n = o.length;
    std::vector<double> clean(n), observed(n);
    series::ExogenousFrame exo;
    exo.start = o.start;
    exo.demand.resize(n);
    exo.temperature.resize(n);
    exo.humidity.resize(n);
    exo.heat_index.resize(n);
    exo.is_holiday.assign(n, 0.0);

    Fixture f{series::TimeSeries(o.start, {0.0}), series::TimeSeries(o.start, {0.0}), {}, {}};
    for (std::size_t i = 0; i < n; ++i) {
        const double daily = wave(i, 48.0);
        clean[i] = o.level + o.daily_amplitude * daily + o.weekly_amplitude * wave(i, 336.0) +
                   o.monthly_amplitude * wave(i, 1440.0) + o.noise_sd * gauss(rng);
        observed[i] = clean[i];
        if (unit(rng) < o.spike_rate) {
            observed[i] += o.spike_sigmas * o.noise_sd;
            f.spike_indices.push_back(i);
        }
        exo.demand[i] = 6000.0 + 800.0 * daily + 50.0 * gauss(rng);
        exo.temperature[i] = 28.0 + 3.0 * wave(i + 6, 48.0) + 0.5 * gauss(rng);
        exo.humidity[i] = 80.0 - 10.0 * wave(i + 6, 48.0) + 2.0 * gauss(rng);
        exo.heat_index[i] = exo.temperature[i] + 0.05 * (exo.humidity[i] - 40.0);
        exo.is_holiday[i] = (i / 48) % 97 == 3 ? 1.0 : 0.0;
    }
    f.clean = series::TimeSeries(o.start, std::move(clean));
    f.observed = series::TimeSeries(o.start, std::move(observed));
    f.exogenous = std::move(exo);
    return f;
}

series::TimeSeries make_heavy_tailed_series(std::size_t length, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::exponential_distribution<double> jump(1.5);
    std::vector<double> v(length);
    double ar = 0.0;
    for (std::size_t i = 0; i < length; ++i) {
        ar = 0.9 * ar + 0.12 * gauss(rng);
        double x = std::log(100.0) + 0.25 * wave(i, 48.0) + 0.1 * wave(i, 336.0) + ar;
        if (unit(rng) < 0.005) x += jump(rng);
        v[i] = std::exp(x);
    }
    return series::TimeSeries(series::parse_timestamp("2020-01-06T00:00"), std::move(v));
}

}  // namespace spikeguard::synthetic
