#include "spikeguard/simd/kernels.hpp"

#include <cmath>

namespace spikeguard::simd {
namespace {

LocalMoments local_moments_scalar(std::span<const double> y, std::span<const double> robustness,
                                  std::size_t lo, std::size_t hi, double centre, double h) {
    LocalMoments m;
    const bool weighted = !robustness.empty();
    for (std::size_t j = lo; j < hi; ++j) {
        const double x = static_cast<double>(j) - centre;
        double w = tricube(x / h);
        if (weighted) w *= robustness[j];
        const double wx = w * x;
        m.sw += w;
        m.swx += wx;
        m.swxx += wx * x;
        m.swy += w * y[j];
        m.swxy += wx * y[j];
    }
    return m;
}

ErrorSums error_sums_scalar(std::span<const double> actual, std::span<const double> predicted,
                            double eps) {
    ErrorSums s;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double e = std::fabs(actual[i] - predicted[i]);
        const double mag = std::fabs(actual[i]);
        s.abs += e;
        s.sq += e * e;
        if (mag < eps) {
            s.pct += 100.0 * e / eps;
            ++s.guarded;
        } else {
            s.pct += 100.0 * e / mag;
        }
    }
    return s;
}

double sum_scalar(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
}

double dot_scalar(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{&local_moments_scalar, &error_sums_scalar, &sum_scalar,
                                   &dot_scalar};
    return table;
}

}  // namespace spikeguard::simd
