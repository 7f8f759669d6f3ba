#pragma once

// Data-parallel inner loops shared by the smoother, the metrics and the
// correlation code. Every kernel has a scalar reference implementation and,
// on x86-64, an AVX2+FMA variant. The active variant is chosen once at
// startup from CPUID and can be pinned with SPIKEGUARD_SIMD=scalar|avx2.

#include <cstddef>
#include <span>
#include <string_view>

namespace spikeguard::simd {

enum class Isa { scalar, avx2 };

// Weighted sums needed for a local linear fit around a centre point.
// Positions are offsets (j - centre) so the normal equations stay well scaled.
struct LocalMoments {
    double sw = 0.0;    // sum w
    double swx = 0.0;   // sum w*x
    double swxx = 0.0;  // sum w*x^2
    double swy = 0.0;   // sum w*y
    double swxy = 0.0;  // sum w*x*y
};

struct ErrorSums {
    double abs = 0.0;      // sum |y - yhat|
    double sq = 0.0;       // sum (y - yhat)^2
    double pct = 0.0;  // sum 100 |y - yhat| / max(|y|, eps)
    std::size_t guarded = 0;  // terms where |y| < eps
};

struct KernelTable {
    // Tricube-weighted moments over y[lo, hi) around `centre`, bandwidth `h`.
    // `robustness` may be empty; when present it multiplies the tricube weight.
    LocalMoments (*local_moments)(std::span<const double> y, std::span<const double> robustness,
                                  std::size_t lo, std::size_t hi, double centre, double h);
    ErrorSums (*error_sums)(std::span<const double> actual, std::span<const double> predicted,
                            double eps);
    double (*sum)(std::span<const double> x);
    double (*dot)(std::span<const double> x, std::span<const double> y);
};

const KernelTable& scalar_kernels();
#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_kernels();
#endif

// True when the running CPU can execute the given variant.
bool isa_supported(Isa isa);

// Kernels for the active variant.
const KernelTable& kernels();
Isa active_isa();
std::string_view isa_name(Isa isa);

// Overrides the startup choice; throws std::invalid_argument when the CPU
// cannot run `isa`. Not thread-safe: call before starting worker threads.
void set_active_isa(Isa isa);

// Tricube weight for |u| < 1, zero otherwise. Points very close to the centre
// get weight one and points at the band edge get zero, matching the
// thresholds of the classic STL Fortran code.
inline double tricube(double u) {
    if (u < 0) u = -u;
    if (u <= 0.001) return 1.0;
    if (u >= 0.999) return 0.0;
    const double t = 1.0 - u * u * u;
    return t * t * t;
}

}  // namespace spikeguard::simd
