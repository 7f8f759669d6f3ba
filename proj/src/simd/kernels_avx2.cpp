// Compiled with -mavx2 -mfma; only reached after a CPUID check.
#include "spikeguard/simd/kernels.hpp"

#include <immintrin.h>

#include <bit>
#include <cmath>

namespace spikeguard::simd {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d vabs(__m256d v) {
    return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

LocalMoments local_moments_avx2(std::span<const double> y, std::span<const double> robustness,
                                std::size_t lo, std::size_t hi, double centre, double h) {
    const bool weighted = !robustness.empty();
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d near = _mm256_set1_pd(0.001);
    const __m256d far = _mm256_set1_pd(0.999);
    const __m256d step = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);

    __m256d sw = zero, swx = zero, swxx = zero, swy = zero, swxy = zero;
    std::size_t j = lo;
    for (; j + 4 <= hi; j += 4) {
        const __m256d x =
            _mm256_add_pd(_mm256_set1_pd(static_cast<double>(j) - centre), step);
        // Same expression order as tricube(): u = |x / h|, t = 1 - u^3, w = t^3.
        const __m256d u = vabs(_mm256_div_pd(x, _mm256_set1_pd(h)));
        const __m256d t = _mm256_sub_pd(one, _mm256_mul_pd(_mm256_mul_pd(u, u), u));
        __m256d w = _mm256_mul_pd(_mm256_mul_pd(t, t), t);
        w = _mm256_blendv_pd(w, one, _mm256_cmp_pd(u, near, _CMP_LE_OQ));
        w = _mm256_blendv_pd(w, zero, _mm256_cmp_pd(u, far, _CMP_GE_OQ));
        if (weighted) w = _mm256_mul_pd(w, _mm256_loadu_pd(robustness.data() + j));
        const __m256d yv = _mm256_loadu_pd(y.data() + j);
        const __m256d wx = _mm256_mul_pd(w, x);
        sw = _mm256_add_pd(sw, w);
        swx = _mm256_add_pd(swx, wx);
        swxx = _mm256_fmadd_pd(wx, x, swxx);
        swy = _mm256_fmadd_pd(w, yv, swy);
        swxy = _mm256_fmadd_pd(wx, yv, swxy);
    }
    LocalMoments m{hsum(sw), hsum(swx), hsum(swxx), hsum(swy), hsum(swxy)};
    for (; j < hi; ++j) {
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

ErrorSums error_sums_avx2(std::span<const double> actual, std::span<const double> predicted,
                          double eps) {
    const std::size_t n = actual.size();
    const __m256d veps = _mm256_set1_pd(eps);
    const __m256d v100 = _mm256_set1_pd(100.0);
    __m256d sabs = _mm256_setzero_pd(), ssq = _mm256_setzero_pd(), spct = _mm256_setzero_pd();
    std::size_t guarded = 0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d a = _mm256_loadu_pd(actual.data() + i);
        const __m256d p = _mm256_loadu_pd(predicted.data() + i);
        const __m256d e = vabs(_mm256_sub_pd(a, p));
        const __m256d mag = vabs(a);
        const __m256d small = _mm256_cmp_pd(mag, veps, _CMP_LT_OQ);
        guarded += static_cast<std::size_t>(std::popcount(
            static_cast<unsigned>(_mm256_movemask_pd(small))));
        const __m256d denom = _mm256_blendv_pd(mag, veps, small);
        sabs = _mm256_add_pd(sabs, e);
        ssq = _mm256_fmadd_pd(e, e, ssq);
        spct = _mm256_add_pd(spct, _mm256_div_pd(_mm256_mul_pd(v100, e), denom));
    }
    ErrorSums s{hsum(sabs), hsum(ssq), hsum(spct), guarded};
    for (; i < n; ++i) {
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

double sum_avx2(std::span<const double> x) {
    __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= x.size(); i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x.data() + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x.data() + i + 4));
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < x.size(); ++i) s += x[i];
    return s;
}

double dot_avx2(std::span<const double> x, std::span<const double> y) {
    __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= x.size(); i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x.data() + i), _mm256_loadu_pd(y.data() + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x.data() + i + 4),
                               _mm256_loadu_pd(y.data() + i + 4), acc1);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

}  // namespace

const KernelTable& avx2_kernels() {
    static const KernelTable table{&local_moments_avx2, &error_sums_avx2, &sum_avx2, &dot_avx2};
    return table;
}

}  // namespace spikeguard::simd
