// AVX2/FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma; callers must check CPU support before dispatching here.

#include "raresim/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

namespace raresim::kernels {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yi = _mm256_loadu_pd(y + i);
        yi = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yi);
        _mm256_storeu_pd(y + i, yi);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void mul_avx2(const double* x, const double* y, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) out[i] = x[i] * y[i];
}

void recurrence_avx2(double a, double c, const double* x, const double* cur,
                     const double* prev, double* out, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    const __m256d cv = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d axc = _mm256_mul_pd(av, _mm256_loadu_pd(x + i));
        __m256d neg = _mm256_mul_pd(cv, _mm256_loadu_pd(prev + i));
        _mm256_storeu_pd(out + i, _mm256_fmsub_pd(axc, _mm256_loadu_pd(cur + i), neg));
    }
    for (; i < n; ++i) out[i] = a * x[i] * cur[i] - c * prev[i];
}

std::size_t count_leq_avx2(const double* x, std::size_t n, double t) {
    const __m256d tv = _mm256_set1_pd(t);
    std::size_t k = 0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d cmp = _mm256_cmp_pd(_mm256_loadu_pd(x + i), tv, _CMP_LE_OQ);
        k += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(_mm256_movemask_pd(cmp))));
    }
    for (; i < n; ++i) k += (x[i] <= t) ? 1 : 0;
    return k;
}

const Ops kAvx2 = {
    "avx2", dot_avx2,        sum_avx2,       axpy_avx2,
    mul_avx2, recurrence_avx2, count_leq_avx2,
};

}  // namespace

const Ops& avx2_ops() { return kAvx2; }

}  // namespace raresim::kernels

#endif  // x86
