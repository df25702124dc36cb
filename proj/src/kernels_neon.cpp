// NEON kernel variants for aarch64, where 128-bit NEON is baseline.

#include "raresim/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace raresim::kernels {

namespace {

double dot_neon(const double* x, const double* y, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        acc = vfmaq_f64(acc, vld1q_f64(x + i), vld1q_f64(y + i));
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

double sum_neon(const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
    const float64x2_t av = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t yi = vld1q_f64(y + i);
        yi = vfmaq_f64(yi, av, vld1q_f64(x + i));
        vst1q_f64(y + i, yi);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void mul_neon(const double* x, const double* y, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(out + i, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    }
    for (; i < n; ++i) out[i] = x[i] * y[i];
}

void recurrence_neon(double a, double c, const double* x, const double* cur,
                     const double* prev, double* out, std::size_t n) {
    const float64x2_t av = vdupq_n_f64(a);
    const float64x2_t cv = vdupq_n_f64(c);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t axc = vmulq_f64(av, vld1q_f64(x + i));
        float64x2_t neg = vnegq_f64(vmulq_f64(cv, vld1q_f64(prev + i)));
        vst1q_f64(out + i, vfmaq_f64(neg, axc, vld1q_f64(cur + i)));
    }
    for (; i < n; ++i) out[i] = a * x[i] * cur[i] - c * prev[i];
}

std::size_t count_leq_neon(const double* x, std::size_t n, double t) {
    const float64x2_t tv = vdupq_n_f64(t);
    std::size_t k = 0;
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        uint64x2_t cmp = vcleq_f64(vld1q_f64(x + i), tv);
        k += static_cast<std::size_t>(vgetq_lane_u64(cmp, 0) & 1u);
        k += static_cast<std::size_t>(vgetq_lane_u64(cmp, 1) & 1u);
    }
    for (; i < n; ++i) k += (x[i] <= t) ? 1 : 0;
    return k;
}

const Ops kNeon = {
    "neon", dot_neon,        sum_neon,       axpy_neon,
    mul_neon, recurrence_neon, count_leq_neon,
};

}  // namespace

const Ops& neon_ops() { return kNeon; }

}  // namespace raresim::kernels

#endif  // __aarch64__
