#include "raresim/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace raresim::kernels {

#if defined(RARESIM_HAVE_AVX2_TU)
const Ops& avx2_ops();
#endif
#if defined(RARESIM_HAVE_NEON_TU)
const Ops& neon_ops();
#endif

namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void mul_scalar(const double* x, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

void recurrence_scalar(double a, double c, const double* x, const double* cur,
                       const double* prev, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] * cur[i] - c * prev[i];
}

std::size_t count_leq_scalar(const double* x, std::size_t n, double t) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) k += (x[i] <= t) ? 1 : 0;
    return k;
}

const Ops kScalar = {
    "scalar", dot_scalar,        sum_scalar,       axpy_scalar,
    mul_scalar, recurrence_scalar, count_leq_scalar,
};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Ops* pick_active() {
    const char* force = std::getenv("RARESIM_KERNELS");
    if (force != nullptr) {
        if (std::strcmp(force, "scalar") == 0) return &kScalar;
#if defined(RARESIM_HAVE_AVX2_TU)
        if (std::strcmp(force, "avx2") == 0 && cpu_has_avx2()) return &avx2_ops();
#endif
#if defined(RARESIM_HAVE_NEON_TU)
        if (std::strcmp(force, "neon") == 0) return &neon_ops();
#endif
        return &kScalar;  // unknown or unsupported override: fall back
    }
#if defined(RARESIM_HAVE_AVX2_TU)
    if (cpu_has_avx2()) return &avx2_ops();
#endif
#if defined(RARESIM_HAVE_NEON_TU)
    return &neon_ops();
#endif
    return &kScalar;
}

}  // namespace

const Ops& scalar_ops() { return kScalar; }

const Ops& active_ops() {
    static const Ops* active = pick_active();
    return *active;
}

std::vector<const Ops*> available_ops() {
    std::vector<const Ops*> v{&kScalar};
#if defined(RARESIM_HAVE_AVX2_TU)
    if (cpu_has_avx2()) v.push_back(&avx2_ops());
#endif
#if defined(RARESIM_HAVE_NEON_TU)
    v.push_back(&neon_ops());
#endif
    return v;
}

}  // namespace raresim::kernels
