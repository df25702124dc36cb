#pragma once

// Batch arithmetic kernels used by the surrogate and quadrature hot loops.
//
// Every operation has a scalar reference implementation and, on capable CPUs,
// a SIMD variant selected once at startup. All variants compute the same
// quantity; they may differ in the last few ulps because of re-association
// and FMA contraction. Equivalence between variants is enforced by tests.
//
// The active variant can be forced with the environment variable
// RARESIM_KERNELS=scalar|avx2|neon (useful for debugging and the
// equivalence suite).

#include <cstddef>
#include <vector>

namespace raresim::kernels {

struct Ops {
    const char* name;

    // sum_i x[i]*y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);

    // sum_i x[i]
    double (*sum)(const double* x, std::size_t n);

    // y[i] += a*x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);

    // out[i] = x[i]*y[i]
    void (*mul)(const double* x, const double* y, double* out, std::size_t n);

    // out[i] = a*x[i]*cur[i] - c*prev[i]
    // One step of a three-term polynomial recurrence vectorized across
    // sample points (Hermite: a=1, c=n; Legendre: a=(2n+1)/(n+1), c=n/(n+1)).
    void (*recurrence_step)(double a, double c, const double* x,
                            const double* cur, const double* prev, double* out,
                            std::size_t n);

    // #{ i : x[i] <= t }
    std::size_t (*count_leq)(const double* x, std::size_t n, double t);
};

// Scalar reference kernels; always available.
const Ops& scalar_ops();

// Variant chosen at startup from CPU capabilities (or the env override).
const Ops& active_ops();

// All variants usable on this machine, scalar first. For equivalence tests.
std::vector<const Ops*> available_ops();

}  // namespace raresim::kernels
