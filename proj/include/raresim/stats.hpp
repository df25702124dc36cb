#pragma once

#include <span>

namespace raresim {

// Standard normal CDF.
double normal_cdf(double x);

// Inverse standard normal CDF (Wichura's AS241, ~1e-15 accurate).
double normal_quantile(double p);

// Sample mean and unbiased variance.
double mean_of(std::span<const double> xs);
double variance_of(std::span<const double> xs);

// Adaptive Simpson quadrature of f over [a,b] to absolute tolerance tol.
double integrate_adaptive(double (*f)(double, const void*), const void* ctx,
                          double a, double b, double tol);

}  // namespace raresim
