#pragma once

// Limit states on standard normal inputs with failure probabilities known in
// closed form or by high-resolution 1-D integration; the ground truth for
// validating the estimators.

#include <span>
#include <string>

#include "raresim/common.hpp"
#include "raresim/uncertainty.hpp"

namespace raresim {

enum class LimitStateKind { Linear, QuadraticConvex, QuarticNonsmooth };

// h(theta) = beta - sum(theta)/sqrt(p) + ridge(theta_1 - theta_2), where the
// ridge is 0 (linear), a*d^2 (quadratic-convex), or a*d^2 + c*d^4 + e*|d|
// (quartic with a kink). The ridge direction is orthogonal to the linear
// direction, so the failure probability reduces to a 1-D Gaussian integral.
struct AnalyticLimitState {
    LimitStateKind kind = LimitStateKind::Linear;
    int dim = 3;
    double beta = 3.0;
    double ridge_a = 0.1;
    double ridge_c = 0.02;
    double ridge_e = 0.05;

    double evaluate(std::span<const double> theta) const;
    Evaluator evaluator() const;

    // Exact (linear) or integrated to better than 1e-10 relative.
    double true_pf() const;

    UncertainVector inputs() const;  // standard normal, p = dim

    static AnalyticLimitState from_name(const std::string& name, int dim, double beta);
};

}  // namespace raresim
