#include "raresim/analytic.hpp"

#include <cmath>
#include <stdexcept>

#include "raresim/stats.hpp"

namespace raresim {

namespace {

double ridge_of(const AnalyticLimitState& ls, double d) {
    switch (ls.kind) {
        case LimitStateKind::Linear:
            return 0.0;
        case LimitStateKind::QuadraticConvex:
            return ls.ridge_a * d * d;
        case LimitStateKind::QuarticNonsmooth:
            return ls.ridge_a * d * d + ls.ridge_c * d * d * d * d + ls.ridge_e * std::abs(d);
    }
    return 0.0;
}

struct PfContext {
    const AnalyticLimitState* ls;
};

// Integrand of p_f = E_v[Phi(-beta - ridge(sqrt(2) v))] with v ~ N(0,1).
double pf_integrand(double v, const void* ctx) {
    const auto* c = static_cast<const PfContext*>(ctx);
    const double phi = std::exp(-0.5 * v * v) * 0.3989422804014326779399461;
    const double d = 1.4142135623730950488016887 * v;
    return phi * normal_cdf(-c->ls->beta - ridge_of(*c->ls, d));
}

}  // namespace

double AnalyticLimitState::evaluate(std::span<const double> theta) const {
    if (static_cast<int>(theta.size()) != dim)
        throw std::invalid_argument("AnalyticLimitState: dimension mismatch");
    double s = 0.0;
    for (double t : theta) s += t;
    double h = beta - s / std::sqrt(static_cast<double>(dim));
    if (kind != LimitStateKind::Linear) {
        if (dim < 2) throw std::invalid_argument("AnalyticLimitState: ridge needs dim >= 2");
        h += ridge_of(*this, theta[0] - theta[1]);
    }
    return h;
}

Evaluator AnalyticLimitState::evaluator() const {
    AnalyticLimitState copy = *this;
    return [copy](std::span<const double> theta) { return copy.evaluate(theta); };
}

double AnalyticLimitState::true_pf() const {
    if (kind == LimitStateKind::Linear) return normal_cdf(-beta);
    // (theta_1-theta_2)/sqrt(2) is standard normal and independent of the
    // linear direction; integrate the conditional tail over it. The ridge is
    // even, so twice the half-line integral; starting at 0 keeps the |d|
    // kink on the boundary.
    PfContext ctx{this};
    const double tol = std::max(1e-300, 1e-13 * normal_cdf(-beta));
    return 2.0 * integrate_adaptive(&pf_integrand, &ctx, 0.0, 10.0, tol);
}

UncertainVector AnalyticLimitState::inputs() const {
    std::vector<MarginalDistribution> marginals(
        static_cast<std::size_t>(dim), MarginalDistribution::gaussian(0.0, 1.0));
    return UncertainVector(std::move(marginals));
}

AnalyticLimitState AnalyticLimitState::from_name(const std::string& name, int dim, double beta) {
    AnalyticLimitState ls;
    ls.dim = dim;
    ls.beta = beta;
    if (name == "linear") {
        ls.kind = LimitStateKind::Linear;
    } else if (name == "quadratic") {
        ls.kind = LimitStateKind::QuadraticConvex;
    } else if (name == "quartic") {
        ls.kind = LimitStateKind::QuarticNonsmooth;
    } else {
        throw ConfigError("unknown analytic limit state: " + name);
    }
    return ls;
}

}  // namespace raresim
