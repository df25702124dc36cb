#pragma once

// Least-squares polynomial response surfaces in physical coordinates with
// empirical and leave-one-out error estimation, plus LOO-driven adaptive
// order selection.
//
// Inputs are affinely standardized (per-dimension mean/std of the
// experimental design) before the monomial basis is evaluated; the model
// stores the map so evaluation is self-contained.

#include <span>
#include <string>
#include <vector>

#include "raresim/common.hpp"
#include "raresim/orthopoly.hpp"
#include "raresim/uncertainty.hpp"

namespace raresim {

struct FitDiagnostics {
    double eps_emp = 0.0;
    double eps_emp_rel = 0.0;
    double eps_loo = 0.0;
    double eps_loo_rel = 0.0;
    std::vector<double> leverages;  // diagonal of A(A^T A)^-1 A^T
};

class RsmModel {
public:
    RsmModel(int order, std::vector<MultiIndex> indices, std::vector<double> coefficients,
             std::vector<double> center, std::vector<double> scale);

    int order() const { return order_; }
    std::size_t dim() const { return center_.size(); }
    const std::vector<MultiIndex>& indices() const { return indices_; }
    const std::vector<double>& coefficients() const { return coefficients_; }
    const std::vector<double>& center() const { return center_; }
    const std::vector<double>& scale() const { return scale_; }

    double evaluate(std::span<const double> theta) const;
    std::vector<double> evaluate_batch(const Batch& thetas) const;

private:
    int order_;
    std::vector<MultiIndex> indices_;
    std::vector<double> coefficients_;
    std::vector<double> center_;
    std::vector<double> scale_;
};

struct RsmFit {
    RsmModel model;
    FitDiagnostics diagnostics;
};

// Single-order fit. Requires n_s >= P(M,p)+1 and non-constant responses.
RsmFit fit_rsm(const Batch& samples, std::span<const double> responses, int order);

struct OrderTrial {
    int order = 0;
    bool feasible = false;
    std::string reason;  // why the order was skipped, if it was
    double eps_emp_rel = 0.0;
    double eps_loo_rel = 0.0;
};

struct AdaptiveRsmFit {
    RsmModel model;
    FitDiagnostics diagnostics;
    int chosen_order;
    std::vector<OrderTrial> trials;
};

// Fits every feasible order in [order_min, order_max] and returns the one
// minimizing the relative LOO error (ties go to the smaller order). Orders
// with n_s < P+1, rank deficiency, or a near-unit leverage are skipped and
// recorded. Throws DegenerateDesignError when no order is feasible.
AdaptiveRsmFit fit_rsm_adaptive(const Batch& samples, std::span<const double> responses,
                                int order_min, int order_max);

}  // namespace raresim
