#pragma once

// Truncated polynomial chaos expansions fitted by spectral projection or
// least-squares regression, evaluated in physical or standard coordinates.

#include <nlohmann/json_fwd.hpp>
#include <span>
#include <vector>

#include "raresim/common.hpp"
#include "raresim/orthopoly.hpp"
#include "raresim/uncertainty.hpp"

namespace raresim {

class PceModel {
public:
    PceModel(UncertainVector inputs, int order, std::vector<MultiIndex> indices,
             std::vector<double> coefficients);

    int order() const { return order_; }
    std::size_t terms() const { return indices_.size(); }
    const std::vector<MultiIndex>& indices() const { return indices_; }
    const std::vector<double>& coefficients() const { return coefficients_; }
    const UncertainVector& inputs() const { return inputs_; }
    const std::vector<PolyFamily>& families() const { return families_; }

    double evaluate(std::span<const double> theta) const;
    std::vector<double> evaluate_batch(const Batch& thetas) const;

    // Standard-space evaluation (skips the isoprobabilistic transform).
    double evaluate_xi(std::span<const double> xi) const;
    std::vector<double> evaluate_batch_xi(const Batch& xis) const;

    nlohmann::json to_json() const;
    static PceModel from_json(const nlohmann::json& j);

private:
    UncertainVector inputs_;
    std::vector<PolyFamily> families_;
    std::vector<MultiIndex> indices_;
    std::vector<double> coefficients_;
    int order_;
};

struct PceFit {
    PceModel model;
    long long true_calls;  // Q for projection, n_s for regression
};

// Spectral projection, Eq.-(17)-style weighted sums over the rule's nodes.
// Requires rule exactness for the projected degrees: nodes_per_dim >= M+1.
PceFit fit_projection(const Evaluator& h, const UncertainVector& uv, int order,
                      const QuadratureRule& rule);

// Projection from responses already evaluated at the rule's nodes (in node
// order); lets one batch of true-model calls feed several expansions.
// Reports zero calls -- the caller owns the accounting.
PceFit fit_projection_values(std::span<const double> node_values, const UncertainVector& uv,
                             int order, const QuadratureRule& rule);

// Least-squares regression on a given experimental design (physical-space
// samples and their responses). Requires n_s >= basis count and a
// full-column-rank experimental matrix.
PceFit fit_regression(const Batch& thetas, std::span<const double> responses,
                      const UncertainVector& uv, int order);

}  // namespace raresim
