#include "raresim/pce.hpp"

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "raresim/kernels.hpp"
#include "raresim/parallel.hpp"

namespace raresim {

namespace {

int max_degree_used(const std::vector<MultiIndex>& indices) {
    int d = 0;
    for (const auto& idx : indices) {
        for (int m : idx) d = std::max(d, m);
    }
    return d;
}

// Per-dimension univariate value tables at a batch of standard-space points.
std::vector<std::vector<std::vector<double>>> build_tables(
    const std::vector<PolyFamily>& families, int max_degree, const Batch& xis) {
    std::vector<std::vector<std::vector<double>>> tables(families.size());
    for (std::size_t r = 0; r < families.size(); ++r) {
        eval_univariate_batch(families[r], max_degree, xis.dim[r], tables[r]);
    }
    return tables;
}

// row[s] = Psi_idx(xi_s) from the per-dimension tables. In-place mul is fine.
void basis_row(const std::vector<std::vector<std::vector<double>>>& tables,
               const MultiIndex& idx, std::vector<double>& row) {
    const auto& ops = kernels::active_ops();
    const std::size_t n = tables[0][0].size();
    row.assign(tables[0][static_cast<std::size_t>(idx[0])].begin(),
               tables[0][static_cast<std::size_t>(idx[0])].end());
    for (std::size_t r = 1; r < tables.size(); ++r) {
        ops.mul(row.data(), tables[r][static_cast<std::size_t>(idx[r])].data(), row.data(), n);
    }
}

}  // namespace

PceModel::PceModel(UncertainVector inputs, int order, std::vector<MultiIndex> indices,
                   std::vector<double> coefficients)
    : inputs_(std::move(inputs)),
      families_(families_for(inputs_)),
      indices_(std::move(indices)),
      coefficients_(std::move(coefficients)),
      order_(order) {
    if (indices_.size() != coefficients_.size())
        throw std::invalid_argument("PceModel: indices/coefficients size mismatch");
    for (double a : coefficients_) {
        if (!std::isfinite(a)) throw std::invalid_argument("PceModel: non-finite coefficient");
    }
}

double PceModel::evaluate(std::span<const double> theta) const {
    return evaluate_xi(inputs_.to_standard(theta));
}

double PceModel::evaluate_xi(std::span<const double> xi) const {
    if (xi.size() != inputs_.dim()) throw std::invalid_argument("PceModel: dimension mismatch");
    double v = 0.0;
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        v += coefficients_[i] * eval_multivariate(families_, indices_[i], xi);
    }
    return v;
}

std::vector<double> PceModel::evaluate_batch(const Batch& thetas) const {
    return evaluate_batch_xi(inputs_.to_standard(thetas));
}

std::vector<double> PceModel::evaluate_batch_xi(const Batch& xis) const {
    if (xis.dim.size() != inputs_.dim()) throw std::invalid_argument("PceModel: dimension mismatch");
    const auto& ops = kernels::active_ops();
    const auto tables = build_tables(families_, max_degree_used(indices_), xis);
    std::vector<double> out(xis.n, 0.0);
    std::vector<double> row;
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        basis_row(tables, indices_[i], row);
        ops.axpy(coefficients_[i], row.data(), out.data(), xis.n);
    }
    return out;
}

PceFit fit_projection_values(std::span<const double> node_values, const UncertainVector& uv,
                             int order, const QuadratureRule& rule) {
    if (order < 0) throw std::invalid_argument("fit_projection: negative order");
    if (rule.nodes.dim.size() != uv.dim())
        throw std::invalid_argument("fit_projection: rule dimension mismatch");
    if (rule.nodes_per_dim < order + 1)
        throw std::invalid_argument("fit_projection: insufficient quadrature order (need q >= M+1)");
    if (node_values.size() != rule.weights.size())
        throw std::invalid_argument("fit_projection: node values/weights size mismatch");

    const auto families = families_for(uv);
    const auto indices = total_degree_indices(static_cast<int>(uv.dim()), order);
    const std::size_t q_total = rule.weights.size();

    const auto& ops = kernels::active_ops();
    std::vector<double> hw(q_total);
    for (std::size_t j = 0; j < q_total; ++j) hw[j] = node_values[j] * rule.weights[j];

    const auto tables = build_tables(families, order, rule.nodes);
    std::vector<double> coeffs(indices.size());
    std::vector<double> row;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        basis_row(tables, indices[i], row);
        coeffs[i] = ops.dot(row.data(), hw.data(), q_total) /
                    multivariate_norm(families, indices[i]);
    }
    return {PceModel(uv, order, indices, std::move(coeffs)), 0};
}

PceFit fit_projection(const Evaluator& h, const UncertainVector& uv, int order,
                      const QuadratureRule& rule) {
    if (rule.nodes.dim.size() != uv.dim())
        throw std::invalid_argument("fit_projection: rule dimension mismatch");
    const std::size_t q_total = rule.weights.size();

    // True-model responses at the rule's nodes; exactly Q calls.
    std::vector<double> y(q_total);
    parallel_for(q_total, [&](std::size_t j) {
        y[j] = h(uv.from_standard(rule.nodes.point(j)));
    });

    PceFit fit = fit_projection_values(y, uv, order, rule);
    fit.true_calls = static_cast<long long>(q_total);
    return fit;
}

PceFit fit_regression(const Batch& thetas, std::span<const double> responses,
                      const UncertainVector& uv, int order) {
    if (thetas.n != responses.size())
        throw std::invalid_argument("fit_regression: samples/responses size mismatch");
    if (thetas.dim.size() != uv.dim())
        throw std::invalid_argument("fit_regression: dimension mismatch");
    const auto families = families_for(uv);
    const auto indices = total_degree_indices(static_cast<int>(uv.dim()), order);
    const std::size_t n_s = thetas.n;
    const std::size_t P = indices.size();
    if (n_s < P) throw std::invalid_argument("fit_regression: need n_s >= basis count");

    const Batch xis = uv.to_standard(thetas);
    const auto tables = build_tables(families, order, xis);

    Eigen::MatrixXd A(static_cast<Eigen::Index>(n_s), static_cast<Eigen::Index>(P));
    std::vector<double> row;
    for (std::size_t j = 0; j < P; ++j) {
        basis_row(tables, indices[j], row);
        for (std::size_t i = 0; i < n_s; ++i) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[i];
    }
    Eigen::Map<const Eigen::VectorXd> yv(responses.data(), static_cast<Eigen::Index>(n_s));

    // Normal-equations solution computed through a rank-revealing QR.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < static_cast<Eigen::Index>(P))
        throw DegenerateDesignError("fit_regression: rank-deficient experimental matrix");
    Eigen::VectorXd a = qr.solve(yv);

    std::vector<double> coeffs(a.data(), a.data() + a.size());
    return {PceModel(uv, order, indices, std::move(coeffs)), static_cast<long long>(n_s)};
}

namespace {

nlohmann::json marginal_to_json(const MarginalDistribution& m) {
    if (m.family == MarginalFamily::Gaussian) {
        return {{"family", "gaussian"}, {"mean", m.a}, {"std", m.b}};
    }
    return {{"family", "uniform"}, {"lower", m.a}, {"upper", m.b}};
}

MarginalDistribution marginal_from_json(const nlohmann::json& j) {
    const std::string fam = j.at("family").get<std::string>();
    if (fam == "gaussian")
        return MarginalDistribution::gaussian(j.at("mean").get<double>(), j.at("std").get<double>());
    if (fam == "uniform")
        return MarginalDistribution::uniform(j.at("lower").get<double>(), j.at("upper").get<double>());
    throw std::invalid_argument("unknown marginal family: " + fam);
}

}  // namespace

nlohmann::json PceModel::to_json() const {
    nlohmann::json j;
    j["type"] = "pce";
    j["order"] = order_;
    j["marginals"] = nlohmann::json::array();
    for (const auto& m : inputs_.marginals()) j["marginals"].push_back(marginal_to_json(m));
    j["indices"] = indices_;
    j["coefficients"] = coefficients_;
    return j;
}

PceModel PceModel::from_json(const nlohmann::json& j) {
    if (j.at("type").get<std::string>() != "pce")
        throw std::invalid_argument("PceModel::from_json: not a pce record");
    std::vector<MarginalDistribution> marginals;
    for (const auto& mj : j.at("marginals")) marginals.push_back(marginal_from_json(mj));
    return PceModel(UncertainVector(std::move(marginals)), j.at("order").get<int>(),
                    j.at("indices").get<std::vector<MultiIndex>>(),
                    j.at("coefficients").get<std::vector<double>>());
}

}  // namespace raresim
