#include "raresim/rsm.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "raresim/kernels.hpp"
#include "raresim/stats.hpp"

namespace raresim {

namespace {

constexpr double kLeverageLimit = 1.0 - 1e-6;

struct Standardization {
    std::vector<double> center;
    std::vector<double> scale;
};

Standardization standardize(const Batch& samples) {
    Standardization st;
    st.center.resize(samples.dim.size());
    st.scale.resize(samples.dim.size());
    for (std::size_t r = 0; r < samples.dim.size(); ++r) {
        st.center[r] = mean_of(samples.dim[r]);
        const double sd = std::sqrt(variance_of(samples.dim[r]));
        st.scale[r] = (sd > 0.0) ? sd : 1.0;
    }
    return st;
}

// Monomial value tables z^d per dimension on standardized coordinates.
std::vector<std::vector<std::vector<double>>> monomial_tables(const Batch& samples,
                                                              const Standardization& st,
                                                              int max_degree) {
    const auto& ops = kernels::active_ops();
    const std::size_t n = samples.n;
    std::vector<std::vector<std::vector<double>>> tables(samples.dim.size());
    for (std::size_t r = 0; r < samples.dim.size(); ++r) {
        auto& table = tables[r];
        table.assign(static_cast<std::size_t>(max_degree) + 1, std::vector<double>(n));
        table[0].assign(n, 1.0);
        if (max_degree == 0) continue;
        const double inv = 1.0 / st.scale[r];
        for (std::size_t s = 0; s < n; ++s) table[1][s] = (samples.dim[r][s] - st.center[r]) * inv;
        for (int d = 1; d < max_degree; ++d) {
            ops.mul(table[1].data(), table[static_cast<std::size_t>(d)].data(),
                    table[static_cast<std::size_t>(d) + 1].data(), n);
        }
    }
    return tables;
}

Eigen::MatrixXd experimental_matrix(const std::vector<std::vector<std::vector<double>>>& tables,
                                    const std::vector<MultiIndex>& indices, std::size_t n) {
    const auto& ops = kernels::active_ops();
    Eigen::MatrixXd A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(indices.size()));
    std::vector<double> row;
    for (std::size_t j = 0; j < indices.size(); ++j) {
        const auto& idx = indices[j];
        row.assign(tables[0][static_cast<std::size_t>(idx[0])].begin(),
                   tables[0][static_cast<std::size_t>(idx[0])].end());
        for (std::size_t r = 1; r < tables.size(); ++r) {
            ops.mul(row.data(), tables[r][static_cast<std::size_t>(idx[r])].data(), row.data(), n);
        }
        for (std::size_t i = 0; i < n; ++i) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[i];
    }
    return A;
}

}  // namespace

RsmModel::RsmModel(int order, std::vector<MultiIndex> indices, std::vector<double> coefficients,
                   std::vector<double> center, std::vector<double> scale)
    : order_(order),
      indices_(std::move(indices)),
      coefficients_(std::move(coefficients)),
      center_(std::move(center)),
      scale_(std::move(scale)) {
    if (indices_.size() != coefficients_.size())
        throw std::invalid_argument("RsmModel: indices/coefficients size mismatch");
    for (double a : coefficients_) {
        if (!std::isfinite(a)) throw std::invalid_argument("RsmModel: non-finite coefficient");
    }
}

double RsmModel::evaluate(std::span<const double> theta) const {
    if (theta.size() != dim()) throw std::invalid_argument("RsmModel: dimension mismatch");
    const std::size_t p = dim();
    // powers[r*(order+1) + d] = z_r^d
    const std::size_t stride = static_cast<std::size_t>(order_) + 1;
    std::vector<double> powers(p * stride);
    for (std::size_t r = 0; r < p; ++r) {
        const double z = (theta[r] - center_[r]) / scale_[r];
        powers[r * stride] = 1.0;
        for (int d = 1; d <= order_; ++d) powers[r * stride + static_cast<std::size_t>(d)] = powers[r * stride + static_cast<std::size_t>(d) - 1] * z;
    }
    double v = 0.0;
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        double term = coefficients_[i];
        for (std::size_t r = 0; r < p; ++r) {
            term *= powers[r * stride + static_cast<std::size_t>(indices_[i][r])];
        }
        v += term;
    }
    return v;
}

std::vector<double> RsmModel::evaluate_batch(const Batch& thetas) const {
    if (thetas.dim.size() != dim()) throw std::invalid_argument("RsmModel: dimension mismatch");
    const auto& ops = kernels::active_ops();
    Standardization st{center_, scale_};
    const auto tables = monomial_tables(thetas, st, order_);
    std::vector<double> out(thetas.n, 0.0);
    std::vector<double> row;
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        const auto& idx = indices_[i];
        row.assign(tables[0][static_cast<std::size_t>(idx[0])].begin(),
                   tables[0][static_cast<std::size_t>(idx[0])].end());
        for (std::size_t r = 1; r < tables.size(); ++r) {
            ops.mul(row.data(), tables[r][static_cast<std::size_t>(idx[r])].data(), row.data(), thetas.n);
        }
        ops.axpy(coefficients_[i], row.data(), out.data(), thetas.n);
    }
    return out;
}

RsmFit fit_rsm(const Batch& samples, std::span<const double> responses, int order) {
    const std::size_t n_s = samples.n;
    if (n_s != responses.size())
        throw std::invalid_argument("fit_rsm: samples/responses size mismatch");
    const int p = static_cast<int>(samples.dim.size());
    const std::size_t P = basis_count(p, order);
    if (n_s < P + 1) throw std::invalid_argument("fit_rsm: need n_s >= P+1");
    const double var_y = variance_of(responses);
    if (!(var_y > 0.0)) throw DegenerateDesignError("fit_rsm: constant responses");

    const auto st = standardize(samples);
    const auto indices = total_degree_indices(p, order);
    const auto tables = monomial_tables(samples, st, order);
    const Eigen::MatrixXd A = experimental_matrix(tables, indices, n_s);
    Eigen::Map<const Eigen::VectorXd> y(responses.data(), static_cast<Eigen::Index>(n_s));

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < static_cast<Eigen::Index>(P))
        throw DegenerateDesignError("fit_rsm: rank-deficient experimental matrix");
    const Eigen::VectorXd a = qr.solve(y);
    const Eigen::VectorXd resid = y - A * a;

    // Leverages from an orthonormal basis of col(A).
    Eigen::MatrixXd thin_q = qr.householderQ() * Eigen::MatrixXd::Identity(
                                                     static_cast<Eigen::Index>(n_s),
                                                     static_cast<Eigen::Index>(P));
    FitDiagnostics diag;
    diag.leverages.resize(n_s);
    for (std::size_t i = 0; i < n_s; ++i) {
        diag.leverages[i] = thin_q.row(static_cast<Eigen::Index>(i)).squaredNorm();
    }

    double emp = 0.0;
    double loo = 0.0;
    for (std::size_t i = 0; i < n_s; ++i) {
        const double r = resid(static_cast<Eigen::Index>(i));
        emp += r * r;
        const double denom = 1.0 - diag.leverages[i];
        const double li = (denom > 0.0) ? r / denom : std::numeric_limits<double>::infinity();
        loo += li * li;
    }
    diag.eps_emp = emp / static_cast<double>(n_s);
    diag.eps_loo = loo / static_cast<double>(n_s);
    diag.eps_emp_rel = diag.eps_emp / var_y;
    diag.eps_loo_rel = diag.eps_loo / var_y;

    std::vector<double> coeffs(a.data(), a.data() + a.size());
    return {RsmModel(order, indices, std::move(coeffs), st.center, st.scale), std::move(diag)};
}

AdaptiveRsmFit fit_rsm_adaptive(const Batch& samples, std::span<const double> responses,
                                int order_min, int order_max) {
    if (order_min > order_max)
        throw std::invalid_argument("fit_rsm_adaptive: order_min > order_max");
    const int p = static_cast<int>(samples.dim.size());
    std::vector<OrderTrial> trials;
    std::vector<RsmFit> fits;
    int best = -1;
    for (int M = order_min; M <= order_max; ++M) {
        OrderTrial trial;
        trial.order = M;
        const std::size_t P = basis_count(p, M);
        if (samples.n < P + 1) {
            trial.reason = "n_s < P+1";
            trials.push_back(trial);
            continue;
        }
        try {
            RsmFit fit = fit_rsm(samples, responses, M);
            double max_lev = 0.0;
            for (double s : fit.diagnostics.leverages) max_lev = std::max(max_lev, s);
            if (max_lev > kLeverageLimit) {
                trial.reason = "near-unit leverage";
                trials.push_back(trial);
                continue;
            }
            trial.feasible = true;
            trial.eps_emp_rel = fit.diagnostics.eps_emp_rel;
            trial.eps_loo_rel = fit.diagnostics.eps_loo_rel;
            trials.push_back(trial);
            fits.push_back(std::move(fit));
            const std::size_t k = fits.size() - 1;
            if (best < 0 ||
                fits[static_cast<std::size_t>(k)].diagnostics.eps_loo_rel <
                    fits[static_cast<std::size_t>(best)].diagnostics.eps_loo_rel) {
                best = static_cast<int>(k);
            }
        } catch (const DegenerateDesignError& e) {
            trial.reason = e.what();
            trials.push_back(trial);
        }
    }
    if (best < 0) throw DegenerateDesignError("fit_rsm_adaptive: no feasible order");
    RsmFit& chosen = fits[static_cast<std::size_t>(best)];
    const int chosen_order = chosen.model.order();
    return {std::move(chosen.model), std::move(chosen.diagnostics), chosen_order,
            std::move(trials)};
}

}  // namespace raresim
