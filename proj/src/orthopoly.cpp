#include "raresim/orthopoly.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "raresim/kernels.hpp"

namespace raresim {

PolyFamily family_for(const MarginalDistribution& m) {
    return m.family == MarginalFamily::Gaussian ? PolyFamily::HermiteProb : PolyFamily::Legendre;
}

std::vector<PolyFamily> families_for(const UncertainVector& uv) {
    std::vector<PolyFamily> fams;
    fams.reserve(uv.dim());
    for (const auto& m : uv.marginals()) fams.push_back(family_for(m));
    return fams;
}

double poly_norm(PolyFamily family, int degree) {
    if (degree < 0) throw std::invalid_argument("poly_norm: negative degree");
    if (family == PolyFamily::HermiteProb) {
        double g = 1.0;
        for (int k = 2; k <= degree; ++k) g *= static_cast<double>(k);
        return g;
    }
    return 1.0 / static_cast<double>(2 * degree + 1);
}

double eval_univariate(PolyFamily family, int degree, double xi) {
    if (degree < 0) throw std::invalid_argument("eval_univariate: negative degree");
    if (degree == 0) return 1.0;
    double prev = 1.0;
    double cur = xi;
    if (family == PolyFamily::HermiteProb) {
        for (int n = 1; n < degree; ++n) {
            const double next = xi * cur - static_cast<double>(n) * prev;
            prev = cur;
            cur = next;
        }
    } else {
        for (int n = 1; n < degree; ++n) {
            const double a = static_cast<double>(2 * n + 1) / static_cast<double>(n + 1);
            const double c = static_cast<double>(n) / static_cast<double>(n + 1);
            const double next = a * xi * cur - c * prev;
            prev = cur;
            cur = next;
        }
    }
    return cur;
}

void eval_univariate_batch(PolyFamily family, int max_degree, std::span<const double> xs,
                           std::vector<std::vector<double>>& table) {
    const std::size_t n = xs.size();
    table.assign(static_cast<std::size_t>(max_degree) + 1, std::vector<double>(n));
    table[0].assign(n, 1.0);
    if (max_degree == 0) return;
    table[1].assign(xs.begin(), xs.end());
    const auto& ops = kernels::active_ops();
    for (int d = 1; d < max_degree; ++d) {
        double a = 1.0;
        double c = static_cast<double>(d);
        if (family == PolyFamily::Legendre) {
            a = static_cast<double>(2 * d + 1) / static_cast<double>(d + 1);
            c = static_cast<double>(d) / static_cast<double>(d + 1);
        }
        ops.recurrence_step(a, c, xs.data(), table[d].data(), table[d - 1].data(),
                            table[d + 1].data(), n);
    }
}

int total_degree(const MultiIndex& idx) {
    int d = 0;
    for (int m : idx) d += m;
    return d;
}

std::size_t basis_count(int p, int M) {
    if (p < 1 || M < 0) throw std::invalid_argument("basis_count: need p >= 1, M >= 0");
    unsigned long long count = 1;
    for (int k = 1; k <= p; ++k) {
        count = count * static_cast<unsigned long long>(M + k) / static_cast<unsigned long long>(k);
        if (count > 50'000'000ull) throw std::overflow_error("basis_count: basis too large");
    }
    return static_cast<std::size_t>(count);
}

namespace {

void fill_indices(int p, int pos, int remaining, MultiIndex& cur,
                  std::vector<MultiIndex>& out) {
    if (pos == p - 1) {
        cur[static_cast<std::size_t>(pos)] = remaining;
        out.push_back(cur);
        return;
    }
    for (int d = remaining; d >= 0; --d) {
        cur[static_cast<std::size_t>(pos)] = d;
        fill_indices(p, pos + 1, remaining - d, cur, out);
    }
}

}  // namespace

std::vector<MultiIndex> total_degree_indices(int p, int M) {
    const std::size_t count = basis_count(p, M);
    std::vector<MultiIndex> out;
    out.reserve(count);
    MultiIndex cur(static_cast<std::size_t>(p), 0);
    for (int total = 0; total <= M; ++total) {
        fill_indices(p, 0, total, cur, out);
    }
    return out;
}

double eval_multivariate(std::span<const PolyFamily> families, const MultiIndex& idx,
                         std::span<const double> xi) {
    if (families.size() != idx.size() || xi.size() != idx.size())
        throw std::invalid_argument("eval_multivariate: dimension mismatch");
    double v = 1.0;
    for (std::size_t r = 0; r < idx.size(); ++r) {
        v *= eval_univariate(families[r], idx[r], xi[r]);
    }
    return v;
}

double multivariate_norm(std::span<const PolyFamily> families, const MultiIndex& idx) {
    double g = 1.0;
    for (std::size_t r = 0; r < idx.size(); ++r) g *= poly_norm(families[r], idx[r]);
    return g;
}

std::pair<std::vector<double>, std::vector<double>> gauss_rule_1d(PolyFamily family, int q) {
    if (q < 1) throw std::invalid_argument("gauss_rule_1d: q must be >= 1");
    // Golub-Welsch on the monic-recurrence Jacobi matrix. Both families have
    // zero diagonal; off-diagonals are sqrt(k) (Hermite) or k/sqrt(4k^2-1)
    // (Legendre with density 1/2 on [-1,1]).
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(q, q);
    for (int k = 1; k < q; ++k) {
        const double beta = (family == PolyFamily::HermiteProb)
                                ? std::sqrt(static_cast<double>(k))
                                : static_cast<double>(k) / std::sqrt(4.0 * k * k - 1.0);
        jacobi(k - 1, k) = beta;
        jacobi(k, k - 1) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    std::vector<double> nodes(static_cast<std::size_t>(q));
    std::vector<double> weights(static_cast<std::size_t>(q));
    for (int i = 0; i < q; ++i) {
        nodes[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
        const double v0 = solver.eigenvectors()(0, i);
        weights[static_cast<std::size_t>(i)] = v0 * v0;  // mu_0 = 1 for both families
    }
    return {nodes, weights};
}

QuadratureRule tensor_quadrature(std::span<const PolyFamily> families, int q) {
    const int p = static_cast<int>(families.size());
    if (p < 1) throw std::invalid_argument("tensor_quadrature: need at least one dimension");
    double qcount = 1.0;
    for (int r = 0; r < p; ++r) qcount *= static_cast<double>(q);
    if (qcount > 5e7) throw std::overflow_error("tensor_quadrature: node count too large");
    const std::size_t total = static_cast<std::size_t>(qcount);

    std::vector<std::vector<double>> nodes1d(static_cast<std::size_t>(p));
    std::vector<std::vector<double>> weights1d(static_cast<std::size_t>(p));
    for (int r = 0; r < p; ++r) {
        auto [n1, w1] = gauss_rule_1d(families[static_cast<std::size_t>(r)], q);
        nodes1d[static_cast<std::size_t>(r)] = std::move(n1);
        weights1d[static_cast<std::size_t>(r)] = std::move(w1);
    }

    QuadratureRule rule;
    rule.nodes = Batch::zeros(static_cast<std::size_t>(p), total);
    rule.weights.assign(total, 1.0);
    rule.nodes_per_dim = q;
    for (std::size_t j = 0; j < total; ++j) {
        std::size_t rem = j;
        for (int r = 0; r < p; ++r) {
            const std::size_t k = rem % static_cast<std::size_t>(q);
            rem /= static_cast<std::size_t>(q);
            rule.nodes.dim[static_cast<std::size_t>(r)][j] = nodes1d[static_cast<std::size_t>(r)][k];
            rule.weights[j] *= weights1d[static_cast<std::size_t>(r)][k];
        }
    }
    return rule;
}

}  // namespace raresim
