#include "raresim/uncertainty.hpp"

#include <cmath>
#include <stdexcept>

#include "raresim/stats.hpp"

namespace raresim {

MarginalDistribution MarginalDistribution::gaussian(double mean, double stddev) {
    if (!(stddev > 0.0)) throw std::invalid_argument("gaussian marginal: stddev must be > 0");
    return {MarginalFamily::Gaussian, mean, stddev};
}

MarginalDistribution MarginalDistribution::uniform(double lower, double upper) {
    if (!(lower < upper)) throw std::invalid_argument("uniform marginal: lower must be < upper");
    return {MarginalFamily::Uniform, lower, upper};
}

Batch Batch::zeros(std::size_t p, std::size_t n) {
    Batch batch;
    batch.n = n;
    batch.dim.assign(p, std::vector<double>(n, 0.0));
    return batch;
}

std::vector<double> Batch::point(std::size_t s) const {
    std::vector<double> x(dim.size());
    for (std::size_t r = 0; r < dim.size(); ++r) x[r] = dim[r][s];
    return x;
}

UncertainVector::UncertainVector(std::vector<MarginalDistribution> marginals)
    : marginals_(std::move(marginals)) {
    if (marginals_.empty()) throw std::invalid_argument("UncertainVector: need at least one marginal");
    for (const auto& m : marginals_) {
        if (m.family == MarginalFamily::Gaussian && !(m.b > 0.0))
            throw std::invalid_argument("UncertainVector: gaussian stddev must be > 0");
        if (m.family == MarginalFamily::Uniform && !(m.a < m.b))
            throw std::invalid_argument("UncertainVector: uniform bounds must satisfy lower < upper");
    }
}

Batch UncertainVector::sample(std::size_t n, RngStream& rng) const {
    if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
    Batch batch = Batch::zeros(dim(), n);
    // Sample point-major so a single stream reproduces the same point
    // sequence independent of p-loop vectorization.
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t r = 0; r < dim(); ++r) {
            const auto& m = marginals_[r];
            batch.dim[r][s] = (m.family == MarginalFamily::Gaussian)
                                  ? rng.normal(m.a, m.b)
                                  : rng.uniform(m.a, m.b);
        }
    }
    return batch;
}

std::vector<double> UncertainVector::to_standard(std::span<const double> theta) const {
    if (theta.size() != dim()) throw std::invalid_argument("to_standard: dimension mismatch");
    std::vector<double> xi(dim());
    for (std::size_t r = 0; r < dim(); ++r) {
        const auto& m = marginals_[r];
        xi[r] = (m.family == MarginalFamily::Gaussian)
                    ? (theta[r] - m.a) / m.b
                    : 2.0 * (theta[r] - m.a) / (m.b - m.a) - 1.0;
    }
    return xi;
}

std::vector<double> UncertainVector::from_standard(std::span<const double> xi) const {
    if (xi.size() != dim()) throw std::invalid_argument("from_standard: dimension mismatch");
    std::vector<double> theta(dim());
    for (std::size_t r = 0; r < dim(); ++r) {
        const auto& m = marginals_[r];
        theta[r] = (m.family == MarginalFamily::Gaussian)
                       ? m.a + m.b * xi[r]
                       : m.a + 0.5 * (xi[r] + 1.0) * (m.b - m.a);
    }
    return theta;
}

Batch UncertainVector::to_standard(const Batch& theta) const {
    if (theta.dim.size() != dim()) throw std::invalid_argument("to_standard: dimension mismatch");
    Batch xi = Batch::zeros(dim(), theta.n);
    for (std::size_t r = 0; r < dim(); ++r) {
        const auto& m = marginals_[r];
        if (m.family == MarginalFamily::Gaussian) {
            const double inv = 1.0 / m.b;
            for (std::size_t s = 0; s < theta.n; ++s) xi.dim[r][s] = (theta.dim[r][s] - m.a) * inv;
        } else {
            const double inv = 2.0 / (m.b - m.a);
            for (std::size_t s = 0; s < theta.n; ++s) xi.dim[r][s] = (theta.dim[r][s] - m.a) * inv - 1.0;
        }
    }
    return xi;
}

std::vector<double> UncertainVector::to_normal_space(std::span<const double> theta) const {
    if (theta.size() != dim()) throw std::invalid_argument("to_normal_space: dimension mismatch");
    std::vector<double> xi(dim());
    for (std::size_t r = 0; r < dim(); ++r) {
        const auto& m = marginals_[r];
        if (m.family == MarginalFamily::Gaussian) {
            xi[r] = (theta[r] - m.a) / m.b;
        } else {
            const double u = (theta[r] - m.a) / (m.b - m.a);
            xi[r] = normal_quantile(u);
        }
    }
    return xi;
}

std::vector<double> UncertainVector::from_normal_space(std::span<const double> xi) const {
    if (xi.size() != dim()) throw std::invalid_argument("from_normal_space: dimension mismatch");
    std::vector<double> theta(dim());
    for (std::size_t r = 0; r < dim(); ++r) {
        const auto& m = marginals_[r];
        if (m.family == MarginalFamily::Gaussian) {
            theta[r] = m.a + m.b * xi[r];
        } else {
            theta[r] = m.a + (m.b - m.a) * normal_cdf(xi[r]);
        }
    }
    return theta;
}

bool UncertainVector::all_gaussian() const {
    for (const auto& m : marginals_) {
        if (m.family != MarginalFamily::Gaussian) return false;
    }
    return true;
}

}  // namespace raresim
