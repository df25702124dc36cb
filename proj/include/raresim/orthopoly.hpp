#pragma once

// Univariate orthogonal polynomial families (probabilists' Hermite for
// Gaussian inputs, Legendre for Uniform), total-degree multivariate tensor
// bases, and Gauss quadrature rules under the probability-weighted
// normalization (weights sum to 1).

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "raresim/uncertainty.hpp"

namespace raresim {

enum class PolyFamily { HermiteProb, Legendre };

PolyFamily family_for(const MarginalDistribution& m);
std::vector<PolyFamily> families_for(const UncertainVector& uv);

// gamma_n = E[psi_n^2]: n! for probabilists' Hermite, 1/(2n+1) for Legendre.
double poly_norm(PolyFamily family, int degree);

// Three-term recurrence value of psi_degree at xi.
double eval_univariate(PolyFamily family, int degree, double xi);

// table[d][s] = psi_d(xs[s]) for d = 0..max_degree. Runs the recurrence
// vectorized across sample points.
void eval_univariate_batch(PolyFamily family, int max_degree, std::span<const double> xs,
                           std::vector<std::vector<double>>& table);

using MultiIndex = std::vector<int>;

int total_degree(const MultiIndex& idx);

// Number of multi-indices with total degree <= M in p variables,
// (M+p)!/(M!p!). Throws std::overflow_error when the basis would be
// unreasonably large.
std::size_t basis_count(int p, int M);

// All multi-indices with total degree <= M in graded-lexicographic order;
// index 0 is the all-zeros (constant) index.
std::vector<MultiIndex> total_degree_indices(int p, int M);

double eval_multivariate(std::span<const PolyFamily> families, const MultiIndex& idx,
                         std::span<const double> xi);

double multivariate_norm(std::span<const PolyFamily> families, const MultiIndex& idx);

struct QuadratureRule {
    Batch nodes;                   // standard-space nodes, SoA over p dims
    std::vector<double> weights;   // sums to 1
    int nodes_per_dim = 0;
};

// 1-D Gauss rule (nodes, weights) for the family's weight function,
// exact for polynomials up to degree 2q-1.
std::pair<std::vector<double>, std::vector<double>> gauss_rule_1d(PolyFamily family, int q);

// Full tensor product over the per-dimension families; q^p nodes.
QuadratureRule tensor_quadrature(std::span<const PolyFamily> families, int q);

}  // namespace raresim
