#pragma once

// Independent uncertain parameter vectors: marginal distributions, sampling,
// and the isoprobabilistic transforms between physical and standard space.
//
// Two standard spaces are used. to_standard/from_standard map each marginal
// to its polynomial-family-native variable (Gaussian -> standard normal,
// Uniform -> uniform on [-1,1]); this is the space the chaos expansions live
// in. to_normal_space/from_normal_space map every marginal to a standard
// normal; this is the space the conditional-sampling MCMC operates in. The
// two coincide for Gaussian marginals.

#include <cstdint>
#include <span>
#include <vector>

#include "raresim/rng.hpp"

namespace raresim {

enum class MarginalFamily { Gaussian, Uniform };

struct MarginalDistribution {
    MarginalFamily family = MarginalFamily::Gaussian;
    // Gaussian: (mean, stddev). Uniform: (lower, upper).
    double a = 0.0;
    double b = 1.0;

    static MarginalDistribution gaussian(double mean, double stddev);
    static MarginalDistribution uniform(double lower, double upper);
};

// Structure-of-arrays batch of p-dimensional points; dim[r][s] is coordinate
// r of point s. The layout feeds the batch kernels directly.
struct Batch {
    std::size_t n = 0;
    std::vector<std::vector<double>> dim;

    static Batch zeros(std::size_t p, std::size_t n);
    std::vector<double> point(std::size_t s) const;
};

class UncertainVector {
public:
    explicit UncertainVector(std::vector<MarginalDistribution> marginals);

    std::size_t dim() const { return marginals_.size(); }
    const std::vector<MarginalDistribution>& marginals() const { return marginals_; }

    // n i.i.d. draws; deterministic given the stream.
    Batch sample(std::size_t n, RngStream& rng) const;

    // Family-native standard variables (PCE space).
    std::vector<double> to_standard(std::span<const double> theta) const;
    std::vector<double> from_standard(std::span<const double> xi) const;
    Batch to_standard(const Batch& theta) const;

    // All-Gaussian standard space (MCMC space).
    std::vector<double> to_normal_space(std::span<const double> theta) const;
    std::vector<double> from_normal_space(std::span<const double> xi) const;

    bool all_gaussian() const;

private:
    std::vector<MarginalDistribution> marginals_;
};

}  // namespace raresim
