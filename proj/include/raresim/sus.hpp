#pragma once

// Basic subset simulation: conditional-probability factorization over nested
// intermediate failure domains, percentile threshold selection, c.o.v.
// bounds from chain-indicator autocorrelation, and audited true-model call
// accounting. Failure is h(theta) <= 0; callers encode P[h < C] by shifting.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "raresim/common.hpp"
#include "raresim/uncertainty.hpp"

namespace raresim {

struct SusConfig {
    std::size_t samples_per_level = 2000;  // N
    double p0 = 0.1;
    int max_levels = 25;
    double proposal_rho = 0.8;

    // Throws ConfigError on hard violations; returns advisory warnings
    // (e.g. p0 outside the recommended [0.1, 0.3] band).
    std::vector<std::string> validate() const;

    std::size_t seeds_per_level() const;  // N_s = p0*N
    std::size_t chain_length() const;     // N/N_s
};

struct LevelSummary {
    int level = 0;                 // population index j
    double threshold = 0.0;        // b_{j+1} found from this population
    double threshold_tilde = 0.0;  // SBSS only: b~_{j+1} (NaN for SuS)
    double cond_prob = 0.0;        // p_{j+1}
    long long true_calls = 0;      // true-model calls spent on this population
    int rsm_order = -1;            // SBSS only
    double rsm_eps_loo_rel = 0.0;  // SBSS only
};

struct EstimationResult {
    std::string method;
    double p_hat = 0.0;
    std::vector<double> thresholds;  // b_1 .. b_m (last one <= 0 when converged)
    std::vector<double> cond_probs;  // p_1 .. p_m
    int levels = 0;                  // m
    std::size_t n_f = 0;
    double cov_lower = 0.0;
    double cov_upper = 0.0;
    long long true_calls = 0;
    bool converged = true;
    std::vector<LevelSummary> level_records;
};

// N_s-th smallest value and the indices of the N_s smallest entries
// (ties broken by index). Indices are returned in ascending-value order.
struct SeedSelection {
    std::vector<std::size_t> indices;
    double threshold = 0.0;
};
SeedSelection select_seeds(std::span<const double> values, std::size_t n_s);

// Per-population indicator series for the c.o.v. estimator. chains == 0
// marks an i.i.d. (level 0) population.
struct LevelIndicators {
    std::size_t chains = 0;
    std::size_t chain_len = 0;
    std::vector<std::uint8_t> indicator;  // chain-major
    double p = 0.0;                       // estimated conditional probability
};

// Lower bound assumes uncorrelated level estimates, upper bound fully
// correlated ones; per-level terms include the chain-autocorrelation
// factor gamma.
std::pair<double, double> cov_bounds(std::span<const LevelIndicators> levels,
                                     std::size_t samples_per_level);

EstimationResult run_sus(const Evaluator& h, const UncertainVector& uv, const SusConfig& cfg,
                         std::uint64_t seed);

// Crude Monte Carlo baseline under the same failure convention.
EstimationResult run_mcs(const Evaluator& h, const UncertainVector& uv, std::size_t n,
                         std::uint64_t seed);

}  // namespace raresim
