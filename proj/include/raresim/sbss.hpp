#pragma once

// Surrogate-based subset simulation: an initial spectral-projection PCE is
// refined level by level with local response surfaces fitted on the samples
// closest to the failure domain; seed screening and MCMC acceptance run on
// the refined surrogate, so per level only the p~0*N candidate samples touch
// the true model.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "raresim/common.hpp"
#include "raresim/pce.hpp"
#include "raresim/rsm.hpp"
#include "raresim/sus.hpp"
#include "raresim/uncertainty.hpp"

namespace raresim {

// Global surrogate refined progressively: the initial PCE overlaid by local
// models activated below successive, strictly decreasing thresholds.
class PiecewiseSurrogate {
public:
    explicit PiecewiseSurrogate(PceModel initial);

    void refine(double threshold, RsmModel local);

    double evaluate(std::span<const double> theta) const;
    std::vector<double> evaluate_batch(const Batch& thetas) const;

    const PceModel& initial() const { return initial_; }
    std::size_t refinement_count() const { return locals_.size(); }
    const std::vector<double>& thresholds() const { return thresholds_; }
    const RsmModel& local_at(std::size_t l) const { return locals_.at(l); }

private:
    PceModel initial_;
    std::vector<double> thresholds_;  // strictly decreasing
    std::vector<RsmModel> locals_;
};

struct SbssConfig {
    SusConfig sus;
    double p0_tilde = 0.11;  // screening fraction, >= p0
    int pce_order = 5;
    int quad_nodes_per_dim = 6;
    int rsm_order_min = 2;
    int rsm_order_max = 7;

    std::vector<std::string> validate(std::size_t dim) const;
    std::size_t candidates_per_level() const;  // N~_s = p~0*N
};

// Candidate selection is seed selection on surrogate values with the larger
// fraction; kept as its own name to mirror the two thresholds.
inline SeedSelection select_candidates(std::span<const double> surrogate_values,
                                       std::size_t n_tilde) {
    return select_seeds(surrogate_values, n_tilde);
}

EstimationResult run_sbss(const Evaluator& h, const UncertainVector& uv, const SbssConfig& cfg,
                          std::uint64_t seed);

}  // namespace raresim
