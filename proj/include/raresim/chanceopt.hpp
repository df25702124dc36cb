#pragma once

// Performance-guaranteed gain optimization: minimize a failure probability
// over the gain box subject to rare-event chance constraints (checked with
// 3-sigma-inflated estimates), ordinary chance constraints estimated by
// Monte Carlo on per-design chaos expansions, and deterministic constraints.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "raresim/flight.hpp"
#include "raresim/sbss.hpp"

namespace raresim {

enum class Direction { BelowLimit, AboveLimit };
enum class EstimatorKind { SurrogateMcs, Sbss };

struct ChanceConstraint {
    int function_index = 0;  // into h_0 .. h_4
    Direction direction = Direction::BelowLimit;
    double limit = 0.0;  // C_i
    double beta = 1.0;   // probabilistic threshold
    EstimatorKind estimator = EstimatorKind::SurrogateMcs;
    bool inflate = false;  // compare (1+3*cov_upper)*p_hat against beta
};

struct OptimizationProblem {
    FlightParams params;
    // Objective: minimize P[h_obj < limit] (below) or P[h_obj > limit].
    int objective_function = 0;
    Direction objective_direction = Direction::BelowLimit;
    double objective_limit = -0.45;
    std::vector<ChanceConstraint> constraints;
    std::array<std::pair<double, double>, 4> gain_box;

    std::size_t mcs_samples = 100000;
    int pce_order = 5;
    int quad_nodes_per_dim = 6;
    // Margin failures sit 5-6 sigma deep; a high proposal correlation keeps
    // the conditional chains moving there.
    SbssConfig sbss = [] {
        SbssConfig cfg;
        cfg.sus.proposal_rho = 0.95;
        cfg.sus.max_levels = 14;
        return cfg;
    }();

    std::size_t design_budget = 36;  // total design evaluations for the search
    std::size_t population = 9;
    double de_weight = 0.7;      // differential-evolution F
    double de_crossover = 0.9;   // CR
    std::optional<GainVector> initial_guess;

    void validate() const;
};

// Eq.-(32)-style acceptance: (1 + 3*cov_upper) * p_hat < beta.
bool check_rare_constraint(double p_hat, double cov_upper, double beta);

struct ConstraintEstimate {
    ChanceConstraint constraint;
    double p_hat = 0.0;
    double cov_lower = 0.0;
    double cov_upper = 0.0;
    long long true_calls = 0;
    double comparison_value = 0.0;  // inflated when requested
    bool satisfied = false;
    // Set when the estimator exhausted its levels with every threshold still
    // positive: the probability is then bounded above by p0^levels and
    // comparison_value carries that bound.
    bool upper_bound_only = false;
};

struct DesignEvaluation {
    GainVector gains;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string failure;
    double objective_p = 1.0;
    long long objective_calls = 0;
    std::vector<ConstraintEstimate> constraints;
    double c1 = 0.0;
    double c2 = 0.0;
    bool deterministic_ok = false;
    bool feasible = false;
    double violation = 0.0;  // ranking key among infeasible designs
    long long calls_pce = 0;
    long long calls_sbss = 0;
    long long calls_deterministic = 0;

    long long total_calls() const { return calls_pce + calls_sbss + calls_deterministic; }
};

DesignEvaluation evaluate_design(const OptimizationProblem& problem, const GainVector& gains,
                                 std::uint64_t seed);

// Empirical violation probability over surrogate samples; above-limit
// constraints are the exact negation P[h > C] = P[-h < -C].
double violation_probability(std::span<const double> values, Direction direction, double limit);

// Feasibility-first total order: any feasible design beats any infeasible
// one; feasible designs compare by objective, infeasible by violation.
bool design_better(const DesignEvaluation& a, const DesignEvaluation& b);

// Population-based differential-evolution search over the gain box with
// feasibility-first selection. optimize() drives it with evaluate_design;
// tests may inject synthetic evaluations through the same interface.
using DesignEvalFn =
    std::function<DesignEvaluation(const GainVector& gains, std::uint64_t seed)>;

struct SearchOutcome {
    std::vector<GainVector> population;
    std::vector<DesignEvaluation> evals;        // current population evaluations
    std::vector<DesignEvaluation> history;      // every evaluation, in order
};

SearchOutcome de_search(const std::array<std::pair<double, double>, 4>& box,
                        std::size_t design_budget, std::size_t population_size,
                        double de_weight, double de_crossover,
                        const std::optional<GainVector>& initial_guess,
                        const DesignEvalFn& evaluate, std::uint64_t seed);

struct OptimizationResult {
    bool feasible_found = false;
    GainVector best_gains;
    DesignEvaluation best;
    DesignEvaluation verification;  // independent re-run with fresh streams
    std::vector<DesignEvaluation> history;
    long long total_calls_pce = 0;
    long long total_calls_sbss = 0;
    long long total_calls_deterministic = 0;
};

OptimizationResult optimize(const OptimizationProblem& problem, std::uint64_t seed);

}  // namespace raresim
