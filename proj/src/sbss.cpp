#include "raresim/sbss.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "raresim/mcmc.hpp"
#include "raresim/parallel.hpp"

namespace raresim {

PiecewiseSurrogate::PiecewiseSurrogate(PceModel initial) : initial_(std::move(initial)) {}

void PiecewiseSurrogate::refine(double threshold, RsmModel local) {
    if (!thresholds_.empty() && !(threshold < thresholds_.back()))
        throw std::invalid_argument("PiecewiseSurrogate: thresholds must be strictly decreasing");
    thresholds_.push_back(threshold);
    locals_.push_back(std::move(local));
}

double PiecewiseSurrogate::evaluate(std::span<const double> theta) const {
    double v = initial_.evaluate(theta);
    for (std::size_t l = 0; l < locals_.size(); ++l) {
        if (v > thresholds_[l]) break;  // later thresholds are smaller
        v = locals_[l].evaluate(theta);
    }
    return v;
}

std::vector<double> PiecewiseSurrogate::evaluate_batch(const Batch& thetas) const {
    std::vector<double> v = initial_.evaluate_batch(thetas);
    std::vector<std::size_t> active(thetas.n);
    for (std::size_t i = 0; i < thetas.n; ++i) active[i] = i;
    for (std::size_t l = 0; l < locals_.size() && !active.empty(); ++l) {
        std::vector<std::size_t> keep;
        for (std::size_t i : active) {
            if (v[i] <= thresholds_[l]) keep.push_back(i);
        }
        if (!keep.empty()) {
            Batch sub = Batch::zeros(thetas.dim.size(), keep.size());
            for (std::size_t r = 0; r < thetas.dim.size(); ++r) {
                for (std::size_t k = 0; k < keep.size(); ++k) sub.dim[r][k] = thetas.dim[r][keep[k]];
            }
            const std::vector<double> local_values = locals_[l].evaluate_batch(sub);
            for (std::size_t k = 0; k < keep.size(); ++k) v[keep[k]] = local_values[k];
        }
        active = std::move(keep);
    }
    return v;
}

std::vector<std::string> SbssConfig::validate(std::size_t dim) const {
    std::vector<std::string> warnings = sus.validate();
    if (!(p0_tilde > 0.0 && p0_tilde < 1.0)) throw ConfigError("sbss: p0_tilde must be in (0,1)");
    if (p0_tilde < sus.p0) throw ConfigError("sbss: p0_tilde must be >= p0");
    const double nt = p0_tilde * static_cast<double>(sus.samples_per_level);
    if (std::abs(nt - std::llround(nt)) > 1e-9 || std::llround(nt) < 1)
        throw ConfigError("sbss: p0_tilde*N must be a positive integer");
    if (pce_order < 0) throw ConfigError("sbss: pce_order must be >= 0");
    if (quad_nodes_per_dim < pce_order + 1)
        throw ConfigError("sbss: quadrature nodes per dim must be >= pce_order+1");
    if (rsm_order_min > rsm_order_max) throw ConfigError("sbss: rsm order range empty");
    bool any_feasible = false;
    for (int m = rsm_order_min; m <= rsm_order_max; ++m) {
        if (candidates_per_level() >= basis_count(static_cast<int>(dim), m) + 1)
            any_feasible = true;
    }
    if (!any_feasible)
        throw ConfigError("sbss: no RSM order feasible for the candidate set size");
    return warnings;
}

std::size_t SbssConfig::candidates_per_level() const {
    return static_cast<std::size_t>(
        std::llround(p0_tilde * static_cast<double>(sus.samples_per_level)));
}

namespace {

struct Population {
    std::vector<std::vector<double>> theta;  // physical coordinates, chain-major
    std::vector<std::vector<double>> xi;     // normal-space coordinates
    std::vector<double> surrogate;           // current-surrogate values
    std::size_t chains = 0;
    std::size_t chain_len = 0;
};

LevelIndicators candidate_indicators(const Population& pop,
                                     const std::vector<std::size_t>& candidates,
                                     const std::vector<double>& true_values, double threshold,
                                     double p) {
    LevelIndicators lev;
    lev.chains = pop.chains;
    lev.chain_len = pop.chain_len;
    lev.p = p;
    lev.indicator.assign(pop.theta.size(), 0);
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (true_values[k] <= threshold) lev.indicator[candidates[k]] = 1;
    }
    return lev;
}

// Failure count at the terminal level. Candidates count by their true
// values. A non-candidate keeps its refined-surrogate value (the last local
// model only engages below the screening threshold, which the non-candidate
// exceeds), so when the screening percentile itself drops below zero the
// failing fraction can exceed p~0 and the surrogate value is the best
// available evidence; with a non-negative screening threshold this reduces
// to counting candidates only.
std::size_t terminal_failure_count(const Population& pop,
                                   const std::vector<std::size_t>& candidates,
                                   const std::vector<double>& true_values,
                                   LevelIndicators& indicators) {
    std::vector<std::uint8_t> is_candidate(pop.theta.size(), 0);
    for (std::size_t idx : candidates) is_candidate[idx] = 1;
    std::size_t n_f = 0;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (true_values[k] <= 0.0) {
            indicators.indicator[candidates[k]] = 1;
            ++n_f;
        }
    }
    for (std::size_t i = 0; i < pop.theta.size(); ++i) {
        if (!is_candidate[i] && pop.surrogate[i] <= 0.0) {
            indicators.indicator[i] = 1;
            ++n_f;
        }
    }
    return n_f;
}

}  // namespace

EstimationResult run_sbss(const Evaluator& h, const UncertainVector& uv, const SbssConfig& cfg,
                          std::uint64_t seed) {
    cfg.validate(uv.dim());
    const std::size_t n = cfg.sus.samples_per_level;
    const std::size_t n_s = cfg.sus.seeds_per_level();
    const std::size_t n_tilde = cfg.candidates_per_level();
    const std::size_t chain_len = cfg.sus.chain_length();
    const ConditionalKernel kernel(cfg.sus.proposal_rho);

    EstimationResult result;
    result.method = "sbss";
    std::atomic<long long> true_calls{0};

    // Initial global surrogate by spectral projection; N0 true calls.
    const auto families = families_for(uv);
    const QuadratureRule rule = tensor_quadrature(families, cfg.quad_nodes_per_dim);
    const Evaluator counted_h = [&](std::span<const double> theta) {
        true_calls.fetch_add(1, std::memory_order_relaxed);
        return h(theta);
    };
    PceFit pce = fit_projection(counted_h, uv, cfg.pce_order, rule);
    PiecewiseSurrogate surrogate(std::move(pce.model));

    // Level 0: i.i.d. samples ranked by the initial surrogate. Seed selection
    // and the first threshold use surrogate values only; candidate batches
    // (and with them true-model calls) start at the first MCMC level, which
    // keeps the per-level call count at p~0*N and the total at
    // N0 + (m-1)*p~0*N.
    Population pop;
    {
        RngStream stream(derive_seed(seed, 0));
        const Batch thetas = uv.sample(n, stream);
        pop.surrogate = surrogate.evaluate_batch(thetas);
        pop.theta.resize(n);
        pop.xi.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            pop.theta[i] = thetas.point(i);
            pop.xi[i] = uv.to_normal_space(pop.theta[i]);
        }
    }

    std::vector<LevelIndicators> level_indicators;
    const SeedSelection level0 = select_seeds(pop.surrogate, n_s);
    result.thresholds.push_back(level0.threshold);
    {
        LevelSummary record;
        record.level = 0;
        record.threshold = level0.threshold;
        record.threshold_tilde = std::numeric_limits<double>::quiet_NaN();
        record.true_calls = pce.true_calls;
        record.cond_prob = cfg.sus.p0;
        result.level_records.push_back(record);
    }

    if (level0.threshold <= 0.0) {
        // Failure is not rare under the surrogate: degenerate single-level
        // run, counted on the surrogate like the initial screening itself.
        std::size_t n_f = 0;
        for (double v : pop.surrogate) n_f += (v <= 0.0) ? 1 : 0;
        result.levels = 1;
        result.n_f = n_f;
        result.p_hat = static_cast<double>(n_f) / static_cast<double>(n);
        result.cond_probs.assign(1, result.p_hat);
        result.level_records[0].cond_prob = result.p_hat;
        result.true_calls = true_calls.load();
        LevelIndicators lev;
        lev.p = result.p_hat;
        for (double v : pop.surrogate) lev.indicator.push_back(v <= 0.0 ? 1 : 0);
        const auto [lo, hi] = cov_bounds(std::vector<LevelIndicators>{lev}, n);
        result.cov_lower = lo;
        result.cov_upper = hi;
        return result;
    }

    result.cond_probs.push_back(cfg.sus.p0);
    {
        LevelIndicators lev;
        lev.p = cfg.sus.p0;
        for (double v : pop.surrogate) lev.indicator.push_back(v <= level0.threshold ? 1 : 0);
        level_indicators.push_back(std::move(lev));
    }

    std::vector<std::size_t> seed_indices = level0.indices;
    double current_b = level0.threshold;

    for (int level = 1;; ++level) {
        if (level >= cfg.sus.max_levels) {
            result.converged = false;
            result.levels = level;
            result.n_f = 0;
            result.p_hat = 0.0;
            break;
        }

        // MCMC population screened by the refined surrogate only.
        Population next;
        next.chains = n_s;
        next.chain_len = chain_len;
        next.theta.resize(n);
        next.xi.resize(n);
        next.surrogate.resize(n);
        const double b = current_b;
        const std::uint64_t level_seed =
            derive_seed(seed, 1000 + static_cast<std::uint64_t>(level - 1));
        parallel_for(n_s, [&](std::size_t c) {
            RngStream stream(derive_seed(level_seed, c));
            std::vector<double> cand_values;
            std::vector<std::vector<double>> cand_thetas;
            cand_values.reserve(chain_len - 1);
            cand_thetas.reserve(chain_len - 1);
            const ScreenFn screen = [&](std::span<const double> xi) {
                std::vector<double> theta = uv.from_normal_space(xi);
                const double value = surrogate.evaluate(theta);
                cand_values.push_back(value);
                cand_thetas.push_back(std::move(theta));
                return value <= b;
            };
            const std::size_t si = seed_indices[c];
            const Chain chain = advance_chain(kernel, pop.xi[si], chain_len, screen, stream);
            double value = surrogate.evaluate(pop.theta[si]);
            std::vector<double> theta = pop.theta[si];
            for (std::size_t k = 0; k < chain_len; ++k) {
                if (k > 0 && chain.accepted[k - 1]) {
                    value = cand_values[k - 1];
                    theta = cand_thetas[k - 1];
                }
                next.xi[c * chain_len + k] = chain.states[k];
                next.theta[c * chain_len + k] = theta;
                next.surrogate[c * chain_len + k] = value;
            }
        });
        pop = std::move(next);

        // Screen candidates by surrogate value, then evaluate them on the
        // true model: the only true-model batch of the level.
        const SeedSelection cand = select_candidates(pop.surrogate, n_tilde);
        std::vector<double> true_values(n_tilde);
        parallel_for(n_tilde, [&](std::size_t k) {
            true_values[k] = h(pop.theta[cand.indices[k]]);
            true_calls.fetch_add(1, std::memory_order_relaxed);
        });

        const SeedSelection seeds_by_true = select_seeds(true_values, n_s);
        const double b_next = seeds_by_true.threshold;
        result.thresholds.push_back(b_next);

        // Local response surface on the candidate set, then refine the
        // global surrogate below the screening threshold.
        Batch cand_batch = Batch::zeros(uv.dim(), n_tilde);
        for (std::size_t r = 0; r < uv.dim(); ++r) {
            for (std::size_t k = 0; k < n_tilde; ++k) {
                cand_batch.dim[r][k] = pop.theta[cand.indices[k]][r];
            }
        }
        AdaptiveRsmFit local = [&] {
            try {
                return fit_rsm_adaptive(cand_batch, true_values, cfg.rsm_order_min,
                                        cfg.rsm_order_max);
            } catch (const DegenerateDesignError& e) {
                std::size_t distinct = 0;
                std::vector<double> sorted = true_values;
                std::sort(sorted.begin(), sorted.end());
                for (std::size_t k = 0; k < sorted.size(); ++k) {
                    if (k == 0 || sorted[k] != sorted[k - 1]) ++distinct;
                }
                throw DegenerateDesignError(
                    "sbss level " + std::to_string(level) + ": " + e.what() + " (" +
                    std::to_string(distinct) + " distinct candidate responses of " +
                    std::to_string(true_values.size()) + ")");
            }
        }();
        surrogate.refine(cand.threshold, std::move(local.model));

        LevelSummary record;
        record.level = level;
        record.threshold = b_next;
        record.threshold_tilde = cand.threshold;
        record.true_calls = static_cast<long long>(n_tilde);
        record.rsm_order = local.chosen_order;
        record.rsm_eps_loo_rel = local.diagnostics.eps_loo_rel;

        if (b_next <= 0.0) {
            LevelIndicators final_level;
            final_level.chains = pop.chains;
            final_level.chain_len = pop.chain_len;
            final_level.indicator.assign(n, 0);
            const std::size_t n_f =
                terminal_failure_count(pop, cand.indices, true_values, final_level);
            const double p_final = static_cast<double>(n_f) / static_cast<double>(n);
            final_level.p = p_final;
            result.cond_probs.push_back(p_final);
            record.cond_prob = p_final;
            result.level_records.push_back(record);
            level_indicators.push_back(std::move(final_level));
            result.levels = level + 1;
            result.n_f = n_f;
            break;
        }

        result.cond_probs.push_back(cfg.sus.p0);
        record.cond_prob = cfg.sus.p0;
        result.level_records.push_back(record);
        level_indicators.push_back(
            candidate_indicators(pop, cand.indices, true_values, b_next, cfg.sus.p0));

        // Seeds for the next level: best candidates by true value.
        seed_indices.resize(n_s);
        for (std::size_t c = 0; c < n_s; ++c) {
            seed_indices[c] = cand.indices[seeds_by_true.indices[c]];
        }
        current_b = b_next;
    }

    result.true_calls = true_calls.load();
    if (result.converged) {
        result.p_hat = std::pow(cfg.sus.p0, result.levels - 1) *
                       (static_cast<double>(result.n_f) / static_cast<double>(n));
        const auto [lo, hi] = cov_bounds(level_indicators, n);
        result.cov_lower = lo;
        result.cov_upper = hi;
    }
    return result;
}

}  // namespace raresim
