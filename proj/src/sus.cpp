#include "raresim/sus.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>

#include "raresim/mcmc.hpp"
#include "raresim/parallel.hpp"

namespace raresim {

std::vector<std::string> SusConfig::validate() const {
    if (samples_per_level < 10) throw ConfigError("sus: samples_per_level too small");
    if (!(p0 > 0.0 && p0 < 1.0)) throw ConfigError("sus: p0 must be in (0,1)");
    if (max_levels < 1) throw ConfigError("sus: max_levels must be >= 1");
    if (!(proposal_rho >= 0.0 && proposal_rho < 1.0))
        throw ConfigError("sus: proposal_rho must be in [0,1)");
    const double ns = p0 * static_cast<double>(samples_per_level);
    const double ns_round = std::llround(ns);
    if (std::abs(ns - ns_round) > 1e-9 || ns_round < 1)
        throw ConfigError("sus: p0*N must be a positive integer");
    if (samples_per_level % static_cast<std::size_t>(ns_round) != 0)
        throw ConfigError("sus: N must be divisible by p0*N (integer chain length)");
    std::vector<std::string> warnings;
    if (p0 < 0.1 || p0 > 0.3)
        warnings.push_back("sus: p0 outside the recommended [0.1, 0.3] band");
    return warnings;
}

std::size_t SusConfig::seeds_per_level() const {
    return static_cast<std::size_t>(std::llround(p0 * static_cast<double>(samples_per_level)));
}

std::size_t SusConfig::chain_length() const { return samples_per_level / seeds_per_level(); }

SeedSelection select_seeds(std::span<const double> values, std::size_t n_s) {
    if (n_s > values.size()) throw std::invalid_argument("select_seeds: n_s exceeds sample count");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), static_cast<std::size_t>(0));
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] < values[b];
        return a < b;
    });
    SeedSelection sel;
    sel.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_s));
    sel.threshold = values[sel.indices.back()];
    return sel;
}

namespace {

// Au-Beck chain-autocorrelation factor for one population.
double gamma_factor(const LevelIndicators& lev) {
    if (lev.chains == 0 || lev.chain_len < 2) return 0.0;
    const double p = lev.p;
    const double r0 = p * (1.0 - p);
    if (!(r0 > 0.0)) return 0.0;
    const std::size_t len = lev.chain_len;
    const std::size_t n = lev.chains * len;
    double gamma = 0.0;
    for (std::size_t lag = 1; lag < len; ++lag) {
        unsigned long long s = 0;
        for (std::size_t c = 0; c < lev.chains; ++c) {
            const std::uint8_t* chain = lev.indicator.data() + c * len;
            for (std::size_t k = 0; k + lag < len; ++k) {
                s += static_cast<unsigned long long>(chain[k] & chain[k + lag]);
            }
        }
        const double denom = static_cast<double>(n - lag * lev.chains);
        const double r = static_cast<double>(s) / denom - p * p;
        gamma += 2.0 * (1.0 - static_cast<double>(lag) / static_cast<double>(len)) * (r / r0);
    }
    return gamma;
}

}  // namespace

std::pair<double, double> cov_bounds(std::span<const LevelIndicators> levels,
                                     std::size_t samples_per_level) {
    double sum_sq = 0.0;
    double sum = 0.0;
    for (const auto& lev : levels) {
        if (!(lev.p > 0.0)) {
            const double inf = std::numeric_limits<double>::infinity();
            return {inf, inf};
        }
        const double gamma = std::max(gamma_factor(lev), 0.0);
        double delta_sq = (1.0 - lev.p) / (lev.p * static_cast<double>(samples_per_level));
        if (lev.chains != 0) delta_sq *= 1.0 + gamma;
        sum_sq += delta_sq;
        sum += std::sqrt(delta_sq);
    }
    return {std::sqrt(sum_sq), sum};
}

namespace {

struct Population {
    std::vector<std::vector<double>> xi;  // normal-space coordinates, chain-major
    std::vector<double> values;           // true-model values
    std::size_t chains = 0;               // 0 for the i.i.d. level
    std::size_t chain_len = 0;
};

LevelIndicators indicators_for(const Population& pop, double threshold, double p) {
    LevelIndicators lev;
    lev.chains = pop.chains;
    lev.chain_len = pop.chain_len;
    lev.p = p;
    lev.indicator.resize(pop.values.size());
    for (std::size_t i = 0; i < pop.values.size(); ++i) {
        lev.indicator[i] = pop.values[i] <= threshold ? 1 : 0;
    }
    return lev;
}

}  // namespace

EstimationResult run_sus(const Evaluator& h, const UncertainVector& uv, const SusConfig& cfg,
                         std::uint64_t seed) {
    cfg.validate();
    const std::size_t n = cfg.samples_per_level;
    const std::size_t n_s = cfg.seeds_per_level();
    const std::size_t chain_len = cfg.chain_length();
    const ConditionalKernel kernel(cfg.proposal_rho);

    EstimationResult result;
    result.method = "sus";
    std::atomic<long long> true_calls{0};

    // Level 0: i.i.d. sampling.
    Population pop;
    {
        RngStream stream(derive_seed(seed, 0));
        const Batch thetas = uv.sample(n, stream);
        pop.xi.resize(n);
        pop.values.resize(n);
        parallel_for(n, [&](std::size_t i) {
            const std::vector<double> theta = thetas.point(i);
            pop.xi[i] = uv.to_normal_space(theta);
            pop.values[i] = h(theta);
            true_calls.fetch_add(1, std::memory_order_relaxed);
        });
    }

    std::vector<LevelIndicators> level_indicators;
    for (int level = 0;; ++level) {
        const SeedSelection sel = select_seeds(pop.values, n_s);
        result.thresholds.push_back(sel.threshold);

        LevelSummary record;
        record.level = level;
        record.threshold = sel.threshold;
        record.threshold_tilde = std::numeric_limits<double>::quiet_NaN();
        record.true_calls = (level == 0) ? static_cast<long long>(n)
                                         : static_cast<long long>(n - n_s);

        if (sel.threshold <= 0.0) {
            // Final level: count failures among this population.
            std::size_t n_f = 0;
            for (double v : pop.values) n_f += (v <= 0.0) ? 1 : 0;
            const double p_final = static_cast<double>(n_f) / static_cast<double>(n);
            result.cond_probs.push_back(p_final);
            record.cond_prob = p_final;
            result.level_records.push_back(record);
            level_indicators.push_back(indicators_for(pop, 0.0, p_final));
            result.levels = level + 1;
            result.n_f = n_f;
            break;
        }
        if (level + 1 >= cfg.max_levels) {
            // Out of levels with b still positive: non-convergence, partial result.
            result.cond_probs.push_back(cfg.p0);
            record.cond_prob = cfg.p0;
            result.level_records.push_back(record);
            level_indicators.push_back(indicators_for(pop, sel.threshold, cfg.p0));
            result.levels = level + 1;
            result.n_f = 0;
            result.converged = false;
            break;
        }

        result.cond_probs.push_back(cfg.p0);
        record.cond_prob = cfg.p0;
        result.level_records.push_back(record);
        level_indicators.push_back(indicators_for(pop, sel.threshold, cfg.p0));

        // Next population from MCMC chains, one per seed, chain-major order.
        const double b = sel.threshold;
        Population next;
        next.chains = n_s;
        next.chain_len = chain_len;
        next.xi.resize(n);
        next.values.resize(n);
        const std::uint64_t level_seed = derive_seed(seed, 1000 + static_cast<std::uint64_t>(level));
        parallel_for(n_s, [&](std::size_t c) {
            RngStream stream(derive_seed(level_seed, c));
            std::vector<double> cand_values;
            cand_values.reserve(chain_len - 1);
            const ScreenFn screen = [&](std::span<const double> xi) {
                const double value = h(uv.from_normal_space(xi));
                true_calls.fetch_add(1, std::memory_order_relaxed);
                cand_values.push_back(value);
                return value <= b;
            };
            const std::size_t seed_idx = sel.indices[c];
            const Chain chain =
                advance_chain(kernel, pop.xi[seed_idx], chain_len, screen, stream);
            double current_value = pop.values[seed_idx];
            for (std::size_t k = 0; k < chain_len; ++k) {
                if (k > 0 && chain.accepted[k - 1]) current_value = cand_values[k - 1];
                next.xi[c * chain_len + k] = chain.states[k];
                next.values[c * chain_len + k] = current_value;
            }
        });
        pop = std::move(next);
    }

    result.true_calls = true_calls.load();
    const auto [lo, hi] = cov_bounds(level_indicators, n);
    result.cov_lower = lo;
    result.cov_upper = hi;
    result.p_hat = std::pow(cfg.p0, result.levels - 1) *
                   (static_cast<double>(result.n_f) / static_cast<double>(n));
    if (!result.converged) result.p_hat = 0.0;
    return result;
}

EstimationResult run_mcs(const Evaluator& h, const UncertainVector& uv, std::size_t n,
                         std::uint64_t seed) {
    if (n < 1) throw ConfigError("mcs: need n >= 1");
    RngStream stream(derive_seed(seed, 0));
    const Batch thetas = uv.sample(n, stream);
    std::vector<double> values(n);
    parallel_for(n, [&](std::size_t i) { values[i] = h(thetas.point(i)); });
    std::size_t n_f = 0;
    for (double v : values) n_f += (v <= 0.0) ? 1 : 0;

    EstimationResult result;
    result.method = "mcs";
    result.levels = 1;
    result.n_f = n_f;
    result.true_calls = static_cast<long long>(n);
    result.p_hat = static_cast<double>(n_f) / static_cast<double>(n);
    result.cond_probs.push_back(result.p_hat);
    if (n_f > 0) {
        const double cov = std::sqrt((1.0 - result.p_hat) / (result.p_hat * static_cast<double>(n)));
        result.cov_lower = cov;
        result.cov_upper = cov;
    } else {
        result.cov_lower = std::numeric_limits<double>::infinity();
        result.cov_upper = std::numeric_limits<double>::infinity();
    }
    return result;
}

}  // namespace raresim
