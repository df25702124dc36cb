#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "raresim/analytic.hpp"
#include "raresim/stats.hpp"
#include "raresim/sus.hpp"

using namespace raresim;

TEST_CASE("config validation") {
    SusConfig cfg;
    cfg.samples_per_level = 2000;
    cfg.p0 = 0.1;
    CHECK(cfg.validate().empty());
    CHECK(cfg.seeds_per_level() == 200);
    CHECK(cfg.chain_length() == 10);

    cfg.p0 = 0.07;  // 140 seeds but 2000 % 140 != 0
    CHECK_THROWS_AS((void)cfg.validate(), ConfigError);
    cfg.p0 = 0.05;
    cfg.samples_per_level = 2000;  // valid but outside the recommended band
    CHECK(cfg.validate().size() == 1);
}

TEST_CASE("select_seeds: order statistics and tie-breaks") {
    // Distinct values 1..10 shuffled: threshold is the 3rd smallest.
    std::vector<double> values{7, 3, 9, 1, 5, 10, 2, 8, 6, 4};
    const SeedSelection sel = select_seeds(values, 3);
    CHECK(sel.threshold == 3.0);
    CHECK(sel.indices == std::vector<std::size_t>{3, 6, 1});

    // All equal: first N_s by index.
    const std::vector<double> equal(10, 2.5);
    const SeedSelection tie = select_seeds(equal, 4);
    CHECK(tie.threshold == 2.5);
    CHECK(tie.indices == std::vector<std::size_t>{0, 1, 2, 3});

    // Random values against a full-sort oracle.
    RngStream rng(3);
    std::vector<double> random_values(300);
    for (auto& v : random_values) v = rng.normal();
    const SeedSelection rsel = select_seeds(random_values, 30);
    std::vector<std::size_t> oracle(random_values.size());
    std::iota(oracle.begin(), oracle.end(), std::size_t{0});
    std::stable_sort(oracle.begin(), oracle.end(), [&](std::size_t a, std::size_t b) {
        return random_values[a] < random_values[b];
    });
    oracle.resize(30);
    CHECK(rsel.indices == oracle);
}

TEST_CASE("non-rare events reduce to crude MCS") {
    AnalyticLimitState ls;
    ls.beta = -1.0;  // p_f = Phi(1) ~ 0.84
    SusConfig cfg;
    cfg.samples_per_level = 1000;
    const EstimationResult r = run_sus(ls.evaluator(), ls.inputs(), cfg, 77);
    CHECK(r.levels == 1);
    CHECK(r.true_calls == 1000);
    CHECK(r.p_hat == doctest::Approx(normal_cdf(1.0)).epsilon(0.05));
    CHECK(r.p_hat == static_cast<double>(r.n_f) / 1000.0);
    CHECK(r.cov_lower == doctest::Approx(r.cov_upper));
    CHECK(r.converged);
}

TEST_CASE("call-count identity and threshold monotonicity") {
    AnalyticLimitState ls;
    ls.beta = 3.0;
    SusConfig cfg;
    cfg.samples_per_level = 500;
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
        const EstimationResult r = run_sus(ls.evaluator(), ls.inputs(), cfg, seed);
        REQUIRE(r.converged);
        const long long n = static_cast<long long>(cfg.samples_per_level);
        const long long expected =
            n + static_cast<long long>(r.levels - 1) * (n - static_cast<long long>(cfg.seeds_per_level()));
        CHECK(r.true_calls == expected);
        for (std::size_t j = 1; j < r.thresholds.size(); ++j) {
            CHECK(r.thresholds[j] < r.thresholds[j - 1]);
        }
        CHECK(r.thresholds.back() <= 0.0);
        for (int j = 0; j + 1 < r.levels; ++j) {
            CHECK(r.cond_probs[static_cast<std::size_t>(j)] == cfg.p0);
        }
        CHECK(r.cond_probs.back() == static_cast<double>(r.n_f) / 500.0);
    }
}

TEST_CASE("same seed reproduces the run bit-identically") {
    AnalyticLimitState ls;
    ls.beta = 3.0;
    SusConfig cfg;
    cfg.samples_per_level = 500;
    const EstimationResult a = run_sus(ls.evaluator(), ls.inputs(), cfg, 42);
    const EstimationResult b = run_sus(ls.evaluator(), ls.inputs(), cfg, 42);
    CHECK(a.p_hat == b.p_hat);
    CHECK(a.thresholds == b.thresholds);
    CHECK(a.true_calls == b.true_calls);
    CHECK(a.cov_lower == b.cov_lower);
}

TEST_CASE("estimates are unbiased on the linear limit state") {
    AnalyticLimitState ls;
    ls.beta = 3.0;
    const double truth = ls.true_pf();
    SusConfig cfg;
    cfg.samples_per_level = 500;
    const int reps = 40;
    std::vector<double> estimates;
    for (int r = 0; r < reps; ++r) {
        const EstimationResult res = run_sus(ls.evaluator(), ls.inputs(), cfg, 9000 + static_cast<std::uint64_t>(r));
        REQUIRE(res.converged);
        estimates.push_back(res.p_hat);
    }
    const double mean = mean_of(estimates);
    const double se = std::sqrt(variance_of(estimates) / reps);
    CHECK(std::abs(mean - truth) <= std::max(3.0 * se, 0.2 * truth));
}

TEST_CASE("cov_bounds: single level equals the MCS c.o.v.") {
    LevelIndicators lev;
    lev.p = 0.02;
    lev.indicator.assign(1000, 0);
    const auto [lo, hi] = cov_bounds(std::vector<LevelIndicators>{lev}, 1000);
    const double expected = std::sqrt((1.0 - 0.02) / (0.02 * 1000.0));
    CHECK(lo == doctest::Approx(expected));
    CHECK(hi == doctest::Approx(expected));
}

TEST_CASE("cov_bounds: independent chain indicators give the gamma=0 value") {
    RngStream rng(5);
    const std::size_t chains = 100;
    const std::size_t len = 10;
    const double p = 0.1;
    std::vector<LevelIndicators> levels(2);
    for (auto& lev : levels) {
        lev.chains = chains;
        lev.chain_len = len;
        lev.indicator.resize(chains * len);
        std::size_t ones = 0;
        for (auto& b : lev.indicator) {
            b = rng.u01() < p ? 1 : 0;
            ones += b;
        }
        lev.p = static_cast<double>(ones) / static_cast<double>(chains * len);
    }
    const auto [lo, hi] = cov_bounds(levels, chains * len);
    double expected_sq = 0.0;
    for (const auto& lev : levels) {
        expected_sq += (1.0 - lev.p) / (lev.p * static_cast<double>(chains * len));
    }
    // gamma estimated from finite data wobbles around zero.
    CHECK(lo == doctest::Approx(std::sqrt(expected_sq)).epsilon(0.25));
    CHECK(hi >= lo);
}

TEST_CASE("empirical replicate c.o.v. sits inside the averaged bounds") {
    AnalyticLimitState ls;
    ls.beta = 3.0;
    SusConfig cfg;
    cfg.samples_per_level = 500;
    const int reps = 50;
    std::vector<double> estimates;
    std::vector<double> lowers;
    std::vector<double> uppers;
    for (int r = 0; r < reps; ++r) {
        const EstimationResult res =
            run_sus(ls.evaluator(), ls.inputs(), cfg, 20000 + static_cast<std::uint64_t>(r));
        REQUIRE(res.converged);
        estimates.push_back(res.p_hat);
        lowers.push_back(res.cov_lower);
        uppers.push_back(res.cov_upper);
    }
    const double emp_cov = std::sqrt(variance_of(estimates)) / mean_of(estimates);
    // Generous statistical band: the point is that the bounds bracket the
    // truth on average, not a tight calibration at 50 replicates.
    CHECK(emp_cov > 0.5 * mean_of(lowers));
    CHECK(emp_cov < 1.7 * mean_of(uppers));
}

TEST_CASE("max-levels exhaustion reports non-convergence with a partial result") {
    AnalyticLimitState ls;
    ls.beta = 6.0;
    SusConfig cfg;
    cfg.samples_per_level = 200;
    cfg.max_levels = 2;
    const EstimationResult r = run_sus(ls.evaluator(), ls.inputs(), cfg, 5);
    CHECK(!r.converged);
    CHECK(r.levels == 2);
    CHECK(!r.thresholds.empty());
    CHECK(r.true_calls > 0);
}
