#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "raresim/rng.hpp"
#include "raresim/rsm.hpp"

using namespace raresim;

namespace {

Batch random_batch(std::size_t p, std::size_t n, RngStream& rng, double spread = 1.0) {
    Batch b = Batch::zeros(p, n);
    for (std::size_t r = 0; r < p; ++r) {
        for (std::size_t s = 0; s < n; ++s) b.dim[r][s] = spread * rng.normal();
    }
    return b;
}

double quadratic_truth(std::span<const double> t) {
    return 1.5 - 0.7 * t[0] + 0.4 * t[1] * t[2] + 0.9 * t[2] * t[2] - 0.3 * t[0] * t[1];
}

double cubic_truth(std::span<const double> t) {
    return quadratic_truth(t) + 0.25 * t[0] * t[0] * t[0] - 0.6 * t[0] * t[1] * t[2];
}

std::vector<double> responses_of(const Batch& samples, double (*f)(std::span<const double>)) {
    std::vector<double> y(samples.n);
    for (std::size_t i = 0; i < samples.n; ++i) y[i] = f(samples.point(i));
    return y;
}

}  // namespace

TEST_CASE("exact quadratic data fits with negligible errors") {
    RngStream rng(2);
    const Batch samples = random_batch(3, 30, rng);
    const auto y = responses_of(samples, quadratic_truth);
    const RsmFit fit = fit_rsm(samples, y, 2);
    CHECK(fit.diagnostics.eps_emp_rel < 1e-12);
    CHECK(fit.diagnostics.eps_loo_rel < 1e-10);
}

TEST_CASE("leverages sum to the basis count") {
    RngStream rng(3);
    const Batch samples = random_batch(3, 50, rng);
    const auto y = responses_of(samples, cubic_truth);
    const RsmFit fit = fit_rsm(samples, y, 3);
    double sum = 0.0;
    for (double s : fit.diagnostics.leverages) sum += s;
    CHECK(sum == doctest::Approx(static_cast<double>(basis_count(3, 3))).epsilon(1e-10));
}

TEST_CASE("hat-matrix LOO equals explicit leave-one-out refits") {
    RngStream rng(5);
    const std::size_t n_s = 40;
    const Batch samples = random_batch(3, n_s, rng);
    std::vector<double> y = responses_of(samples, quadratic_truth);
    // Perturbation keeps residuals well away from zero.
    for (auto& v : y) v += 0.05 * rng.normal();

    const int order = 2;
    const RsmFit fit = fit_rsm(samples, y, order);
    for (std::size_t i = 0; i < n_s; ++i) {
        const double hat_eps = (y[i] - fit.model.evaluate(samples.point(i))) /
                               (1.0 - fit.diagnostics.leverages[i]);

        Batch reduced = Batch::zeros(3, n_s - 1);
        std::vector<double> y_reduced;
        std::size_t w = 0;
        for (std::size_t k = 0; k < n_s; ++k) {
            if (k == i) continue;
            for (std::size_t r = 0; r < 3; ++r) reduced.dim[r][w] = samples.dim[r][k];
            y_reduced.push_back(y[k]);
            ++w;
        }
        const RsmFit refit = fit_rsm(reduced, y_reduced, order);
        const double explicit_eps = y[i] - refit.model.evaluate(samples.point(i));
        CHECK(hat_eps == doctest::Approx(explicit_eps).epsilon(1e-8));
    }
}

TEST_CASE("LOO error dominates the empirical error") {
    RngStream rng(7);
    for (int rep = 0; rep < 10; ++rep) {
        const Batch samples = random_batch(3, 60, rng);
        std::vector<double> y = responses_of(samples, cubic_truth);
        for (auto& v : y) v += 0.1 * rng.normal();
        const RsmFit fit = fit_rsm(samples, y, 2 + rep % 3);
        CHECK(fit.diagnostics.eps_loo >= fit.diagnostics.eps_emp);
    }
}

TEST_CASE("constant responses are rejected") {
    RngStream rng(11);
    const Batch samples = random_batch(3, 30, rng);
    const std::vector<double> y(30, 3.0);
    CHECK_THROWS_AS((void)fit_rsm(samples, y, 2), DegenerateDesignError);
}

TEST_CASE("adaptive fit finds the true cubic order") {
    RngStream rng(13);
    const Batch samples = random_batch(3, 220, rng);
    const auto y = responses_of(samples, cubic_truth);
    const AdaptiveRsmFit fit = fit_rsm_adaptive(samples, y, 2, 7);
    CHECK(fit.chosen_order == 3);
    // Paper-style configuration: every order in 2..7 is feasible at n_s=220.
    for (const auto& trial : fit.trials) CHECK(trial.feasible);
}

TEST_CASE("adaptive fit skips infeasible orders and never overruns n_s-1") {
    RngStream rng(17);
    const Batch samples = random_batch(3, 40, rng);  // P(4,3)=35 feasible, P(5,3)=56 not
    std::vector<double> y = responses_of(samples, cubic_truth);
    for (auto& v : y) v += 0.01 * rng.normal();
    const AdaptiveRsmFit fit = fit_rsm_adaptive(samples, y, 2, 7);
    CHECK(basis_count(3, fit.chosen_order) <= samples.n - 1);
    for (const auto& trial : fit.trials) {
        if (basis_count(3, trial.order) + 1 > samples.n) {
            CHECK(!trial.feasible);
            CHECK(trial.reason == "n_s < P+1");
        }
    }
    CHECK_THROWS_AS((void)fit_rsm_adaptive(samples, y, 7, 7), DegenerateDesignError);
}

TEST_CASE("empirical error shrinks with order while LOO turns up past the truth") {
    RngStream rng(19);
    const std::size_t n_s = 220;
    const Batch samples = random_batch(3, n_s, rng);
    // Degree-6 target with visible contributions at every order.
    std::vector<double> y(n_s);
    for (std::size_t i = 0; i < n_s; ++i) {
        const auto t = samples.point(i);
        const double d2 = t[0] * t[0] + t[1] * t[1] + t[2] * t[2];
        y[i] = cubic_truth(t) + 0.02 * d2 * d2 * t[0] * t[1];
    }
    double sd = 0.0;
    for (double v : y) sd += v * v;
    sd = std::sqrt(sd / static_cast<double>(n_s));
    for (auto& v : y) v += 0.01 * sd * rng.normal();

    const AdaptiveRsmFit fit = fit_rsm_adaptive(samples, y, 2, 7);
    CHECK(fit.chosen_order == 6);
    double prev_emp = 1e300;
    double loo6 = 0.0;
    bool order7_overfit_guarded = false;
    for (const auto& trial : fit.trials) {
        if (trial.order <= 6) REQUIRE(trial.feasible);
        if (!trial.feasible) {
            // A near-interpolatory order counts as caught overfitting.
            order7_overfit_guarded = (trial.order == 7);
            continue;
        }
        CHECK(trial.eps_emp_rel <= prev_emp * (1.0 + 1e-9));
        prev_emp = trial.eps_emp_rel;
        if (trial.order == 6) loo6 = trial.eps_loo_rel;
        if (trial.order == 7) order7_overfit_guarded = trial.eps_loo_rel > loo6;
    }
    CHECK(order7_overfit_guarded);
}

TEST_CASE("evaluate: zeros, training points, and an independent monomial oracle") {
    RngStream rng(23);
    const Batch samples = random_batch(3, 80, rng);
    const auto y = responses_of(samples, quadratic_truth);
    const RsmFit fit = fit_rsm(samples, y, 2);

    for (std::size_t i = 0; i < samples.n; i += 7) {
        CHECK(fit.model.evaluate(samples.point(i)) == doctest::Approx(y[i]).epsilon(1e-10));
    }

    // Naive power-product evaluation from the model's own map.
    RngStream fresh(29);
    const Batch pts = random_batch(3, 100, fresh);
    for (std::size_t i = 0; i < pts.n; ++i) {
        const auto t = pts.point(i);
        double naive = 0.0;
        for (std::size_t k = 0; k < fit.model.indices().size(); ++k) {
            double term = fit.model.coefficients()[k];
            for (std::size_t r = 0; r < 3; ++r) {
                const double z = (t[r] - fit.model.center()[r]) / fit.model.scale()[r];
                term *= std::pow(z, fit.model.indices()[k][r]);
            }
            naive += term;
        }
        CHECK(fit.model.evaluate(t) == doctest::Approx(naive).epsilon(1e-12));
    }

    const RsmModel zero(2, total_degree_indices(3, 2),
                        std::vector<double>(basis_count(3, 2), 0.0), {0.0, 0.0, 0.0},
                        {1.0, 1.0, 1.0});
    CHECK(zero.evaluate(std::vector<double>{1.0, 2.0, 3.0}) == 0.0);

    const auto batch_values = fit.model.evaluate_batch(pts);
    for (std::size_t i = 0; i < pts.n; i += 13) {
        CHECK(batch_values[i] == doctest::Approx(fit.model.evaluate(pts.point(i))).epsilon(1e-12));
    }
}
