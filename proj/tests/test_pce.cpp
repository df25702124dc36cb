#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "raresim/pce.hpp"
#include "raresim/rng.hpp"

using namespace raresim;

namespace {

UncertainVector gaussian3() {
    return UncertainVector({MarginalDistribution::gaussian(0.0, 1.0),
                            MarginalDistribution::gaussian(0.0, 1.0),
                            MarginalDistribution::gaussian(0.0, 1.0)});
}

std::size_t find_index(const std::vector<MultiIndex>& indices, const MultiIndex& wanted) {
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] == wanted) return i;
    }
    REQUIRE(false);
    return 0;
}

}  // namespace

TEST_CASE("projection of xi1^2 lands on He_2 + He_0") {
    const UncertainVector uv = gaussian3();
    const auto fams = families_for(uv);
    const QuadratureRule rule = tensor_quadrature(fams, 6);
    const Evaluator h = [](std::span<const double> theta) { return theta[0] * theta[0]; };
    const PceFit fit = fit_projection(h, uv, 5, rule);
    CHECK(fit.true_calls == 216);

    const auto& indices = fit.model.indices();
    const auto& a = fit.model.coefficients();
    const std::size_t i0 = find_index(indices, MultiIndex{0, 0, 0});
    const std::size_t i2 = find_index(indices, MultiIndex{2, 0, 0});
    CHECK(a[i0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(a[i2] == doctest::Approx(1.0).epsilon(1e-10));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i != i0 && i != i2) CHECK(std::abs(a[i]) < 1e-10);
    }

    // Exact-degree coverage: the fitted model reproduces xi1^2.
    CHECK(fit.model.evaluate(std::vector<double>{2.0, 0.3, -1.0}) ==
          doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("projection reproduces unit coefficients for every basis function") {
    const UncertainVector uv = gaussian3();
    const auto fams = families_for(uv);
    const QuadratureRule rule = tensor_quadrature(fams, 6);
    const auto indices = total_degree_indices(3, 5);
    RngStream rng(17);
    // A handful of random k keeps the test fast; orthonormality is the same
    // argument for each.
    for (int rep = 0; rep < 8; ++rep) {
        const std::size_t k = static_cast<std::size_t>(rng.u01() * static_cast<double>(indices.size()));
        const MultiIndex target = indices[k];
        std::vector<PolyFamily> fams_copy = fams;
        const Evaluator h = [target, fams_copy](std::span<const double> theta) {
            return eval_multivariate(fams_copy, target, theta);
        };
        const PceFit fit = fit_projection(h, uv, 5, rule);
        for (std::size_t i = 0; i < fit.model.coefficients().size(); ++i) {
            const double expected = (i == k) ? 1.0 : 0.0;
            CHECK(std::abs(fit.model.coefficients()[i] - expected) < 1e-10);
        }
    }
}

TEST_CASE("projection requires enough quadrature") {
    const UncertainVector uv = gaussian3();
    const auto fams = families_for(uv);
    const QuadratureRule rule = tensor_quadrature(fams, 4);
    const Evaluator h = [](std::span<const double>) { return 1.0; };
    CHECK_THROWS(fit_projection(h, uv, 5, rule));
}

TEST_CASE("regression recovers a synthesized degree-2 expansion") {
    const UncertainVector uv = gaussian3();
    const auto indices = total_degree_indices(3, 2);
    RngStream rng(23);
    std::vector<double> truth(indices.size());
    for (auto& c : truth) c = rng.normal();
    const PceModel reference(uv, 2, indices, truth);

    const std::size_t n_s = 3 * indices.size();
    RngStream sampler(29);
    const Batch thetas = uv.sample(n_s, sampler);
    std::vector<double> y(n_s);
    for (std::size_t i = 0; i < n_s; ++i) y[i] = reference.evaluate(thetas.point(i));

    const PceFit fit = fit_regression(thetas, y, uv, 2);
    CHECK(fit.true_calls == static_cast<long long>(n_s));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        CHECK(fit.model.coefficients()[i] == doctest::Approx(truth[i]).epsilon(1e-8));
    }
}

TEST_CASE("regression on constant responses") {
    const UncertainVector uv = gaussian3();
    RngStream sampler(31);
    const Batch thetas = uv.sample(40, sampler);
    const std::vector<double> y(40, 4.25);
    const PceFit fit = fit_regression(thetas, y, uv, 2);
    CHECK(fit.model.coefficients()[0] == doctest::Approx(4.25).epsilon(1e-12));
    for (std::size_t i = 1; i < fit.model.coefficients().size(); ++i) {
        CHECK(std::abs(fit.model.coefficients()[i]) < 1e-12);
    }
}

TEST_CASE("regression represents noiseless cubic data exactly at n_s = 2P") {
    const UncertainVector uv = gaussian3();
    const auto indices = total_degree_indices(3, 3);
    RngStream rng(37);
    std::vector<double> truth(indices.size());
    for (auto& c : truth) c = rng.normal();
    const PceModel reference(uv, 3, indices, truth);

    const std::size_t n_s = 2 * indices.size();
    RngStream sampler(41);
    const Batch thetas = uv.sample(n_s, sampler);
    std::vector<double> y(n_s);
    for (std::size_t i = 0; i < n_s; ++i) y[i] = reference.evaluate(thetas.point(i));
    const PceFit fit = fit_regression(thetas, y, uv, 3);

    double rss = 0.0;
    double var = 0.0;
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n_s);
    for (std::size_t i = 0; i < n_s; ++i) {
        const double r = fit.model.evaluate(thetas.point(i)) - y[i];
        rss += r * r;
        var += (y[i] - mean) * (y[i] - mean);
    }
    CHECK(rss / static_cast<double>(n_s) < 1e-16 * (var / static_cast<double>(n_s - 1)));
}

TEST_CASE("regression rejects rank-deficient designs") {
    const UncertainVector uv = gaussian3();
    // All samples identical: the experimental matrix has one distinct row.
    Batch thetas = Batch::zeros(3, 12);
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t s = 0; s < 12; ++s) thetas.dim[r][s] = 0.7;
    }
    const std::vector<double> y(12, 1.0);
    CHECK_THROWS_AS((void)fit_regression(thetas, y, uv, 1), DegenerateDesignError);
}

TEST_CASE("evaluate: zero coefficients and batch/pointwise agreement") {
    const UncertainVector uv = gaussian3();
    const auto indices = total_degree_indices(3, 4);
    const PceModel zero(uv, 4, indices, std::vector<double>(indices.size(), 0.0));
    CHECK(zero.evaluate(std::vector<double>{1.0, 2.0, 3.0}) == 0.0);

    RngStream rng(43);
    std::vector<double> coeffs(indices.size());
    for (auto& c : coeffs) c = rng.normal();
    const PceModel model(uv, 4, indices, coeffs);
    RngStream sampler(47);
    const Batch thetas = uv.sample(500, sampler);
    const std::vector<double> batch = model.evaluate_batch(thetas);
    for (std::size_t i = 0; i < thetas.n; i += 61) {
        CHECK(batch[i] == doctest::Approx(model.evaluate(thetas.point(i))).epsilon(1e-11));
    }
}

TEST_CASE("fitted model agrees with a polynomial truth on fresh samples") {
    const UncertainVector uv = gaussian3();
    const auto fams = families_for(uv);
    const QuadratureRule rule = tensor_quadrature(fams, 6);
    const Evaluator h = [](std::span<const double> t) {
        return 0.3 + t[0] * t[1] - 0.2 * t[2] * t[2] * t[2] + 0.05 * t[0] * t[0] * t[1] * t[2];
    };
    const PceFit fit = fit_projection(h, uv, 5, rule);
    RngStream sampler(53);
    const Batch fresh = uv.sample(1000, sampler);
    double worst = 0.0;
    const std::vector<double> values = fit.model.evaluate_batch(fresh);
    for (std::size_t i = 0; i < fresh.n; ++i) {
        worst = std::max(worst, std::abs(values[i] - h(fresh.point(i))));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("projection and regression agree on the quadrature-node design") {
    const UncertainVector uv = gaussian3();
    const auto fams = families_for(uv);
    const QuadratureRule rule = tensor_quadrature(fams, 6);
    const Evaluator h = [](std::span<const double> t) {
        return 1.0 + t[0] - 2.0 * t[1] * t[2] + 0.5 * t[0] * t[0] * t[1];
    };
    const PceFit proj = fit_projection(h, uv, 5, rule);

    Batch design = Batch::zeros(3, rule.weights.size());
    std::vector<double> y(rule.weights.size());
    for (std::size_t j = 0; j < rule.weights.size(); ++j) {
        const auto theta = uv.from_standard(rule.nodes.point(j));
        for (std::size_t r = 0; r < 3; ++r) design.dim[r][j] = theta[r];
        y[j] = h(theta);
    }
    const PceFit regr = fit_regression(design, y, uv, 5);
    for (std::size_t i = 0; i < proj.model.coefficients().size(); ++i) {
        CHECK(proj.model.coefficients()[i] ==
              doctest::Approx(regr.model.coefficients()[i]).epsilon(1e-8));
    }
}

TEST_CASE("projection residual is orthogonal to every retained basis") {
    const UncertainVector uv = gaussian3();
    const auto fams = families_for(uv);
    const QuadratureRule rule = tensor_quadrature(fams, 6);
    // Includes terms beyond the truncation so the residual is nonzero.
    const Evaluator h = [](std::span<const double> t) {
        return std::exp(0.3 * t[0]) + 0.1 * t[1] * t[2];
    };
    const PceFit fit = fit_projection(h, uv, 5, rule);
    const auto indices = fit.model.indices();
    for (std::size_t i = 0; i < indices.size(); ++i) {
        double inner = 0.0;
        for (std::size_t j = 0; j < rule.weights.size(); ++j) {
            const auto node = rule.nodes.point(j);
            const auto theta = uv.from_standard(node);
            const double resid = h(theta) - fit.model.evaluate_xi(node);
            inner += rule.weights[j] * resid * eval_multivariate(fams, indices[i], node);
        }
        CHECK(std::abs(inner) < 1e-9);
    }
}

TEST_CASE("serialization round trip") {
    const UncertainVector uv({MarginalDistribution::gaussian(1.0, 0.15),
                              MarginalDistribution::uniform(-1.0, 3.0)});
    const auto indices = total_degree_indices(2, 3);
    RngStream rng(59);
    std::vector<double> coeffs(indices.size());
    for (auto& c : coeffs) c = rng.normal();
    const PceModel model(uv, 3, indices, coeffs);

    const nlohmann::json j = model.to_json();
    const PceModel restored = PceModel::from_json(j);
    RngStream sampler(61);
    const Batch pts = uv.sample(50, sampler);
    for (std::size_t i = 0; i < pts.n; ++i) {
        CHECK(restored.evaluate(pts.point(i)) == model.evaluate(pts.point(i)));
    }
}

TEST_CASE("mixed-family basis evaluates per-dimension polynomials") {
    const UncertainVector uv({MarginalDistribution::gaussian(0.0, 1.0),
                              MarginalDistribution::uniform(-1.0, 1.0)});
    const auto fams = families_for(uv);
    CHECK(fams[0] == PolyFamily::HermiteProb);
    CHECK(fams[1] == PolyFamily::Legendre);
    const QuadratureRule rule = tensor_quadrature(fams, 5);
    // P_2(xi2) in the uniform dimension.
    const Evaluator h = [](std::span<const double> t) {
        return 0.5 * (3.0 * t[1] * t[1] - 1.0);
    };
    const PceFit fit = fit_projection(h, uv, 4, rule);
    const std::size_t k = [&] {
        const auto& idx = fit.model.indices();
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] == MultiIndex{0, 2}) return i;
        }
        return std::size_t{9999};
    }();
    REQUIRE(k != 9999);
    for (std::size_t i = 0; i < fit.model.coefficients().size(); ++i) {
        const double expected = (i == k) ? 1.0 : 0.0;
        CHECK(std::abs(fit.model.coefficients()[i] - expected) < 1e-10);
    }
}
