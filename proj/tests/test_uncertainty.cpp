#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "raresim/stats.hpp"
#include "raresim/uncertainty.hpp"

using namespace raresim;

TEST_CASE("marginal construction rejects invalid parameters") {
    CHECK_THROWS(MarginalDistribution::gaussian(0.0, 0.0));
    CHECK_THROWS(MarginalDistribution::gaussian(0.0, -1.0));
    CHECK_THROWS(MarginalDistribution::uniform(2.0, 2.0));
    CHECK_THROWS(UncertainVector({}));
}

TEST_CASE("sampling hits the requested moments") {
    // Gaussian(1, 0.15)^3 at n = 1e5: per-component mean within 1 +/- 0.005,
    // std within 0.15 +/- 0.005.
    UncertainVector uv({MarginalDistribution::gaussian(1.0, 0.15),
                        MarginalDistribution::gaussian(1.0, 0.15),
                        MarginalDistribution::gaussian(1.0, 0.15)});
    RngStream rng(2024);
    const Batch batch = uv.sample(100000, rng);
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(mean_of(batch.dim[r]) == doctest::Approx(1.0).epsilon(0.005));
        CHECK(std::sqrt(variance_of(batch.dim[r])) == doctest::Approx(0.15).epsilon(0.04));
    }
}

TEST_CASE("sampling is deterministic given the stream seed") {
    UncertainVector uv({MarginalDistribution::uniform(0.0, 1.0)});
    RngStream a(7);
    RngStream b(7);
    const Batch ba = uv.sample(1, a);
    const Batch bb = uv.sample(1, b);
    CHECK(ba.dim[0][0] == bb.dim[0][0]);
}

TEST_CASE("standard normal symmetry") {
    UncertainVector uv({MarginalDistribution::gaussian(0.0, 1.0)});
    RngStream rng(5);
    const Batch batch = uv.sample(100000, rng);
    std::size_t below = 0;
    for (double v : batch.dim[0]) below += (v < 0.0) ? 1 : 0;
    CHECK(static_cast<double>(below) / 1e5 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("isoprobabilistic transform fixed points") {
    UncertainVector g({MarginalDistribution::gaussian(1.0, 0.15)});
    CHECK(g.to_standard(std::vector<double>{1.0})[0] == doctest::Approx(0.0));
    CHECK(g.to_standard(std::vector<double>{1.3})[0] == doctest::Approx(2.0));

    UncertainVector u({MarginalDistribution::uniform(2.0, 4.0)});
    CHECK(u.to_standard(std::vector<double>{4.0})[0] == doctest::Approx(1.0));
    CHECK(u.to_standard(std::vector<double>{2.0})[0] == doctest::Approx(-1.0));

    CHECK_THROWS(g.to_standard(std::vector<double>{1.0, 2.0}));
    CHECK_THROWS(g.from_standard(std::vector<double>{1.0, 2.0}));
}

TEST_CASE("identity maps") {
    UncertainVector g({MarginalDistribution::gaussian(0.0, 1.0)});
    CHECK(g.from_standard(std::vector<double>{0.37})[0] == doctest::Approx(0.37));
    UncertainVector u({MarginalDistribution::uniform(-1.0, 1.0)});
    CHECK(u.from_standard(std::vector<double>{0.37})[0] == doctest::Approx(0.37));
}

TEST_CASE("round trip to 1e-12 on random points") {
    UncertainVector uv({MarginalDistribution::gaussian(2.0, 0.5),
                        MarginalDistribution::uniform(-3.0, 7.0),
                        MarginalDistribution::gaussian(-1.0, 2.0)});
    RngStream rng(11);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const Batch one = uv.sample(1, rng);
        const std::vector<double> theta = one.point(0);
        const std::vector<double> back = uv.from_standard(uv.to_standard(theta));
        for (std::size_t r = 0; r < 3; ++r) {
            worst = std::max(worst, std::abs(back[r] - theta[r]) /
                                        std::max(1.0, std::abs(theta[r])));
        }
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("normal-space transform matches the native one for Gaussians and is invertible") {
    UncertainVector uv({MarginalDistribution::gaussian(1.0, 0.15),
                        MarginalDistribution::uniform(0.0, 2.0)});
    const std::vector<double> theta{1.2, 0.5};
    const auto xi = uv.to_normal_space(theta);
    CHECK(xi[0] == doctest::Approx((1.2 - 1.0) / 0.15));
    // Uniform quantile: P[theta <= 0.5] = 0.25 -> Phi^-1(0.25)
    CHECK(xi[1] == doctest::Approx(normal_quantile(0.25)).epsilon(1e-12));
    const auto back = uv.from_normal_space(xi);
    CHECK(back[0] == doctest::Approx(theta[0]).epsilon(1e-12));
    CHECK(back[1] == doctest::Approx(theta[1]).epsilon(1e-12));
    CHECK(!uv.all_gaussian());
}

TEST_CASE("normal quantile inverts the normal cdf") {
    for (double p : {1e-10, 1e-6, 0.01, 0.3, 0.5, 0.7, 0.99, 1.0 - 1e-9}) {
        CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
    }
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
}
