#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "raresim/kernels.hpp"
#include "raresim/rng.hpp"

using namespace raresim;

namespace {

std::vector<double> random_vec(std::size_t n, RngStream& rng, double scale = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = scale * rng.normal();
    return v;
}

}  // namespace

TEST_CASE("scalar kernels compute the reference quantities") {
    const auto& ops = kernels::scalar_ops();
    const std::vector<double> x{1.0, 2.0, 3.0};
    const std::vector<double> y{4.0, -5.0, 6.0};
    CHECK(ops.dot(x.data(), y.data(), 3) == doctest::Approx(1 * 4 - 2 * 5 + 3 * 6));
    CHECK(ops.sum(x.data(), 3) == doctest::Approx(6.0));

    std::vector<double> acc{1.0, 1.0, 1.0};
    ops.axpy(2.0, x.data(), acc.data(), 3);
    CHECK(acc[0] == doctest::Approx(3.0));
    CHECK(acc[2] == doctest::Approx(7.0));

    std::vector<double> prod(3);
    ops.mul(x.data(), y.data(), prod.data(), 3);
    CHECK(prod[1] == doctest::Approx(-10.0));

    // out = a*x*cur - c*prev
    std::vector<double> out(3);
    ops.recurrence_step(2.0, 0.5, x.data(), y.data(), prod.data(), out.data(), 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(out[i] == doctest::Approx(2.0 * x[i] * y[i] - 0.5 * prod[i]));
    }

    CHECK(ops.count_leq(y.data(), 3, 4.0) == 2);
    CHECK(ops.count_leq(y.data(), 3, -100.0) == 0);
}

TEST_CASE("every available variant matches the scalar reference") {
    const auto variants = kernels::available_ops();
    REQUIRE(!variants.empty());
    CHECK(std::string(variants.front()->name) == "scalar");

    RngStream rng(12345);
    const auto& ref = kernels::scalar_ops();
    // Odd lengths exercise the SIMD tails.
    for (const std::size_t n : {1ul, 2ul, 3ul, 7ul, 64ul, 1001ul}) {
        const auto x = random_vec(n, rng, 2.0);
        const auto y = random_vec(n, rng, 3.0);
        const auto z = random_vec(n, rng);
        for (const auto* ops : variants) {
            INFO("variant ", ops->name, " n ", n);
            CHECK(ops->dot(x.data(), y.data(), n) ==
                  doctest::Approx(ref.dot(x.data(), y.data(), n)).epsilon(1e-12));
            CHECK(ops->sum(x.data(), n) == doctest::Approx(ref.sum(x.data(), n)).epsilon(1e-12));

            std::vector<double> acc_a = z;
            std::vector<double> acc_b = z;
            ops->axpy(1.7, x.data(), acc_a.data(), n);
            ref.axpy(1.7, x.data(), acc_b.data(), n);
            for (std::size_t i = 0; i < n; ++i)
                CHECK(acc_a[i] == doctest::Approx(acc_b[i]).epsilon(1e-13));

            std::vector<double> m_a(n);
            std::vector<double> m_b(n);
            ops->mul(x.data(), y.data(), m_a.data(), n);
            ref.mul(x.data(), y.data(), m_b.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(m_a[i] == m_b[i]);

            std::vector<double> r_a(n);
            std::vector<double> r_b(n);
            ops->recurrence_step(1.4, 0.9, x.data(), y.data(), z.data(), r_a.data(), n);
            ref.recurrence_step(1.4, 0.9, x.data(), y.data(), z.data(), r_b.data(), n);
            for (std::size_t i = 0; i < n; ++i)
                CHECK(r_a[i] == doctest::Approx(r_b[i]).epsilon(1e-13));

            CHECK(ops->count_leq(x.data(), n, 0.5) == ref.count_leq(x.data(), n, 0.5));
        }
    }
}

TEST_CASE("in-place mul is supported") {
    RngStream rng(99);
    for (const auto* ops : kernels::available_ops()) {
        auto x = random_vec(37, rng);
        const auto y = random_vec(37, rng);
        auto expected = x;
        for (std::size_t i = 0; i < x.size(); ++i) expected[i] *= y[i];
        ops->mul(x.data(), y.data(), x.data(), x.size());
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i] == expected[i]);
    }
}

TEST_CASE("active variant is one of the available ones") {
    const auto& active = kernels::active_ops();
    bool found = false;
    for (const auto* ops : kernels::available_ops()) found = found || (ops == &active);
    CHECK(found);
}
