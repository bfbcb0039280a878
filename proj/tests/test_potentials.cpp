#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chronoreg/error.hpp"
#include "chronoreg/potentials.hpp"
#include "chronoreg/spectral.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace chronoreg;

namespace {

GridFunction random_smooth(const Grid& g, std::mt19937_64& rng) {
    // random trigonometric polynomial of low degree
    std::normal_distribution<double> normal;
    GridFunction F(g);
    for (int it = 0; it < g.n_t(); ++it)
        for (std::size_t ix = 0; ix < g.spatial_points(); ++ix)
            F.at(it, ix, 0) = cplx(normal(rng), normal(rng)) *
                              std::exp(-0.05 * (std::pow(Grid::signed_index(it, g.n_t()), 2) +
                                                std::pow(Grid::signed_index(static_cast<int>(ix % g.n_x()), g.n_x()), 2)));
    return inverse_transform(F);
}

double rel_l2(const GridFunction& a, const GridFunction& b) {
    return lq_norm(a - b, 2.0) / lq_norm(b, 2.0);
}

}  // namespace

TEST_CASE("kernel quadrature matches closed-form Bessel kernel values") {
    struct Row {
        double s, r;
        int d;
        double value;
    };
    const Row rows[] = {
        {0.5, 0.3, 1, 0.36207832006928578838},  {1.0, 1.7, 1, 0.052679114164558992339},
        {2.0, 0.7, 2, 0.10512500071585467356},  {0.5, 2.5, 2, 0.0025479541909810779636},
        {3.0, 1e-4, 2, 0.15913902839333433653}, {1.5, 4.0, 3, 0.00025896073778817497407},
        {3.0, 0.0, 2, 0.15915494309189533577},
    };
    for (const auto& r : rows) {
        CAPTURE(r.s);
        CAPTURE(r.r);
        CHECK(kernel_quadrature(r.s, r.r, r.d) == doctest::Approx(r.value).epsilon(1e-8));
    }
    // s = 2, d = 1: exp(-|x|)/2
    for (double x : {0.01, 0.5, 3.0, 10.0})
        CHECK(kernel_quadrature(2.0, x, 1) == doctest::Approx(0.5 * std::exp(-x)).epsilon(1e-8));
}

TEST_CASE("kernel has unit mass and known Lq norm") {
    CHECK(kernel_lq_norm(0.5, 1, 1.0) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(kernel_lq_norm(2.0, 2, 1.0) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(kernel_lq_norm(0.5, 1, 1.9) == doctest::Approx(2.5944583585471526558).epsilon(1e-7));
    CHECK_THROWS_AS(kernel_lq_norm(0.5, 1, 2.0), ConfigError);
}

TEST_CASE("kernel quadrature rejects invalid arguments") {
    CHECK_THROWS_AS(kernel_quadrature(0.0, 1.0, 1), ConfigError);
    CHECK_THROWS_AS(kernel_quadrature(1.0, -1.0, 1), ConfigError);
    CHECK_THROWS_AS(kernel_quadrature(1.0, 1.0, 0), ConfigError);
    CHECK_THROWS_WITH_AS(kernel_quadrature(1.0, 0.0, 1), doctest::Contains("diverges"), ConfigError);
}

TEST_CASE("potential orders validate their inputs") {
    CHECK_THROWS_AS(PotentialOrder(NAN), ConfigError);
    CHECK_THROWS_AS(PotentialOrder(1.0, INFINITY), ConfigError);
    CHECK_THROWS_AS(MixedOrder(0.0), ConfigError);
    CHECK_THROWS_AS(MixedOrder(1.0), ConfigError);
    CHECK_NOTHROW(MixedOrder(0.5));
}

TEST_CASE("J^0 is the identity") {
    const Grid g(1, 8, 8, 1.0, 1.0);
    std::mt19937_64 rng(5);
    const auto f = random_smooth(g, rng);
    CHECK(bessel_x(f, 0.0) == f);
    CHECK(bessel_t(f, 0.0) == f);
}

TEST_CASE("group law and inverse on random probes") {
    const Grid g(1, 16, 32, 20.0, 20.0);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> order(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto f = random_smooth(g, rng);
        const cplx s(order(rng), order(rng));
        const cplx r(order(rng), order(rng));
        CHECK(rel_l2(bessel_x(bessel_x(f, s), r), bessel_x(f, s + r)) < 1e-12);
        CHECK(rel_l2(bessel_x(bessel_x(f, s), -s), f) < 1e-12);
        CHECK(rel_l2(bessel_t(bessel_x(f, s), r), bessel_xt(f, s, r)) < 1e-12);
    }
}

TEST_CASE("imaginary orders are unitary on L2") {
    const Grid g(2, 8, 16, 3.0, 5.0);
    std::mt19937_64 rng(9);
    const auto f = random_smooth(g, rng);
    for (double b : {0.5, 4.0, 16.0})
        CHECK(lq_norm(bessel_x(f, cplx(0.0, b)), 2.0) == doctest::Approx(lq_norm(f, 2.0)).epsilon(1e-12));
}

TEST_CASE("J^2 inverts 1 - Laplacian on a plane wave") {
    const Grid g(1, 4, 32, 1.0, 2.0 * std::numbers::pi);
    const auto f = GridFunction::sample(g, [](double, std::span<const double> x, int) {
        return cplx(std::cos(4.0 * x[0]));
    });
    const auto u = bessel_x(f, 2.0);
    for (std::size_t i = 0; i < u.values().size(); ++i)
        CHECK(std::abs(u.values()[i] - f.values()[i] / 17.0) < 1e-14);
}

TEST_CASE("mixed potential composes the two one-axis potentials") {
    const Grid g(1, 16, 16, 4.0, 4.0);
    std::mt19937_64 rng(3);
    const auto f = random_smooth(g, rng);
    const double theta = 0.3;
    CHECK(rel_l2(mixed_potential(f, MixedOrder(theta)), bessel_t(bessel_x(f, 2 * theta - 1), -theta)) < 1e-12);
}

TEST_CASE("complex order growth report") {
    const Grid g(1, 4, 32, 1.0, 8.0);
    std::mt19937_64 rng(21);
    std::vector<GridFunction> probes;
    for (int i = 0; i < 4; ++i) probes.push_back(random_smooth(g, rng));
    const auto rep = complex_order_bound_check({0.0, 1.0}, {0.0, 4.0}, probes, 4.0);
    REQUIRE(rep.rows.size() == 4);
    for (const auto& row : rep.rows) {
        CHECK(row.ratio <= rep.fitted_C * row.growth * (1.0 + 1e-12));
        CHECK(row.growth == doctest::Approx(std::pow(1.0 + row.a + std::abs(row.b), 3)));
    }
    // a = b = 0 is the identity
    CHECK(rep.rows[0].ratio == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(complex_order_bound_check({0.0}, {0.0}, {}, 2.0), ConfigError);
    CHECK_THROWS_AS(complex_order_bound_check({-1.0}, {0.0}, probes, 2.0), ConfigError);
    CHECK_THROWS_AS(complex_order_bound_check({0.0}, {0.0}, probes, 1.0), ConfigError);
}
