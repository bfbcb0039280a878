#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chronoreg/error.hpp"
#include "chronoreg/interpolation.hpp"
#include "chronoreg/potentials.hpp"
#include "chronoreg/spectral.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace chronoreg;

namespace {

// Random trigonometric polynomial with modes in the central half-band.
GridFunction band_limited(const Grid& g, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    GridFunction F(g);
    std::vector<int> idx(g.d());
    for (int it = 0; it < g.n_t(); ++it) {
        if (std::abs(Grid::signed_index(it, g.n_t())) > g.n_t() / 4) continue;
        for (std::size_t ix = 0; ix < g.spatial_points(); ++ix) {
            g.spatial_index(ix, idx);
            bool inside = true;
            for (int k : idx) inside = inside && std::abs(Grid::signed_index(k, g.n_x())) <= g.n_x() / 4;
            if (!inside) continue;
            for (int c = 0; c < g.N(); ++c) F.at(it, ix, c) = cplx(normal(rng), normal(rng));
        }
    }
    return inverse_transform(F);
}

GridFunction gaussian(const Grid& g) {
    return GridFunction::sample(g, [&](double t, std::span<const double> x, int) {
        const double dt = t - 0.5 * g.L_t(), dx = x[0] - 0.5 * g.L_x();
        return cplx(std::exp(-(dt * dt + dx * dx) / 2.0));
    });
}

GridFunction bump(const Grid& g) {
    return GridFunction::sample(g, [&](double t, std::span<const double> x, int) {
        const double dt = (t - 0.45 * g.L_t()) / 2.0, dx = (x[0] - 0.55 * g.L_x()) / 2.0;
        const double r2 = dt * dt + dx * dx;
        return cplx(r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0);
    });
}

}  // namespace

TEST_CASE("q_theta harmonic-mean identity") {
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
        for (double delta : {0.05, 0.25, 0.5}) {
            const double pp = p / (p - 1.0);
            const double q = q_theta(0.5, p + delta, pp);
            CHECK(std::abs(2.0 / q - (1.0 / (p + delta) + 1.0 / pp)) <= 1e-14);
        }
    }
    CHECK_THROWS_AS(q_theta(0.0, 2.0, 3.0), ConfigError);
    CHECK_THROWS_AS(q_theta(0.5, 1.0, 3.0), ConfigError);
}

TEST_CASE("zero probe is skipped") {
    const Grid g(1, 16, 16, 8.0, 8.0);
    const auto row = verify_interpolation(GridFunction(g), 0.5, 2.5, 2.0);
    CHECK(row.skipped);
    CHECK(row.lhs == 0.0);
}

TEST_CASE("interpolation ratio is homogeneous of degree zero") {
    const Grid g(1, 16, 16, 8.0, 8.0);
    std::mt19937_64 rng(1);
    const auto f = band_limited(g, rng);
    GridFunction g4 = f;
    g4 *= -4.0;
    for (double theta : {0.3, 0.5, 0.7}) {
        const auto a = verify_interpolation(f, theta, 2.5, 1.8);
        const auto b = verify_interpolation(g4, theta, 2.5, 1.8);
        CHECK(b.ratio == doctest::Approx(a.ratio).epsilon(1e-14));
        CHECK(b.lhs == doctest::Approx(4.0 * a.lhs).epsilon(1e-14));
    }
}

TEST_CASE("suite constant dominates every ratio") {
    const Grid g(1, 16, 16, 8.0, 8.0);
    std::mt19937_64 rng(2);
    std::vector<GridFunction> probes;
    for (int i = 0; i < 6; ++i) probes.push_back(band_limited(g, rng));
    probes.push_back(GridFunction(g));
    const auto s = interpolation_suite(probes, {{0.5, 2.5, 2.0}, {0.25, 3.0, 1.5}, {0.75, 1.5, 4.0}});
    CHECK(s.verdict == Verdict::pass);
    int skipped = 0;
    for (const auto& r : s.rows) {
        if (r.skipped) {
            ++skipped;
            continue;
        }
        CHECK(r.ratio <= s.c_suite);
        CHECK(r.ratio > 0.0);
    }
    CHECK(skipped == 3);
}

TEST_CASE("synthetic constant H meets the three-lines bound with equality") {
    const auto ss = sample_strip([](cplx) { return cplx(1.0); }, 0.4, default_a_grid(0.4), default_b_grid(0.5));
    const auto rep = three_lines_check(ss);
    CHECK(rep.holds);
    CHECK(rep.H_theta == rep.bound);
}

TEST_CASE("synthetic H(z) = exp(z^2 - z) against its closed form") {
    for (double theta : {0.2, 0.5, 0.9}) {
        const auto a_grid = default_a_grid(theta);
        const auto ss = sample_strip([](cplx z) { return std::exp(z * z - z); }, theta, a_grid, default_b_grid());
        const auto rep = three_lines_check(ss);
        CHECK(rep.holds);
        CHECK(rep.log_convex);
        // |H(a + ib)| = exp(a^2 - a - b^2), so sup_b is exp(a^2 - a)
        for (std::size_t i = 0; i < a_grid.size(); ++i)
            CHECK(rep.M[i] == doctest::Approx(std::exp(a_grid[i] * a_grid[i] - a_grid[i])).epsilon(1e-14));
        CHECK(rep.H_theta == doctest::Approx(std::exp(theta * theta - theta)).epsilon(1e-14));
        CHECK(rep.bound == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("strip grids must contain 0, theta and 1") {
    CHECK_THROWS_AS(sample_strip([](cplx) { return cplx(1.0); }, 0.5, {0.0, 1.0}, default_b_grid(1.0)),
                    ConfigError);
    const auto b = default_b_grid();
    CHECK(b.front() == doctest::Approx(-6.0));
    CHECK(b.back() == doctest::Approx(6.0));
    CHECK(std::find(b.begin(), b.end(), 0.0) != b.end());
}

TEST_CASE("H at z = theta reproduces the duality pairing") {
    const Grid g(1, 32, 32, 10.0, 10.0);
    const double theta = 0.5, q0 = 2.5, q1 = 1.6;
    const double qc = q_theta(theta, q0, q1) / (q_theta(theta, q0, q1) - 1.0);
    const auto f = gaussian(g);
    const auto phi = normalize_in_lq(bump(g), qc);
    const auto ss = sample_H(f, phi, theta, q0, q1, {0.0, theta, 1.0}, {-0.5, 0.0, 0.5});
    const cplx direct = inner(phi, mixed_potential(f, MixedOrder(theta)));
    CHECK(std::abs(ss.H_values[1][1] - direct) <= 1e-10 * std::max(1.0, std::abs(direct)));
    CHECK_THROWS_AS(sample_H(f, bump(g), theta, q0, q1, {0.0, theta, 1.0}, {-0.5, 0.0, 0.5}), ConfigError);
}

TEST_CASE("real probe pair: Gaussian decay in b and three-lines bound") {
    const Grid g(1, 32, 32, 10.0, 10.0);
    const double theta = 0.5, q0 = 2.5, q1 = 1.6;
    const double qc = q_theta(theta, q0, q1) / (q_theta(theta, q0, q1) - 1.0);
    const auto f = gaussian(g);
    const auto phi = normalize_in_lq(bump(g), qc);
    const auto ss = sample_H(f, phi, theta, q0, q1, default_a_grid(theta), default_b_grid(0.1));
    const auto rep = three_lines_check(ss);
    CHECK(rep.holds);
    CHECK(rep.H_theta <= rep.bound + 1e-6);
    // monotone decay beyond |b| = 3 on every sampled line
    for (const auto& row : ss.H_values) {
        for (std::size_t k = 1; k < ss.b_grid.size(); ++k) {
            const double b0 = ss.b_grid[k - 1], b1 = ss.b_grid[k];
            if (b0 >= 3.0) CHECK(std::abs(row[k]) <= std::abs(row[k - 1]));
            if (b1 <= -3.0) CHECK(std::abs(row[k]) >= std::abs(row[k - 1]));
        }
    }
    // boundary lines are controlled by the endpoint norms
    const double n0 = lq_norm(bessel_x(f, -1.0), q0);
    const double n1 = lq_norm(bessel_xt(f, 1.0, -1.0), q1);
    CHECK(rep.M.front() <= 10.0 * n0);
    CHECK(rep.M.back() <= 10.0 * n1);
}
