#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chronoreg/error.hpp"
#include "chronoreg/parallel.hpp"
#include "chronoreg/pde.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace chronoreg;

namespace {

constexpr double kPi = std::numbers::pi;

GridFunction heat_mode(const Grid& g) {
    return GridFunction::sample(g, [](double t, std::span<const double> x, int) {
        return cplx(std::exp(-t) * std::sin(x[0]));
    });
}

double bump_profile(double x, double c, double r) {
    const double s = (x - c) / r;
    return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
}

double rate(double coarse, double fine) { return std::log2(coarse / fine); }

}  // namespace

TEST_CASE("presets satisfy growth and coercivity") {
    for (const auto& name : preset_names()) {
        for (int d : {1, 2}) {
            const auto s = make_preset(name, d, 2, 1e-3);
            CHECK(s.name == name);
            CHECK_NOTHROW(s.validate(2.0, 2.0 * kPi));
        }
    }
    CHECK_THROWS_AS(make_preset("porous-medium", 1), ConfigError);
    CHECK_THROWS_AS(make_preset("heat", 1, 1, 0.0), ConfigError);
}

TEST_CASE("growth violation is reported") {
    auto s = make_preset("p-laplace-3", 1);
    s.c1 = 0.5;
    try {
        s.validate(1.0, 1.0);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("growth of A_0") != std::string::npos);
    }
    auto c = make_preset("heat", 1);
    c.c3 = 2.0;
    CHECK_THROWS_WITH_AS(c.validate(1.0, 1.0), doctest::Contains("coercivity"), ConfigError);
}

TEST_CASE("c4 of the regularized p-Laplacian") {
    const Grid g(1, 16, 16, 1.0, 1.0);
    const double eps = 0.1;
    const auto s = make_preset("p-laplace-3", 1, 1, eps);
    // h1 = sqrt(2) eps^2 constant, h2 = h3 = 0; node-aligned I x Q of area 1/4
    const double h1 = std::sqrt(2.0) * eps * eps;
    const double expect = std::pow(h1, 1.5) * std::sqrt(0.25);
    CHECK(structure_c4(s, g, {0.25, 0.75}, {0.25, 0.75}, 2.0) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(structure_c4(make_preset("heat", 1), g, {0.25, 0.75}, {0.25, 0.75}, 2.0) == 0.0);
    CHECK_THROWS_AS(structure_c4(s, g, {0.25, 0.75}, {0.25, 0.75}, 1.0), ConfigError);
}

TEST_CASE("heat equation reproduces the decaying eigenmode") {
    const int nt = 16;
    const Grid g(1, nt, 128, nt / (nt - 1.0), 2.0 * kPi);
    SolveConfig cfg;
    cfg.grid = g;
    cfg.time_step = 1e-4;
    const auto res = solve(make_preset("heat", 1), heat_mode(g), cfg);
    CHECK(g.time_coord(nt - 1) == doctest::Approx(1.0));
    double err = 0.0;
    for (int it = 0; it < nt; ++it)
        for (std::size_t ix = 0; ix < g.spatial_points(); ++ix)
            err = std::max(err, std::abs(res.field.at(it, ix, 0) -
                                         std::exp(-g.time_coord(it)) * std::sin(g.space_coord(static_cast<int>(ix)))));
    CHECK(err < 1e-3);
    CHECK(res.step_size <= 1e-4);
    CHECK(res.max_picard_used == 1);
}

TEST_CASE("constant data is a steady state") {
    const Grid g(1, 8, 32, 1.0, 1.0);
    SolveConfig cfg;
    cfg.grid = g;
    cfg.time_step = 0.01;
    for (const auto& name : {"heat", "p-laplace-3", "p-laplace-1.5"}) {
        const auto res = solve(make_preset(name, 1), initial_condition(g, [](auto, int) { return 3.0; }), cfg);
        for (auto v : res.field.values()) CHECK(std::abs(v - 3.0) <= 1e-13);
    }
}

TEST_CASE("p = 3 flow conserves mass and dissipates energy") {
    const Grid g(1, 16, 64, 0.5, 1.0);
    SolveConfig cfg;
    cfg.grid = g;
    cfg.time_step = 2e-3;
    const auto u0 = initial_condition(g, [](std::span<const double> x, int) { return bump_profile(x[0], 0.4, 0.3); });
    const auto res = solve(make_preset("p-laplace-3", 1), u0, cfg);
    CHECK(res.max_mass_drift <= 1e-10);
    CHECK(res.max_energy_increase <= 1e-12);
    CHECK(res.max_picard_used > 1);
    // the profile spreads: the maximum decreases monotonically
    double prev = 1e300;
    for (int it = 0; it < g.n_t(); ++it) {
        double m = 0.0;
        for (std::size_t ix = 0; ix < g.spatial_points(); ++ix) m = std::max(m, res.field.at(it, ix, 0).real());
        CHECK(m <= prev + 1e-14);
        prev = m;
    }
}

TEST_CASE("explicit and semi-implicit schemes agree for small steps") {
    const Grid g(1, 8, 32, 0.4, 2.0 * kPi);
    SolveConfig cfg;
    cfg.grid = g;
    cfg.time_step = 1e-3;
    const auto s = make_preset("heat", 1);
    const auto a = solve(s, heat_mode(g), cfg);
    cfg.scheme = Scheme::explicit_euler;
    const auto b = solve(s, heat_mode(g), cfg);
    double diff = 0.0;
    for (std::size_t j = 0; j < a.field.values().size(); ++j)
        diff = std::max(diff, std::abs(a.field.values()[j] - b.field.values()[j]));
    CHECK(diff < 1e-3);
    cfg.time_step = 0.05;
    CHECK_THROWS_WITH_AS(solve(s, heat_mode(g), cfg), doctest::Contains("CFL"), ConfigError);
}

TEST_CASE("invalid input and non-convergence") {
    const Grid g(1, 8, 32, 1.0, 1.0);
    SolveConfig cfg;
    cfg.grid = g;
    cfg.time_step = 0.01;
    auto bad = initial_condition(g, [](auto, int) { return 1.0; });
    bad.at(0, 5, 0) = cplx(std::nan(""));
    CHECK_THROWS_WITH_AS(solve(make_preset("heat", 1), bad, cfg), doctest::Contains("spatial index 5"), ConfigError);
    auto cx = initial_condition(g, [](auto, int) { return 1.0; });
    cx.at(0, 2, 0) = cplx(1.0, 0.5);
    CHECK_THROWS_AS(solve(make_preset("heat", 1), cx, cfg), ConfigError);
    CHECK_THROWS_AS(solve(make_preset("heat", 2), cx, cfg), ConfigError);

    cfg.max_picard = 1;
    const auto u0 = initial_condition(g, [](std::span<const double> x, int) { return std::sin(2.0 * kPi * x[0]); });
    CHECK_THROWS_WITH_AS(solve(make_preset("p-laplace-3", 1), u0, cfg), doctest::Contains("at step 0"),
                         NumericalError);
}

TEST_CASE("solver output is deterministic across worker counts") {
    const Grid g(2, 4, 64, 0.1, 1.0);
    SolveConfig cfg;
    cfg.grid = g;
    cfg.time_step = 5e-3;
    const auto u0 = initial_condition(g, [](std::span<const double> x, int) {
        return bump_profile(x[0], 0.5, 0.3) * bump_profile(x[1], 0.45, 0.35);
    });
    const auto s = make_preset("p-laplace-3", 2);
    set_worker_count(1);
    const auto a = solve(s, u0, cfg);
    const auto b = solve(s, u0, cfg);
    set_worker_count(4);
    const auto c = solve(s, u0, cfg);
    set_worker_count(1);
    CHECK(a.field == b.field);
    CHECK(a.field == c.field);
}

TEST_CASE("weak residual of the exact eigenmode decays with the grid") {
    std::vector<double> r;
    for (int n : {32, 64, 128}) {
        const Grid g(1, n, n, 2.0, 2.0 * kPi);
        const auto tests = bump_test_functions(g, {0.25, 1.75}, {1.0, 5.0}, 8, 11);
        r.push_back(weak_residual(heat_mode(g), make_preset("heat", 1), tests));
    }
    CHECK(rate(r[0], r[1]) >= 1.0);
    CHECK(rate(r[1], r[2]) >= 1.0);

    // a perturbed field is detected
    const Grid g(1, 128, 128, 2.0, 2.0 * kPi);
    const auto tests = bump_test_functions(g, {0.25, 1.75}, {1.0, 5.0}, 8, 11);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    auto noisy = heat_mode(g);
    for (auto& v : noisy.values()) v += 0.05 * normal(rng);
    CHECK(weak_residual(noisy, make_preset("heat", 1), tests) > 10.0 * r[2]);
}

TEST_CASE("weak residual of the computed solution decays at first order or better") {
    std::vector<double> r;
    for (int n : {32, 64, 128}) {
        const Grid g(1, n, n, 2.0, 2.0 * kPi);
        SolveConfig cfg;
        cfg.grid = g;
        cfg.time_step = 0.1 * g.dx() * g.dx();
        const auto u0 = initial_condition(g, [](std::span<const double> x, int) {
            return std::sin(x[0]) + 0.5 * std::cos(3.0 * x[0]);
        });
        const auto sol = solve(make_preset("heat", 1), u0, cfg);
        r.push_back(weak_residual(sol.field, make_preset("heat", 1), bump_test_functions(g, {0.25, 1.75}, {1.0, 5.0}, 8, 5)));
    }
    CHECK(rate(r[0], r[1]) >= 1.0);
    CHECK(rate(r[1], r[2]) >= 1.0);
}

TEST_CASE("Caccioppoli ratio of the eigenmode against its closed form") {
    const Grid g(1, 128, 128, 4.0, 2.0 * kPi);
    const double h = g.dx();
    NestedDomains nd;
    nd.I = {0.5, 3.5};
    nd.I_prime = {1.0, 3.0};
    nd.I_dprime = {1.5, 2.5};
    nd.Q = {0.0, 2.0 * kPi};
    nd.Q_prime = {16 * h, 48 * h};
    nd.Q_dprime = {24 * h, 40 * h};
    const auto r = caccioppoli_ratio(heat_mode(g), 2.0, nd);
    REQUIRE(r.has_value());
    const double num = std::exp(-1.0) * std::sqrt(kPi / 4.0 + 0.5);
    const double l2 = std::sqrt(kPi * (std::exp(-1.0) - std::exp(-7.0)) / 2.0);
    CHECK(*r == doctest::Approx(num / (3.0 * l2)).epsilon(1e-3));
    CHECK_FALSE(caccioppoli_ratio(GridFunction(g), 2.0, nd).has_value());
}

TEST_CASE("Caccioppoli check is stable along a solution ladder") {
    std::vector<GridFunction> ladder;
    const auto s = make_preset("p-laplace-3", 1);
    for (int n : {32, 64, 128}) {
        const Grid g(1, n, n, 1.0, 1.0);
        SolveConfig cfg;
        cfg.grid = g;
        cfg.time_step = g.dt() / 2.0;
        const auto u0 = initial_condition(g, [](std::span<const double> x, int) { return std::sin(2.0 * kPi * x[0]); });
        ladder.push_back(solve(s, u0, cfg).field);
    }
    const auto nd = default_domains(ladder.back().grid());
    const auto rep = caccioppoli_check(ladder, ExponentSet(1, 3.0, 0.5), nd);
    CHECK(rep.verdict == Verdict::pass);
    CHECK(rep.ratios.size() == 3);

    std::vector<GridFunction> zeros;
    for (int n : {32, 64, 128}) zeros.emplace_back(Grid(1, n, n, 1.0, 1.0));
    CHECK(caccioppoli_check(zeros, ExponentSet(1, 3.0, 0.5), nd).verdict == Verdict::skipped);
}

TEST_CASE("higher-integrability scan locates a planted singularity") {
    // |grad u| = |x - x0|^{-1/(p + delta0)} lies in L^{p + delta} exactly for delta < delta0
    const double p = 2.0, delta0 = 0.5, x0 = 1.0 / 3.0;
    const double e = 1.0 - 1.0 / (p + delta0);
    std::vector<GridFunction> ladder;
    for (int n : {128, 1024, 8192}) {
        const Grid g(1, 4, n, 1.0, 1.0);
        ladder.push_back(initial_condition(g, [&](std::span<const double> x, int) {
            const double s = x[0] - x0;
            return (s < 0.0 ? -1.0 : 1.0) * std::pow(std::abs(s), e) / e;
        }));
    }
    const auto nd = default_domains(ladder.front().grid());
    const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5};
    const auto scan = higher_integrability_scan(ladder, p, nd, grid);
    CHECK(scan.measured_delta == doctest::Approx(0.75));
    CHECK(scan.qualifies[0]);
    CHECK_FALSE(scan.qualifies.back());
    const auto j = to_json(scan);
    CHECK(j["rows"].size() == grid.size());

    std::vector<GridFunction> smooth;
    for (int n : {128, 1024, 8192}) {
        const Grid g(1, 4, n, 1.0, 1.0);
        smooth.push_back(initial_condition(g, [](std::span<const double> x, int) { return std::sin(2.0 * kPi * x[0]); }));
    }
    CHECK(higher_integrability_scan(smooth, p, nd, grid).measured_delta == 1.5);
    CHECK_THROWS_AS(higher_integrability_scan({smooth[0], smooth[1]}, p, nd, grid), ConfigError);
}

TEST_CASE("test functions supported where u vanishes see no residual") {
    const Grid g(1, 32, 64, 1.0, 2.0 * kPi);
    const auto u = GridFunction::sample(g, [](double t, std::span<const double> x, int) {
        return cplx(std::exp(-t) * bump_profile(x[0], 1.5, 1.0));
    });
    const auto tests = bump_test_functions(g, {0.2, 0.8}, {3.5, 6.0}, 6, 11);
    for (const auto& name : {"heat", "p-laplace-3"}) {
        CHECK(weak_residual(u, make_preset(name, 1), tests) == 0.0);
    }
}

TEST_CASE("Caccioppoli ratio is invariant under scaling of u") {
    const Grid g(1, 64, 64, 4.0, 2.0 * kPi);
    const auto nd = default_domains(g);
    const auto u = GridFunction::sample(g, [](double t, std::span<const double> x, int) {
        return cplx(std::exp(-t) * (std::sin(x[0]) + 0.2 * std::cos(3.0 * x[0])));
    });
    auto scaled = u;
    for (auto& z : scaled.values()) z *= 3.7;
    for (double p : {2.0, 3.0}) {
        const auto a = caccioppoli_ratio(u, p, nd);
        const auto b = caccioppoli_ratio(scaled, p, nd);
        REQUIRE(a.has_value());
        REQUIRE(b.has_value());
        CHECK(*b == doctest::Approx(*a).epsilon(1e-12));
    }
}
