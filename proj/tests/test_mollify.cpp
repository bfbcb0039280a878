#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chronoreg/error.hpp"
#include "chronoreg/exponents.hpp"
#include "chronoreg/mollify.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace chronoreg;

namespace {

GridFunction random_field(const Grid& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<cplx> v(g.size());
    for (auto& z : v) z = {normal(rng), normal(rng)};
    return GridFunction(g, std::move(v));
}

struct QuietWarnings {
    QuietWarnings() { set_warning_handler([](const std::string&) {}); }
    ~QuietWarnings() { set_warning_handler(nullptr); }
};

}  // namespace

TEST_CASE("exponent set identities") {
    const ExponentSet e(1, 3.0, 0.5);
    CHECK(e.alpha == doctest::Approx(0.5 * (1.0 / 3.0 - 1.0 / 3.5)));
    CHECK(std::abs(1.0 / e.q - (0.5 + 0.5 * (1.0 / 3.5 - 1.0 / 3.0))) < 1e-14);
    CHECK(e.p_prime == doctest::Approx(1.5));
    CHECK_THROWS_WITH_AS(ExponentSet(1, 2.0, 0.0), doctest::Contains("degenerate exponent"), ConfigError);
    CHECK_THROWS_AS(ExponentSet(2, 1.0, 0.5), ConfigError);  // p <= 2d/(d+2)
    CHECK_NOTHROW(ExponentSet(2, 1.01, 0.5));
    CHECK(exponent_set_from_json(to_json(e)) == e);
}

TEST_CASE("mollifier preserves constants") {
    const Grid g(1, 32, 32, 1.0, 1.0, 2);
    const auto f = GridFunction::sample(g, [](double, std::span<const double>, int c) { return cplx(c + 1.5, -0.5); });
    const auto m = mollify(f, 0.1);
    for (std::size_t i = 0; i < f.values().size(); ++i) CHECK(std::abs(m.values()[i] - f.values()[i]) < 1e-14);
}

TEST_CASE("mollifier is self-adjoint for the bilinear pairing") {
    const Grid g(2, 16, 16, 1.0, 1.0);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto f = random_field(g, seed);
        const auto phi = random_field(g, seed + 100);
        const cplx a = pairing(mollify(f, 0.12), phi);
        const cplx b = pairing(f, mollify(phi, 0.12));
        CHECK(std::abs(a - b) < 1e-12 * (1.0 + std::abs(a)));
    }
}

TEST_CASE("mollifier commutes with whole-step translations exactly") {
    const Grid g(1, 16, 32, 1.0, 2.0);
    const auto f = random_field(g, 9);
    GridFunction shifted(g);
    for (int it = 0; it < 16; ++it)
        for (int ix = 0; ix < 32; ++ix) shifted.at((it + 3) % 16, (ix + 5) % 32, 0) = f.at(it, ix, 0);
    const auto mf = mollify(f, 0.11);
    const auto ms = mollify(shifted, 0.11);
    bool exact = true;
    for (int it = 0; it < 16; ++it)
        for (int ix = 0; ix < 32; ++ix) exact = exact && ms.at((it + 3) % 16, (ix + 5) % 32, 0) == mf.at(it, ix, 0);
    CHECK(exact);
}

TEST_CASE("mollifier contracts L1, L2 and Linf norms") {
    const Grid g(1, 32, 32, 1.0, 1.0, 2);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto f = random_field(g, seed);
        const auto m = mollify(f, 0.05 + 0.007 * seed);
        for (double q : {1.0, 2.0, HUGE_VAL}) CHECK(lq_norm(m, q) <= lq_norm(f, q) * (1.0 + 1e-14));
    }
}

TEST_CASE("mollified time step converges in L2 at order at least one half") {
    QuietWarnings quiet;
    const Grid g(1, 1024, 4, 1.0, 1.0);
    const auto step = GridFunction::sample(g, [](double t, std::span<const double>, int) {
        return cplx(t > 0.4 && t < 0.6 ? 1.0 : 0.0);
    });
    std::vector<double> eps{0.1, 0.05, 0.025, 0.0125};
    std::vector<double> err;
    for (double e : eps) err.push_back(lq_norm(mollify(step, e) - step, 2.0));
    const double order = std::log(err.front() / err.back()) / std::log(eps.front() / eps.back());
    CHECK(order >= 0.5);
}

TEST_CASE("mollify validates eps") {
    const Grid g(1, 16, 16, 1.0, 1.0);
    const auto f = random_field(g, 1);
    CHECK_THROWS_AS(mollify(f, 0.0), ConfigError);
    CHECK_THROWS_AS(mollify(f, 0.2), ConfigError);
    std::string message;
    set_warning_handler([&](const std::string& m) { message = m; });
    mollify(f, 0.1);
    set_warning_handler(nullptr);
    CHECK(message.find("under-resolved") != std::string::npos);
}

TEST_CASE("cutoff invariants") {
    const Grid g(2, 32, 32, 4.0, 2.0);
    const NestedDomains nd = default_domains(g);
    const auto c = build_cutoff(g, nd);
    std::vector<double> x(2);
    for (int it = 0; it < g.n_t(); ++it) {
        for (std::size_t ix = 0; ix < g.spatial_points(); ++ix) {
            g.spatial_coords(ix, x);
            const double t = g.time_coord(it);
            const double v = c.chi.at(it, ix, 0).real();
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            if (nd.I_dprime.contains(t) && nd.Q_dprime.contains(x[0]) && nd.Q_dprime.contains(x[1])) CHECK(v == 1.0);
            if (!nd.I_prime.contains(t) || !nd.Q_prime.contains(x[0]) || !nd.Q_prime.contains(x[1])) CHECK(v == 0.0);
        }
    }
}

TEST_CASE("cutoff gradient is at most 4 / margin over a sweep of margins") {
    const Grid g(1, 256, 256, 1.0, 1.0);
    for (double m : {0.02, 0.05, 0.1, 0.2}) {
        NestedDomains nd{{0.05, 0.95}, {0.25, 0.75}, {0.25 + m, 0.75 - m},
                         {0.05, 0.95}, {0.25, 0.75}, {0.25 + m, 0.75 - m}};
        const auto c = build_cutoff(g, nd);
        CHECK(cutoff_max_gradient(c) <= 4.0 / m);
    }
}

TEST_CASE("nested domains reject bad layouts") {
    const Grid g(1, 16, 16, 1.0, 1.0);
    NestedDomains nd = default_domains(g);
    CHECK_NOTHROW(nd.validate(g));
    NestedDomains zero = nd;
    zero.I_dprime.lo = zero.I_prime.lo;  // zero margin
    CHECK_THROWS_AS(build_cutoff(g, zero), ConfigError);
    NestedDomains leak = nd;
    leak.Q_prime.lo = 0.05;
    leak.Q.lo = 0.01;
    CHECK_THROWS_AS(leak.validate(g), ConfigError);
    CHECK(nested_domains_from_json(to_json(nd)) == nd);
}

TEST_CASE("support of the mollified localized field") {
    const Grid g(1, 64, 64, 1.0, 1.0);
    const auto nd = default_domains(g);
    const auto c = build_cutoff(g, nd);
    const auto u = random_field(g, 4);
    const double eps = 0.1;
    const auto v = mollify(multiply_scalar_field(u, c.chi), eps);
    double outside = 0.0;
    for (int it = 0; it < 64; ++it)
        for (int ix = 0; ix < 64; ++ix) {
            const double t = g.time_coord(it), x = g.space_coord(ix);
            const bool near = t > nd.I_prime.lo - eps && t < nd.I_prime.hi + eps && x > nd.Q_prime.lo - eps &&
                              x < nd.Q_prime.hi + eps;
            if (!near) outside = std::max(outside, std::abs(v.at(it, ix, 0)));
        }
    CHECK(outside <= 1e-12);
}

TEST_CASE("a-priori bounds on zero and on the heat solution") {
    const double L = 2.0 * std::numbers::pi;
    const Grid g(1, 128, 128, L, L);
    const auto c = build_cutoff(g, default_domains(g));
    const ExponentSet e(1, 2.0, 0.5);
    const std::vector<double> eps{0.25, 0.2, 0.15, 0.1};

    const auto zero = apriori_bounds_check(GridFunction(g), c, eps, e);
    for (const auto& r : zero.rows) {
        CHECK(r.potential_norm == 0.0);
        CHECK(r.mixed_norm == 0.0);
    }

    const auto u = GridFunction::sample(g, [](double t, std::span<const double> x, int) {
        return cplx(std::exp(-t) * std::sin(x[0]));
    });
    const auto rep = apriori_bounds_check(u, c, eps, e);
    CHECK(rep.verdict == Verdict::pass);
    double lo = INFINITY, hi = 0.0;
    for (const auto& r : rep.rows) {
        lo = std::min(lo, r.potential_norm);
        hi = std::max(hi, r.potential_norm);
    }
    CHECK(hi / lo < 1.1);
    CHECK(apriori_report_from_json(to_json(rep)) == rep);

    // a jump in t outside the cutoff support does not change anything
    GridFunction jumped = u;
    for (int ix = 0; ix < 128; ++ix) jumped.at(5, ix, 0) += 10.0;
    const auto rep2 = apriori_bounds_check(jumped, c, eps, e);
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        CHECK(std::abs(rep2.rows[i].potential_norm - rep.rows[i].potential_norm) <= 1e-10);
        CHECK(std::abs(rep2.rows[i].mixed_norm - rep.rows[i].mixed_norm) <= 1e-10);
    }
    CHECK_THROWS_AS(apriori_bounds_check(u, c, {0.2, 0.3}, e), ConfigError);
}
