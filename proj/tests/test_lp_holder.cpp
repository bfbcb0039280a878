#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chronoreg/error.hpp"
#include "chronoreg/lp_holder.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

using namespace chronoreg;

namespace {

std::vector<cplx> sample_line(int n, double L, const std::function<double(double)>& f) {
    std::vector<cplx> v(n);
    for (int i = 0; i < n; ++i) v[i] = f(i * L / n);
    return v;
}

double max_abs(std::span<const cplx> v) {
    double m = 0.0;
    for (auto z : v) m = std::max(m, std::abs(z));
    return m;
}

}  // namespace

TEST_CASE("partition of unity on the resolvable band") {
    const auto dp = build_partition(128, 8.0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(std::log(dp.band_lo()), std::log(dp.band_hi()));
    for (int i = 0; i < 1000; ++i) {
        const double tau = std::exp(u(rng)) * (i % 2 ? 1.0 : -1.0);
        double sum = 0.0;
        int nonzero = 0;
        for (int j = dp.j_min - 3; j <= dp.j_max + 3; ++j) {
            const double v = dp.psi_j(j, tau);
            if (j >= dp.j_min && j <= dp.j_max) sum += v;
            nonzero += v != 0.0;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-10);
        CHECK(nonzero <= 3);
    }
    // every nonzero grid frequency lies in the band
    CHECK(dp.band_lo() <= 2.0 * std::numbers::pi / 8.0);
    CHECK(dp.band_hi() >= std::numbers::pi * 128 / 8.0);
    for (double tau : {0.0, 0.5, 1.0, 4.0, 4.5, 10.0}) {
        const double v = dp.psi(tau);
        if (tau <= 1.0 || tau >= 4.0) CHECK(v == 0.0);
    }
}

TEST_CASE("blocks outside the range are empty on band-limited data") {
    const int n = 64;
    const double L = 5.0;
    const auto dp = build_partition(n, L);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> normal;
    std::vector<cplx> f(n);
    for (auto& z : f) z = normal(rng);
    for (int j : {dp.j_min - 2, dp.j_min - 1, dp.j_max + 1, dp.j_max + 2}) {
        const auto b = lp_block(f, j, dp);
        double energy = 0.0;
        for (auto z : b) energy += std::norm(z);
        CHECK(energy <= 1e-12);
    }
}

TEST_CASE("single frequency sits in the two blocks covering it") {
    const int n = 128;
    const double L = 2.0 * std::numbers::pi;
    const auto dp = build_partition(n, L);
    const int k = 11;  // tau = 11 in [8, 16)
    const auto f = sample_line(n, L, [&](double t) { return std::sin(k * t); });
    std::vector<cplx> sum(n, 0.0);
    for (int j = dp.j_min; j <= dp.j_max; ++j) {
        const auto b = lp_block(f, j, dp);
        if (j == 2 || j == 3) {
            for (int i = 0; i < n; ++i) sum[i] += b[i];
        } else {
            CHECK(max_abs(b) <= 1e-10);
        }
    }
    for (int i = 0; i < n; ++i) CHECK(std::abs(sum[i] - f[i]) <= 1e-10);
}

TEST_CASE("constants have no block content and blocks plus remainder rebuild f") {
    const int n = 64;
    const double L = 3.0;
    const auto dp = build_partition(n, L);
    const std::vector<cplx> c(n, cplx(2.5, -1.0));
    for (int j = dp.j_min; j <= dp.j_max; ++j) CHECK(max_abs(lp_block(c, j, dp)) <= 1e-12);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    std::vector<cplx> f(n);
    for (auto& z : f) z = {normal(rng), normal(rng)};
    auto rebuilt = lp_remainder(f, dp);
    for (int j = dp.j_min; j <= dp.j_max; ++j) {
        const auto b = lp_block(f, j, dp);
        for (int i = 0; i < n; ++i) rebuilt[i] += b[i];
    }
    for (int i = 0; i < n; ++i) CHECK(std::abs(rebuilt[i] - f[i]) <= 1e-10);
}

TEST_CASE("field-level block matches the per-line block") {
    const Grid g(1, 32, 8, 4.0, 1.0, 2);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal;
    std::vector<cplx> v(g.size());
    for (auto& z : v) z = {normal(rng), normal(rng)};
    const GridFunction f(g, v);
    const auto dp = build_partition(g);
    const auto B = lp_block(f, dp.j_min + 2, dp);
    const auto line = lp_block(f.time_line(3, 1), dp.j_min + 2, dp);
    const auto fline = B.time_line(3, 1);
    for (int i = 0; i < 32; ++i) CHECK(std::abs(line[i] - fline[i]) <= 1e-13);
}

TEST_CASE("holder_direct oracle cases") {
    const int n = 100;
    const double dt = 0.01;
    std::vector<cplx> c(n, 3.0);
    CHECK(holder_direct(c, 0.5, dt) == 0.0);
    std::vector<cplx> ramp(n);
    for (int i = 0; i < n; ++i) ramp[i] = i * dt;
    const double span = (n - 1) * dt;
    CHECK(holder_direct(ramp, 0.9, dt) == doctest::Approx(std::pow(span, 0.1)).epsilon(1e-14));
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    std::vector<cplx> f(n);
    for (auto& z : f) z = normal(rng);
    const double h = holder_direct(f, 0.3, dt);
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int trial = 0; trial < 50; ++trial) {
        const int a = pick(rng), b = pick(rng);
        if (a == b) continue;
        CHECK(h >= std::abs(f[a] - f[b]) / std::pow(std::abs(a - b) * dt, 0.3));
    }
    CHECK_THROWS_AS(holder_direct(f, 1.0, dt), ConfigError);
    CHECK_THROWS_AS(holder_direct(f, 0.0, dt), ConfigError);
}

TEST_CASE("holder_lp on constants and the square-root cusp") {
    const int n = 256;
    const double L = 8.0;
    const auto dp = build_partition(n, L);
    CHECK(holder_lp(std::vector<cplx>(n, 4.0), 0.25, dp) <= 1e-12);

    const auto cusp = sample_line(n, L, [](double t) {
        return std::exp(-std::pow((t - 4.0) / 1.5, 8)) * std::sqrt(std::abs(t - 4.1));
    });
    const auto est = holder_estimate(cusp, 0.5, dp);
    CHECK(est.direct_value <= 10.0 * est.lp_value);
    CHECK(est.lp_value <= 10.0 * est.direct_value);
    CHECK(est.pairs_examined == std::size_t(n) * (n - 1) / 2);
}

TEST_CASE("band-limited sine with integer wave number") {
    // tau = 2 pi k / L with L = 2 pi: tau = k exactly, so k = 8 = 2^3
    const int n = 128;
    const double L = 2.0 * std::numbers::pi;
    const auto dp = build_partition(n, L);
    const double A = 0.8;
    const auto f = sample_line(n, L, [&](double t) { return A * std::sin(8.0 * t); });
    for (double alpha : {0.1, 0.25, 0.5}) {
        const double ratio = holder_lp(f, alpha, dp) / (std::pow(2.0, 3 * alpha) * A);
        CHECK(ratio <= 3.0);
        CHECK(ratio >= 1.0 / 3.0);
    }
}

TEST_CASE("Hoelder estimators are homogeneous and shift invariant") {
    const int n = 128;
    const double L = 6.0;
    const auto dp = build_partition(n, L);
    std::mt19937_64 rng(6);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<cplx> f(n);
        for (auto& z : f) z = {normal(rng), normal(rng)};
        const double lambda = -2.0;  // power of two: scaling is exact in floating point
        std::vector<cplx> g(n), h(n);
        for (int i = 0; i < n; ++i) {
            g[i] = lambda * f[i];
            h[i] = f[i] + cplx(5.0, 1.0);
        }
        for (double alpha : {0.1, 0.25, 0.5}) {
            CHECK(holder_direct(g, alpha, dp.dt()) == 2.0 * holder_direct(f, alpha, dp.dt()));
            CHECK(holder_lp(g, alpha, dp) == doctest::Approx(2.0 * holder_lp(f, alpha, dp)).epsilon(1e-14));
            CHECK(std::abs(holder_lp(h, alpha, dp) - holder_lp(f, alpha, dp)) <= 1e-10);
        }
    }
}

TEST_CASE("Bernstein ratio: homogeneity, dilation invariance and skipping") {
    const int n = 128;
    const double L = 16.0;
    const auto dp = build_partition(n, L);
    const int j = 1;
    auto wave = [&](double amp, double len) {
        return sample_line(n, len, [&](double t) {
            return amp * std::cos(2.0 * std::numbers::pi * 10.0 * t / len);
        });
    };
    const auto r1 = bernstein_ratio(wave(1.0, L), j, 3.0, dp);
    const auto r2 = bernstein_ratio(wave(7.5, L), j, 3.0, dp);
    CHECK(!r1.skipped);
    CHECK(r2.ratio == doctest::Approx(r1.ratio).epsilon(1e-12));
    const auto dp_half = build_partition(n, L / 2.0);
    const auto r3 = bernstein_ratio(wave(1.0, L / 2.0), j + 1, 3.0, dp_half);
    CHECK(r3.ratio == doctest::Approx(r1.ratio).epsilon(0.05));
    CHECK(bernstein_ratio(std::vector<cplx>(n, 0.0), j, 3.0, dp).skipped);
}

TEST_CASE("Bernstein suite report") {
    const int n = 256;
    const double L = 16.0;
    const auto dp = build_partition(n, L);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> normal;
    std::vector<std::vector<cplx>> probes;
    for (int p = 0; p < 8; ++p) {
        std::vector<cplx> f(n);
        for (auto& z : f) z = normal(rng);
        probes.push_back(f);
    }
    std::vector<int> js;
    for (int j = dp.j_min + 1; j <= dp.j_max; ++j) js.push_back(j);
    const auto rep = bernstein_check(probes, js, 2.0, dp);
    CHECK(rep.verdict == Verdict::pass);
    CHECK(rep.max_ratio <= 2.0 * rep.fitted_c);
}

TEST_CASE("kernel sup bound dominates the sup norm") {
    const int n = 256;
    const double L = 40.0;
    const double dt = L / n;
    const auto zero = sup_bound_via_kernel(std::vector<cplx>(n, 0.0), 2.1, dt);
    CHECK(zero.bound == 0.0);
    CHECK(zero.holds);
    const auto gauss = sample_line(n, L, [](double t) { return std::exp(-0.5 * (t - 20.0) * (t - 20.0)); });
    const auto sb = sup_bound_via_kernel(gauss, 2.1, dt);
    CHECK(sb.holds);
    CHECK(sb.bound >= sb.sup);
    std::vector<cplx> twice(gauss);
    for (auto& z : twice) z *= 2.0;
    const auto sb2 = sup_bound_via_kernel(twice, 2.1, dt);
    CHECK(sb2.bound == doctest::Approx(2.0 * sb.bound).epsilon(1e-14));
    CHECK(sb2.sup == 2.0 * sb.sup);
    CHECK_THROWS_AS(sup_bound_via_kernel(gauss, 2.0, dt), ConfigError);
}

TEST_CASE("per-line CSV layout") {
    const auto path = std::filesystem::temp_directory_path() / "chronoreg_lines.csv";
    write_line_holder_csv({{0, 1.5, 2.5}, {3, 0.25, 0.125}}, path);
    std::ifstream in(path);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "x_index,lp_value,direct_value");
    CHECK(row == "0,1.5,2.5");
}
