#include "chronoreg/error.hpp"
#include "chronoreg/pde.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace chronoreg {

namespace {

double bump1(double s) { return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0; }

}  // namespace

std::vector<GridFunction> bump_test_functions(const Grid& g, const Interval& I, const Interval& Q, int count,
                                              std::uint64_t seed) {
    if (count < 1) throw ConfigError("bump_test_functions: count must be positive");
    if (!(I.length() > 0.0 && Q.length() > 0.0)) throw ConfigError("bump_test_functions: empty region");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<GridFunction> out;
    out.reserve(count);
    for (int n = 0; n < count; ++n) {
        const double rt = (0.25 + 0.2 * unit(rng)) * I.length();
        const double ct = I.lo + rt + unit(rng) * (I.length() - 2.0 * rt);
        std::vector<double> rx(g.d()), cx(g.d());
        for (int k = 0; k < g.d(); ++k) {
            rx[k] = (0.25 + 0.2 * unit(rng)) * Q.length();
            cx[k] = Q.lo + rx[k] + unit(rng) * (Q.length() - 2.0 * rx[k]);
        }
        const int comp = n % g.N();
        out.push_back(GridFunction::sample(g, [&](double t, std::span<const double> x, int c) {
            if (c != comp) return cplx(0.0);
            double v = bump1((t - ct) / rt);
            for (int k = 0; k < g.d() && v != 0.0; ++k) v *= bump1((x[k] - cx[k]) / rx[k]);
            return cplx(v);
        }));
    }
    return out;
}

double weak_residual(const GridFunction& u, const StructureSpec& spec, const std::vector<GridFunction>& tests) {
    const Grid& g = u.grid();
    if (spec.d != g.d() || spec.N != g.N()) throw ConfigError("weak_residual: structure d/N do not match the grid");
    if (tests.empty()) throw ConfigError("weak_residual: empty test set");
    const int d = g.d(), N = g.N();
    const std::size_t P = g.spatial_points(), dn = static_cast<std::size_t>(d) * N;
    const double h = g.dx(), dt = g.dt();

    // flux (A + F) and source (B + f) at every space-time node
    std::vector<double> flux(g.nodes() * dn), src(g.nodes() * N);
    std::vector<double> x(d), V(dn), F(dn), f(N);
    for (int it = 0; it < g.n_t(); ++it) {
        const double t = g.time_coord(it);
        for (std::size_t ix = 0; ix < P; ++ix) {
            g.spatial_coords(ix, x);
            for (int k = 0; k < d; ++k) {
                const std::size_t jx = g.spatial_neighbor(ix, k, 1);
                for (int i = 0; i < N; ++i)
                    V[static_cast<std::size_t>(i) * d + k] = (u.at(it, jx, i).real() - u.at(it, ix, i).real()) / h;
            }
            const std::size_t node = static_cast<std::size_t>(it) * P + ix;
            std::span<double> A(flux.data() + node * dn, dn);
            std::span<double> B(src.data() + node * N, N);
            spec.A(t, x, V, A);
            std::fill(B.begin(), B.end(), 0.0);
            if (spec.B) spec.B(t, x, V, B);
            if (spec.forcing) {
                std::fill(F.begin(), F.end(), 0.0);
                std::fill(f.begin(), f.end(), 0.0);
                if (spec.forcing->F) spec.forcing->F(t, x, {}, F);
                if (spec.forcing->f) spec.forcing->f(t, x, {}, f);
                for (std::size_t j = 0; j < dn; ++j) A[j] += F[j];
                for (int i = 0; i < N; ++i) B[i] += f[i];
            }
        }
    }

    double worst = 0.0;
    for (const auto& phi : tests) {
        if (!(phi.grid() == g)) throw ConfigError("weak_residual: test function on a different grid");
        double sum = 0.0, np = 0.0, ngp = 0.0;
        for (int it = 0; it < g.n_t(); ++it) {
            const int ip = (it + 1) % g.n_t(), im = (it + g.n_t() - 1) % g.n_t();
            for (std::size_t ix = 0; ix < P; ++ix) {
                const std::size_t node = static_cast<std::size_t>(it) * P + ix;
                double phi2 = 0.0, grad2 = 0.0;
                for (int i = 0; i < N; ++i) {
                    const double ph = phi.at(it, ix, i).real();
                    const double dphi = (phi.at(ip, ix, i).real() - phi.at(im, ix, i).real()) / (2.0 * dt);
                    double term = -u.at(it, ix, i).real() * dphi - src[node * N + i] * ph;
                    for (int k = 0; k < d; ++k) {
                        const std::size_t jx = g.spatial_neighbor(ix, k, 1);
                        const double gk = (phi.at(it, jx, i).real() - ph) / h;
                        term += flux[node * dn + static_cast<std::size_t>(i) * d + k] * gk;
                        grad2 += gk * gk;
                    }
                    sum += term;
                    phi2 += ph * ph;
                }
                np += std::pow(phi2, 0.5 * spec.p);
                ngp += std::pow(grad2, 0.5 * spec.p);
            }
        }
        const double vol = g.cell_volume();
        const double norm = std::pow(np * vol, 1.0 / spec.p) + std::pow(ngp * vol, 1.0 / spec.p);
        if (norm == 0.0) continue;
        worst = std::max(worst, std::abs(sum * vol) / norm);
    }
    return worst;
}

std::optional<double> caccioppoli_ratio(const GridFunction& u, double p, const NestedDomains& nd) {
    const Grid& g = u.grid();
    if (!(p > 1.0)) throw ConfigError("caccioppoli: p must exceed 1");
    const auto wx = cell_weights(nd.Q_prime, g.n_x(), g.L_x());
    const double dvol = std::pow(g.dx(), g.d());
    std::vector<int> idx(g.d());
    double sup = 0.0;
    for (int it = 0; it < g.n_t(); ++it) {
        if (!nd.I_prime.contains(g.time_coord(it))) continue;
        double s = 0.0;
        for (std::size_t ix = 0; ix < g.spatial_points(); ++ix) {
            g.spatial_index(ix, idx);
            double w = 1.0;
            for (int k = 0; k < g.d(); ++k) w *= wx[idx[k]];
            if (w == 0.0) continue;
            for (int i = 0; i < g.N(); ++i) s += w * std::norm(u.at(it, ix, i));
        }
        sup = std::max(sup, std::sqrt(s * dvol));
    }
    const double den = restricted_lq_norm(u, 2.0, nd.I, nd.Q) + restricted_lq_norm(u, p, nd.I, nd.Q) +
                       restricted_lq_norm(gradient_magnitude(u), p, nd.I, nd.Q);
    if (den == 0.0) {
        if (sup == 0.0) return std::nullopt;
        throw NumericalError("caccioppoli: zero denominator with a nonzero numerator");
    }
    return sup / den;
}

CaccioppoliReport caccioppoli_check(const std::vector<GridFunction>& ladder, const ExponentSet& exps,
                                    const NestedDomains& nd) {
    if (ladder.empty()) throw ConfigError("caccioppoli_check: empty ladder");
    CaccioppoliReport rep;
    for (const auto& u : ladder) rep.ratios.push_back(caccioppoli_ratio(u, exps.p, nd));
    const bool any = std::any_of(rep.ratios.begin(), rep.ratios.end(), [](const auto& r) { return r.has_value(); });
    const bool all = std::all_of(rep.ratios.begin(), rep.ratios.end(), [](const auto& r) { return r.has_value(); });
    if (!any) return rep;
    if (!all) {
        rep.verdict = Verdict::fail;
        return rep;
    }
    double lo = *rep.ratios.front(), hi = lo;
    for (const auto& r : rep.ratios) {
        lo = std::min(lo, *r);
        hi = std::max(hi, *r);
    }
    rep.spread = lo > 0.0 ? hi / lo - 1.0 : 0.0;
    const double ref = *rep.ratios.back();
    bool ok = true;
    for (const auto& r : rep.ratios) ok = ok && std::abs(*r - ref) <= 0.2 * ref;
    rep.verdict = ok ? Verdict::pass : Verdict::fail;
    return rep;
}

IntegrabilityScan higher_integrability_scan(const std::vector<GridFunction>& ladder, double p,
                                            const NestedDomains& nd, const std::vector<double>& delta_grid) {
    if (ladder.size() < 3) throw ConfigError("higher_integrability_scan: need at least 3 ladder levels");
    if (delta_grid.empty()) throw ConfigError("higher_integrability_scan: empty delta grid");
    if (!(p > 1.0)) throw ConfigError("higher_integrability_scan: p must exceed 1");
    IntegrabilityScan s;
    s.delta_grid = delta_grid;
    std::sort(s.delta_grid.begin(), s.delta_grid.end());
    if (s.delta_grid.front() < 0.0) throw ConfigError("higher_integrability_scan: delta must be nonnegative");

    std::vector<GridFunction> grads;
    grads.reserve(ladder.size());
    for (const auto& u : ladder) grads.push_back(gradient_magnitude(u));

    bool prefix = true;
    for (double delta : s.delta_grid) {
        std::vector<double> row;
        for (const auto& gm : grads) row.push_back(restricted_lq_norm(gm, p + delta, nd.I_prime, nd.Q_prime));
        bool ok = true;
        for (std::size_t l = 1; l < row.size(); ++l) ok = ok && (row[l] < 1.15 * row[l - 1] || row[l] == 0.0);
        s.norms.push_back(row);
        s.qualifies.push_back(ok);
        prefix = prefix && ok;
        if (prefix) s.measured_delta = delta;
    }
    if (!s.qualifies.front()) {
        s.measured_delta = 0.0;
        warn("higher_integrability_scan: no delta in the grid qualifies");
    }
    return s;
}

nlohmann::json to_json(const IntegrabilityScan& s) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < s.delta_grid.size(); ++i)
        rows.push_back({{"delta", s.delta_grid[i]}, {"norms", s.norms[i]}, {"qualifies", static_cast<bool>(s.qualifies[i])}});
    return {{"rows", rows}, {"measured_delta", s.measured_delta}};
}

}  // namespace chronoreg
