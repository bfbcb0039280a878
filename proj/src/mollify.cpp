#include "chronoreg/mollify.hpp"

#include "chronoreg/error.hpp"
#include "chronoreg/parallel.hpp"
#include "chronoreg/potentials.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace chronoreg {

namespace {

bool strictly_inside(const Interval& inner, const Interval& outer) {
    return inner.lo > outer.lo && inner.hi < outer.hi && inner.hi > inner.lo;
}

nlohmann::json interval_json(const Interval& iv) { return nlohmann::json::array({iv.lo, iv.hi}); }

Interval interval_from(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2) throw ConfigError("interval must be a [lo, hi] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// C-infinity step: 0 for y <= 0, 1 for y >= 1.
double transition(double y) {
    if (y <= 0.0) return 0.0;
    if (y >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / y);
    const double b = std::exp(-1.0 / (1.0 - y));
    return a / (a + b);
}

double plateau(double v, const Interval& outer, const Interval& inner) {
    return transition((v - outer.lo) / (inner.lo - outer.lo)) *
           transition((outer.hi - v) / (outer.hi - inner.hi));
}

}  // namespace

double NestedDomains::time_margin() const {
    return std::min(I_dprime.lo - I_prime.lo, I_prime.hi - I_dprime.hi);
}

double NestedDomains::space_margin() const {
    return std::min(Q_dprime.lo - Q_prime.lo, Q_prime.hi - Q_dprime.hi);
}

void NestedDomains::validate(const Grid& g) const {
    if (!strictly_inside(I_dprime, I_prime) || !strictly_inside(I_prime, I))
        throw ConfigError("nested domains: need I'' strictly inside I' strictly inside I");
    if (!strictly_inside(Q_dprime, Q_prime) || !strictly_inside(Q_prime, Q))
        throw ConfigError("nested domains: need Q'' strictly inside Q' strictly inside Q");
    if (I.lo < 0.0 || I.hi > g.L_t() || Q.lo < 0.0 || Q.hi > g.L_x())
        throw ConfigError("nested domains: I x Q must lie inside the periodic box");
    const double pt = g.L_t() / 8.0;
    const double px = g.L_x() / 8.0;
    if (I_prime.lo < pt || I_prime.hi > g.L_t() - pt || Q_prime.lo < px || Q_prime.hi > g.L_x() - px) {
        std::ostringstream os;
        os << "nested domains: I' x Q' must keep the padding margin L/8 (" << pt << ", " << px
           << ") from the box edges";
        throw ConfigError(os.str());
    }
}

nlohmann::json to_json(const NestedDomains& nd) {
    return {{"I", interval_json(nd.I)},         {"I_prime", interval_json(nd.I_prime)},
            {"I_dprime", interval_json(nd.I_dprime)}, {"Q", interval_json(nd.Q)},
            {"Q_prime", interval_json(nd.Q_prime)},   {"Q_dprime", interval_json(nd.Q_dprime)}};
}

NestedDomains nested_domains_from_json(const nlohmann::json& j) {
    try {
        return {interval_from(j.at("I")),       interval_from(j.at("I_prime")),
                interval_from(j.at("I_dprime")), interval_from(j.at("Q")),
                interval_from(j.at("Q_prime")),  interval_from(j.at("Q_dprime"))};
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("nested domains: ") + e.what());
    }
}

NestedDomains default_domains(const Grid& g) {
    auto nest = [](double L) {
        return std::array<Interval, 3>{Interval{L / 16.0, 15.0 * L / 16.0}, Interval{L / 8.0, 7.0 * L / 8.0},
                                       Interval{L / 4.0, 3.0 * L / 4.0}};
    };
    const auto t = nest(g.L_t());
    const auto x = nest(g.L_x());
    return {t[0], t[1], t[2], x[0], x[1], x[2]};
}

double mollifier_profile(double z_sq) {
    if (z_sq >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - z_sq));
}

GridFunction mollify(const GridFunction& g, double eps) {
    const Grid& grid = g.grid();
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("mollify: eps must be > 0");
    const double pad = std::min(grid.L_t(), grid.L_x()) / 8.0;
    if (eps > pad) {
        std::ostringstream os;
        os << "mollify: eps = " << eps << " exceeds the padding margin " << pad
           << "; the support would leak across the periodic seam";
        throw ConfigError(os.str());
    }
    if (eps < 2.0 * std::max(grid.dt(), grid.dx())) {
        std::ostringstream os;
        os << "mollify: eps = " << eps << " is under-resolved (fewer than 2 grid spacings)";
        warn(os.str());
    }

    const int d = grid.d();
    const int rt = static_cast<int>(std::floor(eps / grid.dt()));
    const int rx = static_cast<int>(std::floor(eps / grid.dx()));
    const int wx = 2 * rx + 1;
    std::size_t n_offsets = 1;
    for (int k = 0; k < d; ++k) n_offsets *= static_cast<std::size_t>(wx);

    // Stencil: for each spatial offset, the list of (time shift, weight).
    struct Tap {
        int kt;
        double w;
    };
    std::vector<std::vector<Tap>> taps(n_offsets);
    std::vector<std::vector<int>> offsets(n_offsets, std::vector<int>(d));
    double total = 0.0;
    for (std::size_t o = 0; o < n_offsets; ++o) {
        std::size_t rem = o;
        double xs = 0.0;
        for (int k = d - 1; k >= 0; --k) {
            offsets[o][k] = static_cast<int>(rem % wx) - rx;
            rem /= wx;
            const double z = offsets[o][k] * grid.dx() / eps;
            xs += z * z;
        }
        for (int kt = -rt; kt <= rt; ++kt) {
            const double z = kt * grid.dt() / eps;
            const double w = mollifier_profile(xs + z * z);
            if (w > 0.0) {
                taps[o].push_back({kt, w});
                total += w;
            }
        }
    }
    if (total == 0.0) {
        taps[n_offsets / 2].push_back({0, 1.0});
        total = 1.0;
    }
    for (auto& list : taps)
        for (auto& tap : list) tap.w /= total;

    // Neighbour table per spatial offset.
    const std::size_t P = grid.spatial_points();
    std::vector<std::vector<std::size_t>> neighbor(n_offsets);
    for (std::size_t o = 0; o < n_offsets; ++o) {
        if (taps[o].empty()) continue;
        neighbor[o].resize(P);
        for (std::size_t ix = 0; ix < P; ++ix) {
            std::size_t j = ix;
            for (int k = 0; k < d; ++k) j = grid.spatial_neighbor(j, k, offsets[o][k]);
            neighbor[o][ix] = j;
        }
    }

    GridFunction out(grid);
    const auto in = g.values();
    auto res = out.values();
    const auto N = static_cast<std::size_t>(grid.N());
    const int nt = grid.n_t();
    parallel_for(static_cast<std::size_t>(nt), [&](std::size_t it) {
        cplx* dst = res.data() + it * P * N;
        for (std::size_t o = 0; o < n_offsets; ++o) {
            for (const auto& tap : taps[o]) {
                const int src_t = ((static_cast<int>(it) + tap.kt) % nt + nt) % nt;
                const cplx* src = in.data() + static_cast<std::size_t>(src_t) * P * N;
                for (std::size_t ix = 0; ix < P; ++ix) {
                    const cplx* s = src + neighbor[o][ix] * N;
                    for (std::size_t c = 0; c < N; ++c) dst[ix * N + c] += tap.w * s[c];
                }
            }
        }
    });
    return out;
}

Cutoff build_cutoff(const Grid& g, const NestedDomains& nd) {
    nd.validate(g);
    const Grid scalar(g.d(), g.n_t(), g.n_x(), g.L_t(), g.L_x(), 1);
    std::vector<double> ct(g.n_t());
    std::vector<double> cx(g.n_x());
    for (int it = 0; it < g.n_t(); ++it) ct[it] = plateau(g.time_coord(it), nd.I_prime, nd.I_dprime);
    for (int ix = 0; ix < g.n_x(); ++ix) cx[ix] = plateau(g.space_coord(ix), nd.Q_prime, nd.Q_dprime);
    GridFunction chi(scalar);
    std::vector<int> idx(g.d());
    for (int it = 0; it < g.n_t(); ++it) {
        for (std::size_t ix = 0; ix < scalar.spatial_points(); ++ix) {
            scalar.spatial_index(ix, idx);
            double v = ct[it];
            for (int k = 0; k < g.d(); ++k) v *= cx[idx[k]];
            chi.at(it, ix, 0) = v;
        }
    }
    return {std::move(chi), nd};
}

double cutoff_max_gradient(const Cutoff& c) {
    const Grid& g = c.chi.grid();
    double m = 0.0;
    for (int it = 0; it < g.n_t(); ++it) {
        const int next = (it + 1) % g.n_t();
        for (std::size_t ix = 0; ix < g.spatial_points(); ++ix) {
            const double v = c.chi.at(it, ix, 0).real();
            m = std::max(m, std::abs(c.chi.at(next, ix, 0).real() - v) / g.dt());
            for (int k = 0; k < g.d(); ++k) {
                const double w = c.chi.at(it, g.spatial_neighbor(ix, k, 1), 0).real();
                m = std::max(m, std::abs(w - v) / g.dx());
            }
        }
    }
    return m;
}

AprioriReport apriori_bounds_check(const GridFunction& u, const Cutoff& chi,
                                   const std::vector<double>& eps_list, const ExponentSet& exps) {
    if (eps_list.empty()) throw ConfigError("apriori_bounds_check: empty eps list");
    for (std::size_t i = 1; i < eps_list.size(); ++i)
        if (!(eps_list[i] < eps_list[i - 1])) throw ConfigError("apriori_bounds_check: eps list must be decreasing");
    if (u.grid().d() != exps.d) throw ConfigError("apriori_bounds_check: exponent set is for another dimension");
    const GridFunction v = multiply_scalar_field(u, chi.chi);
    AprioriReport report{{}, 0.0, 0.0, Verdict::skipped, exps};
    report.rows.resize(eps_list.size());
    parallel_for(eps_list.size(), [&](std::size_t i) {
        const GridFunction ve = mollify(v, eps_list[i]);
        const double a = lq_norm(bessel_x(ve, -1.0), exps.p + exps.delta);
        const double b = lq_norm(bessel_xt(ve, 1.0, -1.0), exps.p_prime);
        if (!std::isfinite(a) || !std::isfinite(b)) {
            std::ostringstream os;
            os << "apriori_bounds_check: norm is not finite at eps = " << eps_list[i];
            throw NumericalError(os.str());
        }
        report.rows[i] = {eps_list[i], a, b};
    });
    std::vector<double> a, b;
    for (const auto& r : report.rows) {
        a.push_back(r.potential_norm);
        b.push_back(r.mixed_norm);
    }
    report.potential_median = median(a);
    report.mixed_median = median(b);
    const std::size_t tail = std::min<std::size_t>(2, a.size());
    const double a_tail = *std::max_element(a.end() - tail, a.end());
    const double b_tail = *std::max_element(b.end() - tail, b.end());
    const bool ok = a_tail <= 1.1 * report.potential_median && b_tail <= 1.1 * report.mixed_median;
    report.verdict = ok ? Verdict::pass : Verdict::fail;
    return report;
}

nlohmann::json to_json(const AprioriReport& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"eps", row.eps}, {"potential_norm", row.potential_norm}, {"mixed_norm", row.mixed_norm}});
    return {{"rows", rows},
            {"potential_median", r.potential_median},
            {"mixed_median", r.mixed_median},
            {"verdict", to_string(r.verdict)},
            {"exponents", to_json(r.exponents)}};
}

AprioriReport apriori_report_from_json(const nlohmann::json& j) {
    try {
        AprioriReport r{{}, j.at("potential_median").get<double>(), j.at("mixed_median").get<double>(),
                        verdict_from_string(j.at("verdict").get<std::string>()),
                        exponent_set_from_json(j.at("exponents"))};
        for (const auto& row : j.at("rows"))
            r.rows.push_back({row.at("eps").get<double>(), row.at("potential_norm").get<double>(),
                              row.at("mixed_norm").get<double>()});
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("apriori report: ") + e.what());
    }
}

}  // namespace chronoreg
