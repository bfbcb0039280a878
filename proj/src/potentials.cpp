#include "chronoreg/potentials.hpp"

#include "chronoreg/error.hpp"
#include "chronoreg/parallel.hpp"
#include "chronoreg/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

namespace chronoreg {

PotentialOrder::PotentialOrder(cplx order) : s(order) {
    if (!std::isfinite(order.real()) || !std::isfinite(order.imag()))
        throw ConfigError("potential order must be finite");
}

MixedOrder::MixedOrder(double value) : theta(value) {
    if (!(value > 0.0 && value < 1.0)) throw ConfigError("mixed order theta must lie in (0, 1)");
}

namespace {

// (1 + sigma)^{-s/2} for sigma >= 0.
cplx bessel_symbol(double sigma, cplx s) {
    if (s == cplx(0.0)) return 1.0;
    return std::exp(-0.5 * s * std::log1p(sigma));
}

}  // namespace

void bessel_spectral(GridFunction& spectrum, cplx s_x, cplx s_t) {
    const Grid& g = spectrum.grid();
    const auto tau = time_frequencies(g);
    const auto xi2 = space_frequency_sq(g);
    std::vector<cplx> tf(tau.size());
    std::vector<cplx> sf(xi2.size());
    for (std::size_t k = 0; k < tau.size(); ++k) tf[k] = bessel_symbol(tau[k] * tau[k], s_t);
    for (std::size_t k = 0; k < xi2.size(); ++k) sf[k] = bessel_symbol(xi2[k], s_x);
    multiply_separable(spectrum, tf, sf);
}

GridFunction bessel_xt(const GridFunction& f, PotentialOrder s_x, PotentialOrder s_t) {
    if (s_x.s == cplx(0.0) && s_t.s == cplx(0.0)) return f;
    GridFunction spec = forward_transform(f);
    bessel_spectral(spec, s_x.s, s_t.s);
    return inverse_transform(spec);
}

GridFunction bessel_x(const GridFunction& f, PotentialOrder s) { return bessel_xt(f, s, 0.0); }

GridFunction bessel_t(const GridFunction& f, PotentialOrder s) { return bessel_xt(f, 0.0, s); }

GridFunction mixed_potential(const GridFunction& f, MixedOrder theta) {
    return bessel_xt(f, 2.0 * theta.theta - 1.0, -theta.theta);
}

ComplexOrderReport complex_order_bound_check(const std::vector<double>& a_values,
                                             const std::vector<double>& b_values,
                                             const std::vector<GridFunction>& probes, double q) {
    if (probes.empty()) throw ConfigError("complex_order_bound_check: empty probe set");
    if (!(q > 1.0) || std::isinf(q)) throw ConfigError("complex_order_bound_check: q must lie in (1, inf)");
    for (double a : a_values)
        if (!(a >= 0.0)) throw ConfigError("complex_order_bound_check: a values must be >= 0");
    const int d = probes.front().grid().d();
    std::vector<double> probe_norms;
    for (const auto& p : probes) {
        if (p.grid().d() != d) throw ConfigError("complex_order_bound_check: probes mix dimensions");
        const double n = lq_norm(p, q);
        if (!(n > 0.0)) throw ConfigError("complex_order_bound_check: probe with zero norm");
        probe_norms.push_back(n);
    }
    ComplexOrderReport report;
    report.q = q;
    report.d = d;
    report.rows.resize(a_values.size() * b_values.size());
    parallel_for(report.rows.size(), [&](std::size_t idx) {
        const double a = a_values[idx / b_values.size()];
        const double b = b_values[idx % b_values.size()];
        double worst = 0.0;
        for (std::size_t p = 0; p < probes.size(); ++p) {
            const GridFunction out = bessel_x(probes[p], cplx(2.0 * a, 2.0 * b));
            worst = std::max(worst, lq_norm(out, q) / probe_norms[p]);
        }
        report.rows[idx] = {a, b, worst, std::pow(1.0 + a + std::abs(b), d + 2)};
    });
    for (const auto& row : report.rows) {
        report.fitted_C = std::max(report.fitted_C, row.ratio / row.growth);
        report.worst_ratio = std::max(report.worst_ratio, row.ratio);
    }
    return report;
}

void write_complex_order_csv(const ComplexOrderReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << "a,b,q,ratio,bound\n" << std::setprecision(17);
    for (const auto& row : report.rows) {
        out << row.a << "," << row.b << "," << report.q << "," << row.ratio << ","
            << report.fitted_C * row.growth << "\n";
    }
}

}  // namespace chronoreg
