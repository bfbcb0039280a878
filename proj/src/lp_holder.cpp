#include "chronoreg/lp_holder.hpp"

#include "chronoreg/error.hpp"
#include "chronoreg/parallel.hpp"
#include "chronoreg/potentials.hpp"
#include "chronoreg/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

namespace chronoreg {

namespace {

double step01(double y) {
    if (y <= 0.0) return 0.0;
    if (y >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / y);
    const double b = std::exp(-1.0 / (1.0 - y));
    return a / (a + b);
}

void require_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        std::ostringstream os;
        os << "Hoelder exponent alpha = " << alpha << " must lie in (0, 1)";
        throw ConfigError(os.str());
    }
}

std::vector<double> line_frequencies(int n, double L) {
    std::vector<double> tau(n);
    for (int k = 0; k < n; ++k) tau[k] = 2.0 * std::numbers::pi * Grid::signed_index(k, n) / L;
    return tau;
}

std::vector<cplx> apply_line_symbol(std::span<const cplx> spectrum, const std::vector<double>& factor) {
    std::vector<cplx> out(spectrum.begin(), spectrum.end());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] *= factor[k];
    return inverse_line(out);
}

double line_max(std::span<const cplx> v) {
    double m = 0.0;
    for (const auto& z : v) m = std::max(m, std::abs(z));
    return m;
}

double line_lq(std::span<const cplx> v, double q, double dt) {
    double s = 0.0;
    for (const auto& z : v) s += std::pow(std::abs(z), q);
    return std::pow(s * dt, 1.0 / q);
}

void check_line(std::span<const cplx> line, const DyadicPartition& dp) {
    if (static_cast<int>(line.size()) != dp.n_t)
        throw ConfigError("time line length does not match the dyadic partition");
}

}  // namespace

double dyadic_beta(double s) { return 1.0 - step01(std::abs(s) - 1.0); }

double DyadicPartition::psi(double tau) const {
    const double a = std::abs(tau);
    return dyadic_beta(0.5 * a) - dyadic_beta(a);
}

double DyadicPartition::psi_j(int j, double tau) const { return psi(std::ldexp(tau, -j)); }

double DyadicPartition::remainder(double tau) const { return dyadic_beta(std::ldexp(tau, -j_min)); }

double DyadicPartition::band_lo() const { return std::ldexp(1.0, j_min + 1); }
double DyadicPartition::band_hi() const { return std::ldexp(1.0, j_max + 1); }

DyadicPartition build_partition(int n_t, double L_t) {
    if (n_t < 4 || (n_t & (n_t - 1)) != 0) throw ConfigError("build_partition: n_t must be a power of two >= 4");
    if (!(L_t > 0.0)) throw ConfigError("build_partition: L_t must be > 0");
    const double lowest = 2.0 * std::numbers::pi / L_t;
    const double highest = std::numbers::pi * n_t / L_t;
    DyadicPartition dp;
    dp.n_t = n_t;
    dp.L_t = L_t;
    dp.j_min = static_cast<int>(std::floor(std::log2(lowest))) - 1;
    while (dp.band_lo() > lowest) --dp.j_min;
    dp.j_max = static_cast<int>(std::ceil(std::log2(highest))) - 1;
    while (dp.band_hi() < highest) ++dp.j_max;
    return dp;
}

DyadicPartition build_partition(const Grid& g) { return build_partition(g.n_t(), g.L_t()); }

std::vector<cplx> lp_block(std::span<const cplx> line, int j, const DyadicPartition& dp) {
    check_line(line, dp);
    const auto tau = line_frequencies(dp.n_t, dp.L_t);
    std::vector<double> factor(tau.size());
    for (std::size_t k = 0; k < tau.size(); ++k) factor[k] = dp.psi_j(j, tau[k]);
    return apply_line_symbol(forward_line(line), factor);
}

GridFunction lp_block(const GridFunction& f, int j, const DyadicPartition& dp) {
    if (f.grid().n_t() != dp.n_t || f.grid().L_t() != dp.L_t)
        throw ConfigError("lp_block: grid does not match the dyadic partition");
    SpectralMultiplier m;
    m.symbol = [&](std::span<const double> tau) { return cplx(dp.psi_j(j, tau[0])); };
    m.axes = AxisSet::time;
    m.dims = 1;
    return apply_multiplier(f, m);
}

std::vector<cplx> lp_remainder(std::span<const cplx> line, const DyadicPartition& dp) {
    check_line(line, dp);
    const auto tau = line_frequencies(dp.n_t, dp.L_t);
    std::vector<double> factor(tau.size());
    for (std::size_t k = 0; k < tau.size(); ++k) factor[k] = dp.remainder(tau[k]);
    return apply_line_symbol(forward_line(line), factor);
}

double holder_lp(std::span<const cplx> line, double alpha, const DyadicPartition& dp) {
    require_alpha(alpha);
    check_line(line, dp);
    const auto spectrum = forward_line(line);
    const auto tau = line_frequencies(dp.n_t, dp.L_t);
    std::vector<double> factor(tau.size());
    double best = 0.0;
    for (int j = dp.j_min; j <= dp.j_max; ++j) {
        bool any = false;
        for (std::size_t k = 0; k < tau.size(); ++k) {
            factor[k] = dp.psi_j(j, tau[k]);
            any = any || factor[k] != 0.0;
        }
        if (!any) continue;
        best = std::max(best, std::pow(2.0, j * alpha) * line_max(apply_line_symbol(spectrum, factor)));
    }
    for (std::size_t k = 0; k < tau.size(); ++k) factor[k] = dp.remainder(tau[k]);
    const auto R = apply_line_symbol(spectrum, factor);
    double slope = 0.0;
    for (std::size_t i = 0; i + 1 < R.size(); ++i) slope = std::max(slope, std::abs(R[i + 1] - R[i]));
    const double span = (dp.n_t - 1) * dp.dt();
    return best + slope / dp.dt() * std::pow(span, 1.0 - alpha);
}

double holder_direct(std::span<const cplx> line, double alpha, double dt) {
    require_alpha(alpha);
    if (!(dt > 0.0)) throw ConfigError("holder_direct: dt must be > 0");
    const std::size_t n = line.size();
    if (n < 2) return 0.0;
    // Quotient depends only on the lag, so precompute lag^-alpha.
    std::vector<double> scale(n);
    for (std::size_t lag = 1; lag < n; ++lag) scale[lag] = std::pow(lag * dt, -alpha);
    std::vector<double> stripe_max(n, 0.0);
    parallel_for(n - 1, [&](std::size_t i) {
        double m = 0.0;
        for (std::size_t k = i + 1; k < n; ++k) m = std::max(m, std::abs(line[k] - line[i]) * scale[k - i]);
        stripe_max[i] = m;
    });
    return *std::max_element(stripe_max.begin(), stripe_max.end());
}

HolderEstimate holder_estimate(std::span<const cplx> line, double alpha, const DyadicPartition& dp) {
    const std::size_t n = line.size();
    return {alpha, holder_lp(line, alpha, dp), holder_direct(line, alpha, dp.dt()), n * (n - 1) / 2};
}

BernsteinRow bernstein_ratio(std::span<const cplx> line, int j, double q, const DyadicPartition& dp) {
    if (!(q >= 1.0) || std::isinf(q)) throw ConfigError("bernstein: q must lie in [1, inf)");
    const auto block = lp_block(line, j, dp);
    const double top = line_max(block);
    const double bottom = line_lq(block, q, dp.dt());
    // Blocks holding only rounding noise carry no information.
    if (top <= 1e-12 * line_max(line) || bottom == 0.0) return {j, q, 0.0, true};
    return {j, q, top / (std::pow(2.0, j / q) * bottom), false};
}

BernsteinReport bernstein_check(const std::vector<std::vector<cplx>>& probes, const std::vector<int>& js,
                                double q, const DyadicPartition& dp) {
    if (js.empty()) throw ConfigError("bernstein_check: empty scale list");
    BernsteinReport rep;
    rep.rows.resize(probes.size() * js.size());
    parallel_for(rep.rows.size(), [&](std::size_t idx) {
        rep.rows[idx] = bernstein_ratio(probes[idx / js.size()], js[idx % js.size()], q, dp);
    });
    std::vector<int> sorted = js;
    std::sort(sorted.begin(), sorted.end());
    const int median_j = sorted[(sorted.size() - 1) / 2];
    bool any = false;
    for (const auto& r : rep.rows) {
        if (r.skipped) continue;
        any = true;
        rep.max_ratio = std::max(rep.max_ratio, r.ratio);
        if (r.j <= median_j) rep.fitted_c = std::max(rep.fitted_c, r.ratio);
    }
    if (!any) return rep;
    rep.verdict = rep.max_ratio <= 2.0 * rep.fitted_c ? Verdict::pass : Verdict::fail;
    return rep;
}

namespace {

double half_kernel_norm(double q_conj) {
    static std::mutex mutex;
    static std::map<double, double> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(q_conj);
    if (it != cache.end()) return it->second;
    const double v = kernel_lq_norm(0.5, 1, q_conj);
    cache.emplace(q_conj, v);
    return v;
}

}  // namespace

SupBound sup_bound_via_kernel(std::span<const cplx> line, double q, double dt) {
    if (!(q > 2.0) || std::isinf(q)) throw ConfigError("sup_bound_via_kernel: q must lie in (2, inf)");
    if (!(dt > 0.0)) throw ConfigError("sup_bound_via_kernel: dt must be > 0");
    const int n = static_cast<int>(line.size());
    const double L = n * dt;
    auto spectrum = forward_line(line);
    for (int k = 0; k < n; ++k) {
        const double tau = 2.0 * std::numbers::pi * Grid::signed_index(k, n) / L;
        spectrum[k] *= std::pow(1.0 + tau * tau, 0.25);
    }
    const auto lifted = inverse_line(spectrum);
    const double q_conj = q / (q - 1.0);
    SupBound out;
    out.sup = line_max(line);
    out.bound = half_kernel_norm(q_conj) * line_lq(lifted, q, dt);
    out.holds = out.sup <= out.bound;
    return out;
}

void write_line_holder_csv(const std::vector<LineHolderRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << "x_index,lp_value,direct_value\n" << std::setprecision(17);
    for (const auto& r : rows) out << r.x_index << "," << r.lp_value << "," << r.direct_value << "\n";
}

}  // namespace chronoreg
