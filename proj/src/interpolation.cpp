#include "chronoreg/interpolation.hpp"

#include "chronoreg/error.hpp"
#include "chronoreg/parallel.hpp"
#include "chronoreg/potentials.hpp"
#include "chronoreg/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace chronoreg {

namespace {

void require_exponent(double q, const char* name) {
    if (!(q > 1.0) || std::isinf(q)) {
        std::ostringstream os;
        os << "interpolation: " << name << " = " << q << " must lie in (1, inf)";
        throw ConfigError(os.str());
    }
}

void require_theta(double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("interpolation: theta must lie in (0, 1)");
}

double conjugate(double q) { return q / (q - 1.0); }

std::size_t find_exact(const std::vector<double>& grid, double v, const char* what) {
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid[i] == v) return i;
    throw ConfigError(std::string("strip sample: grid does not contain ") + what);
}

// Golden-section search for the max of g on [lo, hi].
double golden_max(const std::function<double(double)>& g, double lo, double hi) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
    double f1 = g(x1), f2 = g(x2);
    double best = std::max(f1, f2);
    for (int it = 0; it < 40; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = g(x1);
        }
        best = std::max({best, f1, f2});
    }
    return best;
}

StripSample sample_with(const std::function<cplx(double, double)>& H, double theta,
                        const std::vector<double>& a_grid, const std::vector<double>& b_grid) {
    require_theta(theta);
    find_exact(a_grid, 0.0, "a = 0");
    find_exact(a_grid, theta, "a = theta");
    find_exact(a_grid, 1.0, "a = 1");
    if (b_grid.size() < 3) throw ConfigError("strip sample: b grid needs at least 3 points");
    if (!std::is_sorted(b_grid.begin(), b_grid.end())) throw ConfigError("strip sample: b grid must be sorted");
    StripSample ss;
    ss.theta = theta;
    ss.a_grid = a_grid;
    ss.b_grid = b_grid;
    const std::size_t na = a_grid.size(), nb = b_grid.size();
    ss.H_values.assign(na, std::vector<cplx>(nb));
    parallel_for(na * nb, [&](std::size_t idx) {
        const cplx v = H(a_grid[idx / nb], b_grid[idx % nb]);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            std::ostringstream os;
            os << "strip sample: H is not finite at a = " << a_grid[idx / nb] << ", b = " << b_grid[idx % nb];
            throw NumericalError(os.str());
        }
        ss.H_values[idx / nb][idx % nb] = v;
    });
    ss.refined_sup.assign(na, 0.0);
    parallel_for(na, [&](std::size_t ia) {
        const auto& row = ss.H_values[ia];
        double top = 0.0;
        for (const auto& v : row) top = std::max(top, std::abs(v));
        double best = top;
        // Refine every sampled local maximum within 1% of the sampled top.
        for (std::size_t k = 1; k + 1 < nb; ++k) {
            const double m = std::abs(row[k]);
            if (m < 0.99 * top || m < std::abs(row[k - 1]) || m < std::abs(row[k + 1])) continue;
            best = std::max(best, golden_max([&](double b) { return std::abs(H(a_grid[ia], b)); },
                                             b_grid[k - 1], b_grid[k + 1]));
        }
        ss.refined_sup[ia] = best;
    });
    return ss;
}

}  // namespace

double q_theta(double theta, double q0, double q1) {
    require_theta(theta);
    require_exponent(q0, "q0");
    require_exponent(q1, "q1");
    return 1.0 / ((1.0 - theta) / q0 + theta / q1);
}

InterpolationRow verify_interpolation(const GridFunction& f, double theta, double q0, double q1) {
    InterpolationRow row;
    row.theta = theta;
    row.q0 = q0;
    row.q1 = q1;
    row.q_theta = q_theta(theta, q0, q1);
    // one forward transform shared by all three potentials
    const GridFunction spec = forward_transform(f);
    auto norm_of = [&](cplx sx, cplx st, double q) {
        GridFunction s = spec;
        bessel_spectral(s, sx, st);
        return lq_norm(inverse_transform(s), q);
    };
    row.lhs = norm_of(2.0 * theta - 1.0, -theta, row.q_theta);
    row.rhs0 = norm_of(-1.0, 0.0, q0);
    row.rhs1 = norm_of(1.0, -1.0, q1);
    const double rhs = std::pow(row.rhs0, 1.0 - theta) * std::pow(row.rhs1, theta);
    if (rhs == 0.0) {
        row.skipped = true;
        return row;
    }
    row.ratio = row.lhs / rhs;
    if (!std::isfinite(row.ratio)) throw NumericalError("verify_interpolation: ratio is not finite");
    return row;
}

InterpolationSuite interpolation_suite(const std::vector<GridFunction>& probes,
                                       const std::vector<ExponentTriple>& triples) {
    if (probes.empty() || triples.empty()) throw ConfigError("interpolation_suite: empty probe or exponent list");
    InterpolationSuite suite;
    suite.rows.resize(probes.size() * triples.size());
    parallel_for(suite.rows.size(), [&](std::size_t idx) {
        const auto& t = triples[idx % triples.size()];
        suite.rows[idx] = verify_interpolation(probes[idx / triples.size()], t.theta, t.q0, t.q1);
    });
    bool any = false;
    for (const auto& r : suite.rows) {
        if (r.skipped) continue;
        any = true;
        suite.c_suite = std::max(suite.c_suite, r.ratio);
    }
    suite.verdict = any ? Verdict::pass : Verdict::skipped;
    return suite;
}

std::vector<double> default_b_grid(double step) {
    if (!(step > 0.0)) throw ConfigError("b grid step must be > 0");
    const int K = static_cast<int>(std::floor(6.0 / step + 1e-9));
    std::vector<double> b;
    for (int k = -K; k <= K; ++k) b.push_back(k * step);
    return b;
}

std::vector<double> default_a_grid(double theta) {
    std::vector<double> a;
    for (int k = 0; k <= 10; ++k) a.push_back(k / 10.0);
    a.push_back(theta);
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

GridFunction normalize_in_lq(const GridFunction& phi, double r) {
    const double n = lq_norm(phi, r);
    if (!(n > 0.0)) throw ConfigError("normalize_in_lq: zero function");
    GridFunction out(phi);
    out *= 1.0 / n;
    return out;
}

StripSample sample_H(const GridFunction& f, const GridFunction& phi, double theta, double q0, double q1,
                     const std::vector<double>& a_grid, const std::vector<double>& b_grid) {
    const double qt = q_theta(theta, q0, q1);
    const double qt_c = conjugate(qt);
    if (!(f.grid() == phi.grid())) throw ConfigError("sample_H: f and phi live on different grids");
    const double phi_norm = lq_norm(phi, qt_c);
    if (std::abs(phi_norm - 1.0) > 1e-10) {
        std::ostringstream os;
        os << "sample_H: phi must be normalized in L^" << qt_c << " (norm is " << phi_norm << ")";
        throw ConfigError(os.str());
    }
    const Grid& g = f.grid();
    const auto N = static_cast<std::size_t>(g.N());
    const std::size_t nodes = g.nodes();
    // Per node: log|phi| and the unit direction conj(phi)/|phi|.
    std::vector<double> log_mod(nodes, 0.0);
    std::vector<cplx> dir(g.size(), 0.0);
    std::vector<bool> vanish(nodes, false);
    const auto pv = phi.values();
    for (std::size_t n = 0; n < nodes; ++n) {
        double m2 = 0.0;
        for (std::size_t c = 0; c < N; ++c) m2 += std::norm(pv[n * N + c]);
        if (m2 == 0.0) {
            vanish[n] = true;
            continue;
        }
        const double m = std::sqrt(m2);
        log_mod[n] = std::log(m);
        for (std::size_t c = 0; c < N; ++c) dir[n * N + c] = std::conj(pv[n * N + c]) / m;
    }
    const GridFunction spec = forward_transform(f);
    const double e0 = qt_c / conjugate(q0);
    const double e1 = qt_c / conjugate(q1);
    const double dV = g.cell_volume();

    auto H = [&](double a, double b) {
        const cplx z(a, b);
        GridFunction s = spec;
        bessel_spectral(s, 2.0 * z - 1.0, -z);
        const GridFunction F = inverse_transform(s);
        const cplx gauss = std::exp((z - theta) * (z - theta));
        const cplx e = (1.0 - z) * e0 + z * e1;
        const auto fv = F.values();
        cplx acc = 0.0;
        for (std::size_t n = 0; n < nodes; ++n) {
            if (vanish[n]) continue;
            cplx dot = 0.0;
            for (std::size_t c = 0; c < N; ++c) dot += fv[n * N + c] * dir[n * N + c];
            acc += dot * std::exp(e * log_mod[n]);
        }
        return gauss * acc * dV;
    };
    return sample_with(H, theta, a_grid, b_grid);
}

StripSample sample_strip(const std::function<cplx(cplx)>& H, double theta, const std::vector<double>& a_grid,
                         const std::vector<double>& b_grid) {
    return sample_with([&](double a, double b) { return H(cplx(a, b)); }, theta, a_grid, b_grid);
}

ThreeLinesReport three_lines_check(const StripSample& ss) {
    const std::size_t i0 = find_exact(ss.a_grid, 0.0, "a = 0");
    const std::size_t it = find_exact(ss.a_grid, ss.theta, "a = theta");
    const std::size_t i1 = find_exact(ss.a_grid, 1.0, "a = 1");
    const std::size_t jb = find_exact(ss.b_grid, 0.0, "b = 0");
    if (ss.H_values.size() != ss.a_grid.size()) throw ConfigError("strip sample: row count mismatch");
    ThreeLinesReport rep;
    rep.M.resize(ss.a_grid.size());
    for (std::size_t i = 0; i < ss.a_grid.size(); ++i) {
        double m = 0.0;
        for (const auto& v : ss.H_values[i]) {
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw NumericalError("three_lines_check: non-finite H sample");
            m = std::max(m, std::abs(v));
        }
        if (ss.refined_sup.size() == ss.a_grid.size()) m = std::max(m, ss.refined_sup[i]);
        rep.M[i] = m;
    }
    const double theta = ss.theta;
    rep.H_theta = std::abs(ss.H_values[it][jb]);
    rep.bound = std::pow(rep.M[i0], 1.0 - theta) * std::pow(rep.M[i1], theta);
    rep.holds = rep.H_theta <= rep.bound * (1.0 + 1e-6);
    rep.log_convex = true;
    for (std::size_t i = 1; i + 1 < rep.M.size(); ++i) {
        const double a0 = ss.a_grid[i - 1], a = ss.a_grid[i], a1 = ss.a_grid[i + 1];
        if (rep.M[i] == 0.0) continue;
        if (rep.M[i - 1] == 0.0 || rep.M[i + 1] == 0.0) {
            rep.log_convex = false;
            continue;
        }
        const double w = (a - a0) / (a1 - a0);
        const double chord = (1.0 - w) * std::log(rep.M[i - 1]) + w * std::log(rep.M[i + 1]);
        if (std::log(rep.M[i]) > chord + 1e-9) rep.log_convex = false;
    }
    rep.verdict = rep.holds ? Verdict::pass : Verdict::fail;
    return rep;
}

void write_strip_csv(const StripSample& ss, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << "a,b,re_H,im_H\n" << std::setprecision(17);
    for (std::size_t i = 0; i < ss.a_grid.size(); ++i)
        for (std::size_t k = 0; k < ss.b_grid.size(); ++k)
            out << ss.a_grid[i] << "," << ss.b_grid[k] << "," << ss.H_values[i][k].real() << ","
                << ss.H_values[i][k].imag() << "\n";
}

}  // namespace chronoreg
