#include "chronoreg/error.hpp"
#include "chronoreg/parallel.hpp"
#include "chronoreg/pde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace chronoreg {

namespace {

// Per-node work is farmed out only above this many unknowns.
constexpr std::size_t kParallelThreshold = 4096;

void for_nodes(std::size_t P, std::size_t unknowns, const std::function<void(std::size_t)>& body) {
    if (unknowns >= kParallelThreshold && worker_count() > 1) {
        parallel_for(P, body);
    } else {
        for (std::size_t ix = 0; ix < P; ++ix) body(ix);
    }
}

class Stepper {
public:
    Stepper(const StructureSpec& spec, const Grid& g)
        : spec_(spec), d_(g.d()), N_(g.N()), P_(g.spatial_points()), h_(g.dx()),
          dvol_(std::pow(g.dx(), g.d())), coords_(P_ * d_), plus_(d_), minus_(d_) {
        for (std::size_t ix = 0; ix < P_; ++ix)
            g.spatial_coords(ix, std::span<double>(coords_.data() + ix * d_, d_));
        for (int k = 0; k < d_; ++k) {
            plus_[k].resize(P_);
            minus_[k].resize(P_);
            for (std::size_t ix = 0; ix < P_; ++ix) {
                plus_[k][ix] = g.spatial_neighbor(ix, k, 1);
                minus_[k][ix] = g.spatial_neighbor(ix, k, -1);
            }
        }
        const std::size_t dn = static_cast<std::size_t>(d_) * N_;
        V_.resize(P_ * dn);
        flux_.resize(P_ * dn);
        src_.resize(P_ * N_);
        kappa_.resize(P_);
    }

    std::size_t unknowns() const { return P_ * N_; }
    double spatial_volume() const { return dvol_; }

    void gradient(const std::vector<double>& u, std::vector<double>& V) const {
        const std::size_t dn = static_cast<std::size_t>(d_) * N_;
        for (std::size_t ix = 0; ix < P_; ++ix) {
            for (int k = 0; k < d_; ++k) {
                const std::size_t jx = plus_[k][ix];
                for (int i = 0; i < N_; ++i)
                    V[ix * dn + static_cast<std::size_t>(i) * d_ + k] = (u[jx * N_ + i] - u[ix * N_ + i]) / h_;
            }
        }
    }

    // Adds div_- of a node-centred flux field to out.
    void add_divergence(const std::vector<double>& flux, std::vector<double>& out, double scale) const {
        const std::size_t dn = static_cast<std::size_t>(d_) * N_;
        for (std::size_t ix = 0; ix < P_; ++ix) {
            for (int i = 0; i < N_; ++i) {
                double s = 0.0;
                for (int k = 0; k < d_; ++k) {
                    const std::size_t off = static_cast<std::size_t>(i) * d_ + k;
                    s += flux[ix * dn + off] - flux[minus_[k][ix] * dn + off];
                }
                out[ix * N_ + i] += scale * s / h_;
            }
        }
    }

    // Evaluates kappa, A + F (minus kappa V when `lag`) and B + f at the current gradient.
    void evaluate(double t, const std::vector<double>& u, bool lag) {
        gradient(u, V_);
        const std::size_t dn = static_cast<std::size_t>(d_) * N_;
        for_nodes(P_, unknowns(), [&](std::size_t ix) {
            std::span<const double> x(coords_.data() + ix * d_, d_);
            std::span<const double> V(V_.data() + ix * dn, dn);
            std::span<double> A(flux_.data() + ix * dn, dn);
            std::span<double> B(src_.data() + ix * N_, N_);
            spec_.A(t, x, V, A);
            std::fill(B.begin(), B.end(), 0.0);
            if (spec_.B) spec_.B(t, x, V, B);
            const double k = spec_.stiffness(t, x, V);
            kappa_[ix] = k;
            if (lag)
                for (std::size_t j = 0; j < dn; ++j) A[j] -= k * V[j];
            if (spec_.forcing) {
                thread_local std::vector<double> F, f;
                F.assign(dn, 0.0);
                f.assign(N_, 0.0);
                if (spec_.forcing->F) spec_.forcing->F(t, x, {}, F);
                if (spec_.forcing->f) spec_.forcing->f(t, x, {}, f);
                for (std::size_t j = 0; j < dn; ++j) A[j] += F[j];
                for (int i = 0; i < N_; ++i) B[i] += f[i];
            }
        });
    }

    // Full right-hand side div_-(A + F) + B + f from the last evaluate().
    void tendency(std::vector<double>& out) const {
        out = src_;
        add_divergence(flux_, out, 1.0);
    }

    double max_kappa() const { return *std::max_element(kappa_.begin(), kappa_.end()); }

    // y = u - dt div_-(kappa grad_+ u)
    void apply(const std::vector<double>& u, std::vector<double>& y, double dt) const {
        for (std::size_t ix = 0; ix < P_; ++ix) {
            for (int i = 0; i < N_; ++i) {
                const double c = u[ix * N_ + i];
                double s = 0.0;
                for (int k = 0; k < d_; ++k) {
                    const std::size_t jp = plus_[k][ix], jm = minus_[k][ix];
                    s += kappa_[ix] * (u[jp * N_ + i] - c) - kappa_[jm] * (c - u[jm * N_ + i]);
                }
                y[ix * N_ + i] = c - dt * s / (h_ * h_);
            }
        }
    }

    void diagonal(std::vector<double>& diag, double dt) const {
        for (std::size_t ix = 0; ix < P_; ++ix) {
            double s = 0.0;
            for (int k = 0; k < d_; ++k) s += kappa_[ix] + kappa_[minus_[k][ix]];
            for (int i = 0; i < N_; ++i) diag[ix * N_ + i] = 1.0 + dt * s / (h_ * h_);
        }
    }

    // Jacobi-preconditioned CG for the frozen-kappa system; x holds the initial guess.
    void cg_solve(const std::vector<double>& rhs, std::vector<double>& x, double dt, double tol, int step) const {
        const std::size_t n = rhs.size();
        std::vector<double> diag(n), r(n), z(n), p(n), q(n);
        diagonal(diag, dt);
        apply(x, q, dt);
        double rhs_norm = 0.0, rr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = rhs[i] - q[i];
            rhs_norm += rhs[i] * rhs[i];
        }
        rhs_norm = std::sqrt(rhs_norm);
        if (rhs_norm == 0.0) {
            std::fill(x.begin(), x.end(), 0.0);
            return;
        }
        double rz = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = r[i] / diag[i];
            p[i] = z[i];
            rz += r[i] * z[i];
            rr += r[i] * r[i];
        }
        const int max_it = static_cast<int>(std::min<std::size_t>(20 * n + 100, 200000));
        double best = std::sqrt(rr) / rhs_norm;
        for (int it = 0; it < max_it && best > tol; ++it) {
            apply(p, q, dt);
            double pq = 0.0;
            for (std::size_t i = 0; i < n; ++i) pq += p[i] * q[i];
            if (!(pq > 0.0)) break;
            const double a = rz / pq;
            rr = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += a * p[i];
                r[i] -= a * q[i];
                rr += r[i] * r[i];
            }
            best = std::sqrt(rr) / rhs_norm;
            double rz_new = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                z[i] = r[i] / diag[i];
                rz_new += r[i] * z[i];
            }
            const double b = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + b * p[i];
        }
        if (!(best <= 1e3 * tol)) {
            std::ostringstream os;
            os << "conjugate gradients stalled at step " << step << " (relative residual " << best << ")";
            throw NumericalError(os.str());
        }
        // the operator preserves each component's sum; remove the CG residual's share
        for (int i = 0; i < N_; ++i) {
            double sr = 0.0, sx = 0.0;
            for (std::size_t ix = 0; ix < P_; ++ix) {
                sr += rhs[ix * N_ + i];
                sx += x[ix * N_ + i];
            }
            const double shift = (sr - sx) / static_cast<double>(P_);
            for (std::size_t ix = 0; ix < P_; ++ix) x[ix * N_ + i] += shift;
        }
    }

private:
    const StructureSpec& spec_;
    int d_;
    int N_;
    std::size_t P_;
    double h_;
    double dvol_;
    std::vector<double> coords_;
    std::vector<std::vector<std::size_t>> plus_, minus_;
    std::vector<double> V_, flux_, src_, kappa_;
};

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double a : v) m = std::max(m, std::abs(a));
    return m;
}

bool finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

}  // namespace

SolveResult solve(const StructureSpec& spec, const GridFunction& u0, const SolveConfig& cfg) {
    const Grid& g = cfg.grid;
    if (!(u0.grid() == g)) throw ConfigError("solve: u0 must live on the configured grid");
    if (spec.d != g.d() || spec.N != g.N()) throw ConfigError("solve: structure d/N do not match the grid");
    if (!(cfg.time_step > 0.0) || !std::isfinite(cfg.time_step)) throw ConfigError("solve: time_step must be positive");
    if (cfg.max_picard < 1) throw ConfigError("solve: max_picard must be at least 1");
    if (!(cfg.cfl_safety > 0.0)) throw ConfigError("solve: cfl_safety must be positive");
    spec.validate(g.L_t(), g.L_x(), 1000);

    const std::size_t P = g.spatial_points();
    const auto N = static_cast<std::size_t>(g.N());
    std::vector<double> u(P * N);
    double scale = 0.0;
    for (std::size_t j = 0; j < P * N; ++j) {
        const cplx v = u0.values()[j];
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw ConfigError("solve: u0 has a non-finite entry at spatial index " + std::to_string(j / N));
        u[j] = v.real();
        scale = std::max(scale, std::abs(v));
    }
    for (std::size_t j = 0; j < P * N; ++j)
        if (std::abs(u0.values()[j].imag()) > 1e-12 * std::max(scale, 1.0))
            throw ConfigError("solve: u0 must be real-valued");

    Stepper st(spec, g);
    const int per_row = std::max(1, static_cast<int>(std::ceil(g.dt() / cfg.time_step - 1e-9)));
    const double dt = g.dt() / per_row;

    SolveResult res{GridFunction(g)};
    res.step_size = dt;
    auto store = [&](int row) {
        for (std::size_t j = 0; j < P * N; ++j) res.field.values()[static_cast<std::size_t>(row) * P * N + j] = u[j];
    };
    store(0);

    auto masses = [&](const std::vector<double>& v) {
        std::vector<double> m(N, 0.0);
        for (std::size_t ix = 0; ix < P; ++ix)
            for (std::size_t i = 0; i < N; ++i) m[i] += v[ix * N + i];
        for (auto& x : m) x *= st.spatial_volume();
        return m;
    };
    auto energy = [&](const std::vector<double>& v) {
        double s = 0.0;
        for (double a : v) s += a * a;
        return std::sqrt(s * st.spatial_volume());
    };
    const double h = g.dx();
    auto cfl_limit = [&]() { return cfg.cfl_safety * h * h / (2.0 * g.d() * st.max_kappa()); };

    std::vector<double> un, w, rhs, tend;
    int step = 0;
    for (int row = 1; row < g.n_t(); ++row) {
        for (int sub = 0; sub < per_row; ++sub, ++step) {
            const double t0 = g.time_coord(row - 1) + sub * dt;
            un = u;
            if (cfg.scheme == Scheme::explicit_euler) {
                st.evaluate(t0, u, false);
                if (dt > cfl_limit()) {
                    std::ostringstream os;
                    os << "explicit scheme violates the CFL limit " << cfl_limit() << " at step " << step
                       << " (time_step " << dt << ")";
                    if (step == 0) throw ConfigError(os.str());
                    throw NumericalError(os.str());
                }
                st.tendency(tend);
                for (std::size_t j = 0; j < u.size(); ++j) u[j] += dt * tend[j];
            } else {
                const double t1 = t0 + dt;
                w = un;
                int m = 1;
                for (;; ++m) {
                    st.evaluate(t1, w, true);
                    st.tendency(tend);
                    rhs.resize(un.size());
                    for (std::size_t j = 0; j < un.size(); ++j) rhs[j] = un[j] + dt * tend[j];
                    u = w;
                    st.cg_solve(rhs, u, dt, cfg.cg_tol, step);
                    double change = 0.0;
                    for (std::size_t j = 0; j < u.size(); ++j) change = std::max(change, std::abs(u[j] - w[j]));
                    change /= std::max(max_abs(u), 1e-300);
                    w = u;
                    if (!finite(u)) break;
                    if (spec.linear || change <= cfg.picard_tol) break;
                    if (m >= cfg.max_picard) {
                        std::ostringstream os;
                        os << "Picard iteration did not converge at step " << step << " (relative change " << change
                           << " after " << m << " iterations)";
                        throw NumericalError(os.str());
                    }
                }
                res.max_picard_used = std::max(res.max_picard_used, m);
            }
            if (!finite(u)) {
                std::ostringstream os;
                os << "solution became non-finite at step " << step << " (t = " << t0 + dt << ")";
                throw NumericalError(os.str());
            }
            const auto m0 = masses(un), m1 = masses(u);
            for (std::size_t i = 0; i < N; ++i)
                res.max_mass_drift = std::max(res.max_mass_drift, std::abs(m1[i] - m0[i]));
            if (step == 0) res.max_energy_increase = energy(u) - energy(un);
            else res.max_energy_increase = std::max(res.max_energy_increase, energy(u) - energy(un));
        }
        store(row);
    }
    res.steps = step;
    return res;
}

GridFunction initial_condition(const Grid& g, const std::function<double(std::span<const double> x, int comp)>& fn) {
    return GridFunction::sample(g, [&](double, std::span<const double> x, int c) { return cplx(fn(x, c)); });
}

GridFunction gradient_magnitude(const GridFunction& u) {
    const Grid& g = u.grid();
    const Grid gs(g.d(), g.n_t(), g.n_x(), g.L_t(), g.L_x(), 1);
    GridFunction out(gs);
    const double h = g.dx();
    for (int it = 0; it < g.n_t(); ++it) {
        for (std::size_t ix = 0; ix < g.spatial_points(); ++ix) {
            double s = 0.0;
            for (int k = 0; k < g.d(); ++k) {
                const std::size_t jx = g.spatial_neighbor(ix, k, 1);
                for (int i = 0; i < g.N(); ++i) {
                    const double diff = (u.at(it, jx, i).real() - u.at(it, ix, i).real()) / h;
                    s += diff * diff;
                }
            }
            out.at(it, ix, 0) = std::sqrt(s);
        }
    }
    return out;
}

}  // namespace chronoreg
