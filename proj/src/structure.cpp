#include "chronoreg/error.hpp"
#include "chronoreg/pde.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace chronoreg {

namespace {

double frobenius(std::span<const double> v) {
    double s = 0.0;
    for (double a : v) s += a * a;
    return std::sqrt(s);
}

double eval_h(const ScalarFn& h, double t, std::span<const double> x) { return h ? std::abs(h(t, x)) : 0.0; }

StructureSpec p_laplace(double p, int d, int N, double eps) {
    StructureSpec s;
    s.name = "p-laplace";
    s.d = d;
    s.N = N;
    s.p = p;
    s.epsilon_reg = eps;
    const double e = p - 2.0;
    s.A = [p, eps](double, std::span<const double>, std::span<const double> V, std::span<double> out) {
        const double m = frobenius(V);
        const double k = std::pow(m * m + eps * eps, 0.5 * (p - 2.0));
        for (std::size_t i = 0; i < V.size(); ++i) out[i] = k * V[i];
    };
    // radial derivative of A for p >= 2 (Newton in one dimension), secant coefficient below 2
    s.stiffness = [p, eps](double, std::span<const double>, std::span<const double> V) {
        const double m2 = frobenius(V) * frobenius(V);
        const double k = std::pow(m2 + eps * eps, 0.5 * (p - 2.0));
        return p >= 2.0 ? k * (1.0 + (p - 2.0) * m2 / (m2 + eps * eps)) : k;
    };
    if (p >= 2.0) {
        s.c1 = std::pow(2.0, 0.5 * e);
        const double h1 = s.c1 * std::pow(eps, p - 1.0);
        s.h1 = [h1](double, std::span<const double>) { return h1; };
        s.c3 = 1.0;
    } else {
        s.c1 = 1.0;
        s.c3 = std::pow(2.0, 0.5 * e);
        const double h3 = s.c3 * std::pow(eps, p);
        s.h3 = [h3](double, std::span<const double>) { return h3; };
    }
    s.c2 = 1.0;
    s.linear = p == 2.0;
    return s;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

void StructureSpec::validate(double L_t, double L_x, int samples, std::uint64_t seed) const {
    if (d < 1 || N < 1) throw ConfigError("structure: d and N must be positive");
    if (!(p > 1.0)) throw ConfigError("structure: p must exceed 1");
    if (!A) throw ConfigError("structure: A is not set");
    if (!stiffness) throw ConfigError("structure: stiffness is not set");
    if (!(c1 > 0.0 && c2 > 0.0 && c3 > 0.0)) throw ConfigError("structure: c1, c2, c3 must be positive");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal;
    const std::size_t dn = static_cast<std::size_t>(d) * N;
    std::vector<double> x(d), V(dn), Av(dn), Bv(N), Fv(dn), fv(N);
    const double tol = 1e-9;
    for (int s = 0; s < samples; ++s) {
        const double t = unit(rng) * L_t;
        for (auto& c : x) c = unit(rng) * L_x;
        double m = 0.0;
        for (auto& v : V) {
            v = normal(rng);
            m += v * v;
        }
        const double scale = std::pow(10.0, -4.0 + 8.0 * unit(rng)) / std::sqrt(m);
        for (auto& v : V) v *= scale;
        const double nv = frobenius(V);

        A(t, x, V, Av);
        std::fill(Bv.begin(), Bv.end(), 0.0);
        if (B) B(t, x, V, Bv);
        if (forcing) {
            std::fill(Fv.begin(), Fv.end(), 0.0);
            std::fill(fv.begin(), fv.end(), 0.0);
            if (forcing->F) forcing->F(t, x, {}, Fv);
            if (forcing->f) forcing->f(t, x, {}, fv);
            for (std::size_t i = 0; i < dn; ++i) Av[i] += Fv[i];
            for (int i = 0; i < N; ++i) Bv[i] += fv[i];
        }
        const double h1v = eval_h(h1, t, x), h2v = eval_h(h2, t, x), h3v = eval_h(h3, t, x);
        const double grow = std::pow(nv, p - 1.0);
        double pairing_sum = 0.0;
        for (int i = 0; i < N; ++i) {
            std::span<const double> Ai(Av.data() + static_cast<std::size_t>(i) * d, d);
            const double a = frobenius(Ai);
            const double boundA = c1 * grow + h1v;
            if (!(a <= boundA * (1.0 + tol) + 1e-300)) {
                std::ostringstream os;
                os << "structure '" << name << "': growth of A_" << i << " violated at |V| = " << nv << " (|A| = " << a
                   << " > " << boundA << ")";
                throw ConfigError(os.str());
            }
            const double boundB = c2 * grow + h2v;
            if (!(std::abs(Bv[i]) <= boundB * (1.0 + tol) + 1e-300)) {
                std::ostringstream os;
                os << "structure '" << name << "': growth of B_" << i << " violated at |V| = " << nv;
                throw ConfigError(os.str());
            }
            for (int k = 0; k < d; ++k) pairing_sum += Ai[k] * V[static_cast<std::size_t>(i) * d + k];
        }
        const double lower = c3 * std::pow(nv, p) - h3v;
        if (!(pairing_sum >= lower - tol * (std::abs(lower) + std::abs(pairing_sum)) - 1e-300)) {
            std::ostringstream os;
            os << "structure '" << name << "': coercivity violated at |V| = " << nv << " (" << pairing_sum << " < "
               << lower << ")";
            throw ConfigError(os.str());
        }
    }
}

std::vector<std::string> preset_names() {
    return {"heat", "p-laplace-1.5", "p-laplace-3", "p-laplace-4", "rough-linear"};
}

StructureSpec make_preset(const std::string& name, int d, int N, double epsilon_reg) {
    if (!(epsilon_reg > 0.0)) throw ConfigError("structure: epsilon_reg must be positive");
    StructureSpec s;
    if (name == "heat") {
        s = p_laplace(2.0, d, N, epsilon_reg);
        s.h1 = nullptr;
        s.stiffness = [](double, std::span<const double>, std::span<const double>) { return 1.0; };
        s.A = [](double, std::span<const double>, std::span<const double> V, std::span<double> out) {
            std::copy(V.begin(), V.end(), out.begin());
        };
    } else if (name == "p-laplace-1.5") {
        s = p_laplace(1.5, d, N, epsilon_reg);
    } else if (name == "p-laplace-3") {
        s = p_laplace(3.0, d, N, epsilon_reg);
    } else if (name == "p-laplace-4") {
        s = p_laplace(4.0, d, N, epsilon_reg);
    } else if (name == "rough-linear") {
        // a(x) in {1, 1.5, 2} jumps across the zeros of sin(3 x_1)
        s.d = d;
        s.N = N;
        s.p = 2.0;
        s.epsilon_reg = epsilon_reg;
        s.linear = true;
        s.stiffness = [](double, std::span<const double> x, std::span<const double>) {
            return 1.5 + 0.5 * sign(std::sin(3.0 * x[0]));
        };
        auto a = s.stiffness;
        s.A = [a](double t, std::span<const double> x, std::span<const double> V, std::span<double> out) {
            const double k = a(t, x, V);
            for (std::size_t i = 0; i < V.size(); ++i) out[i] = k * V[i];
        };
        Forcing f;
        f.F = [](double t, std::span<const double> x, std::span<const double>, std::span<double> out) {
            for (std::size_t i = 0; i < out.size(); ++i)
                out[i] = 0.1 * sign(std::cos(2.0 * x[i % x.size()] + t));
        };
        f.f = [](double t, std::span<const double> x, std::span<const double>, std::span<double> out) {
            for (auto& v : out) v = 0.1 * std::cos(t) * sign(std::sin(x[0]));
        };
        s.forcing = f;
        s.c1 = 2.0;
        s.c2 = 1.0;
        s.c3 = 0.5;
        const double fmax = 0.1 * std::sqrt(static_cast<double>(d) * N);
        s.h1 = [fmax](double, std::span<const double>) { return fmax; };
        s.h2 = [](double, std::span<const double>) { return 0.1; };
        s.h3 = [fmax](double, std::span<const double>) { return 0.5 * fmax * fmax; };
    } else {
        std::ostringstream os;
        os << "unknown structure preset '" << name << "'";
        throw ConfigError(os.str());
    }
    s.name = name;
    return s;
}

double structure_c4(const StructureSpec& spec, const Grid& g, const Interval& I, const Interval& Q, double q_hat) {
    if (!(q_hat > 1.0)) throw ConfigError("structure: q_hat must exceed 1");
    const Grid gs(g.d(), g.n_t(), g.n_x(), g.L_t(), g.L_x(), 1);
    const double pp = spec.p / (spec.p - 1.0);
    const auto w = GridFunction::sample(gs, [&](double t, std::span<const double> x, int) {
        const double h12 = eval_h(spec.h1, t, x) + eval_h(spec.h2, t, x);
        return cplx(std::pow(h12, pp) + eval_h(spec.h3, t, x));
    });
    return restricted_lq_norm(w, q_hat, I, Q);
}

}  // namespace chronoreg
