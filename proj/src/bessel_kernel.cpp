// Real-space Bessel kernel. Shares no code with the spectral
// symbol path in potentials.cpp so the two can cross-check each other.

#include "chronoreg/error.hpp"
#include "chronoreg/potentials.hpp"
#include "chronoreg/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace chronoreg {

namespace {

constexpr double kPi = std::numbers::pi;

// Exponent of the integrand in y = log(delta):
//   delta^{(s-d)/2} exp(-pi r^2 / delta - delta / (4 pi))
struct LogIntegrand {
    double e;       // (s - d) / 2
    double log_a;   // log(pi r^2), -inf when r = 0

    double operator()(double y) const {
        const double decay = std::isinf(log_a) ? 0.0 : std::exp(log_a - y);
        return e * y - decay - std::exp(y) / (4.0 * kPi);
    }
    double slope(double y) const {
        const double decay = std::isinf(log_a) ? 0.0 : std::exp(log_a - y);
        return e + decay - std::exp(y) / (4.0 * kPi);
    }
};

double find_peak(const LogIntegrand& f) {
    // slope is strictly decreasing; bracket its root and bisect.
    double lo = std::isinf(f.log_a) ? -50.0 : std::min(-50.0, f.log_a - 50.0);
    double hi = 50.0;
    while (f.slope(lo) < 0.0) lo -= 50.0;
    while (f.slope(hi) > 0.0) hi += 10.0;
    for (int i = 0; i < 200 && hi - lo > 1e-13 * (1.0 + std::abs(lo)); ++i) {
        const double mid = 0.5 * (lo + hi);
        (f.slope(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Walks away from the peak until the integrand drops below exp(-60) of its max.
double find_cutoff(const LogIntegrand& f, double peak, double peak_value, double direction) {
    double step = 1.0;
    double y = peak;
    for (long i = 0; i < 2000000; ++i) {
        y += direction * step;
        if (f(y) < peak_value - 60.0) return y;
        step = std::min(step * 1.5, 64.0);
    }
    throw NumericalError("kernel_quadrature: integrand does not decay");
}

}  // namespace

double kernel_quadrature(double s, double r, int d) {
    if (!(s > 0.0)) throw ConfigError("kernel_quadrature: order s must be > 0");
    if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("kernel_quadrature: radius must be >= 0");
    if (d < 1) throw ConfigError("kernel_quadrature: dimension must be >= 1");
    if (r == 0.0 && s <= d) {
        std::ostringstream os;
        os << "kernel_quadrature: G^s diverges at r = 0 for s = " << s << " <= d = " << d;
        throw ConfigError(os.str());
    }
    const LogIntegrand f{0.5 * (s - d), r == 0.0 ? -std::numeric_limits<double>::infinity()
                                                 : std::log(kPi) + 2.0 * std::log(r)};
    const double peak = find_peak(f);
    const double peak_value = f(peak);
    const double lo = find_cutoff(f, peak, peak_value, -1.0);
    const double hi = find_cutoff(f, peak, peak_value, +1.0);

    // Trapezoid sums of exp(f - peak_value); the integrand is analytic and
    // decays doubly exponentially in both tails, so halving converges fast.
    int n = 64;
    double h = (hi - lo) / n;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        sum += w * std::exp(f(lo + i * h) - peak_value);
    }
    double estimate = sum * h;
    double change = 0.0;
    for (int level = 0; level < 16; ++level) {
        double added = 0.0;
        for (int i = 0; i < n; ++i) added += std::exp(f(lo + (i + 0.5) * h) - peak_value);
        sum += added;
        n *= 2;
        h *= 0.5;
        const double next = sum * h;
        change = std::abs(next - estimate) / next;
        estimate = next;
        if (level >= 1 && change <= 1e-9) {
            const double log_prefactor = -0.5 * s * std::log(4.0 * kPi) - std::lgamma(0.5 * s);
            return std::exp(log_prefactor + peak_value + std::log(estimate));
        }
    }
    std::ostringstream os;
    os << "kernel_quadrature: no convergence for s = " << s << ", r = " << r << ", d = " << d
       << "; achieved relative change " << change;
    throw NumericalError(os.str());
}

double kernel_lq_norm(double s, int d, double q) {
    if (!(q >= 1.0) || std::isinf(q)) throw ConfigError("kernel_lq_norm: q must lie in [1, inf)");
    // Near the origin G ~ r^{s-d} (log for s = d), so G^q r^{d-1} ~ r^{(s-d) q + d - 1}.
    const double origin_power = (s - d) * q + d;
    if (s < d && !(origin_power > 0.0)) {
        std::ostringstream os;
        os << "kernel_lq_norm: G^s is not in L^q for s = " << s << ", d = " << d << ", q = " << q;
        throw ConfigError(os.str());
    }
    const double sphere = 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
    auto radial = [&](double r) { return std::pow(kernel_quadrature(s, r, d), q) * std::pow(r, d - 1); };

    // On (0, 1] substitute r = w^k so the leading singular power becomes w^0.
    const double k = s < d ? 1.0 / origin_power : (s == d ? 2.0 : 1.0);
    auto inner = [&](double w) {
        if (w <= 0.0) return 0.0;
        const double r = std::pow(w, k);
        return radial(r) * k * r / w;
    };
    const double near = quad::adaptive_gauss(inner, 0.0, 1.0, 1e-10, 4);
    // G decays like exp(-r), so G^q is below 1e-19 of its peak beyond 1 + 45/q.
    const double far = quad::adaptive_gauss(radial, 1.0, 1.0 + 45.0 / q, 1e-10, 8);
    return std::pow(sphere * (near + far), 1.0 / q);
}

}  // namespace chronoreg
