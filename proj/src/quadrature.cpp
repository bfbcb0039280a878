#include "chronoreg/quadrature.hpp"

#include "chronoreg/error.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

namespace chronoreg::quad {

namespace {

GaussRule build_rule(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton iteration on P_n from the Chebyshev-like initial guess.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, build_rule(order)).first;
    return it->second;
}

double composite_gauss(const std::function<double(double)>& fn, double a, double b, int panels,
                       int order) {
    const GaussRule& rule = gauss_legendre(order);
    const double width = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * width;
        double s = 0.0;
        for (int i = 0; i < order; ++i) s += rule.weights[i] * fn(mid + 0.5 * width * rule.nodes[i]);
        total += 0.5 * width * s;
    }
    return total;
}

double adaptive_gauss(const std::function<double(double)>& fn, double a, double b, double rel_tol,
                      int start_panels, int max_doublings) {
    int panels = start_panels;
    double prev = composite_gauss(fn, a, b, panels);
    double diff = 0.0;
    for (int k = 0; k < max_doublings; ++k) {
        panels *= 2;
        const double next = composite_gauss(fn, a, b, panels);
        diff = std::abs(next - prev);
        if (diff <= rel_tol * std::abs(next) || next == 0.0) return next;
        prev = next;
    }
    std::ostringstream os;
    os << "adaptive_gauss did not converge on [" << a << ", " << b
       << "]; achieved relative change " << diff / std::abs(prev);
    throw NumericalError(os.str());
}

}  // namespace chronoreg::quad
