#pragma once

#include <functional>
#include <vector>

namespace chronoreg::quad {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(int order);

/// Composite Gauss-Legendre over [a, b] split into `panels` equal panels.
double composite_gauss(const std::function<double(double)>& fn, double a, double b, int panels,
                       int order = 16);

/// Composite Gauss-Legendre with panel doubling until two successive results
/// agree to `rel_tol`. Throws NumericalError when max_doublings is exhausted.
double adaptive_gauss(const std::function<double(double)>& fn, double a, double b, double rel_tol,
                      int start_panels = 8, int max_doublings = 10);

}  // namespace chronoreg::quad
