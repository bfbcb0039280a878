#pragma once

#include "chronoreg/grid.hpp"

#include <filesystem>
#include <vector>

namespace chronoreg {

/// Complex order s of a Bessel potential J^s with symbol (1 + |xi|^2)^{-s/2}.
struct PotentialOrder {
    cplx s;

    PotentialOrder(cplx order);
    PotentialOrder(double re, double im = 0.0) : PotentialOrder(cplx(re, im)) {}
};

/// theta in (0, 1) for the mixed potential J_x^{2 theta - 1} J_t^{-theta}.
struct MixedOrder {
    double theta;

    explicit MixedOrder(double value);
};

// The complex power uses the principal branch; the base 1 + |xi|^2 is real
// and >= 1 so the branch is unambiguous. J^0 returns its input unchanged.

GridFunction bessel_x(const GridFunction& f, PotentialOrder s);
GridFunction bessel_t(const GridFunction& f, PotentialOrder s);
/// J_x^{s_x} J_t^{s_t} in a single spectral pass.
GridFunction bessel_xt(const GridFunction& f, PotentialOrder s_x, PotentialOrder s_t);
GridFunction mixed_potential(const GridFunction& f, MixedOrder theta);

/// Applies J_x^{s_x} J_t^{s_t} to a frequency-domain function in place.
void bessel_spectral(GridFunction& spectrum, cplx s_x, cplx s_t);

/// Bessel kernel G^s on R^d at radius r, from its subordination integral over
/// delta in (0, inf), evaluated with step-halving trapezoid sums in log(delta)
/// to relative tolerance 1e-9. Independent of the spectral path.
///
/// Throws ConfigError for s <= 0, r < 0, d < 1, or r = 0 with s <= d (the
/// kernel diverges at the origin), and NumericalError if the quadrature fails
/// to converge.
double kernel_quadrature(double s, double r, int d);

/// ||G^s||_{L^q(R^d)} by radial quadrature of kernel_quadrature. Finite iff
/// s > d or q < d / (d - s). Throws ConfigError when the norm is infinite.
double kernel_lq_norm(double s, int d, double q);

struct ComplexOrderRow {
    double a;
    double b;
    double ratio;         // max over probes of ||J_x^{2a+2ib} phi||_q / ||phi||_q
    double growth;        // (1 + a + |b|)^{d+2}
    bool operator==(const ComplexOrderRow&) const = default;
};

struct ComplexOrderReport {
    double q = 2.0;
    int d = 1;
    std::vector<ComplexOrderRow> rows;
    double fitted_C = 0.0;     // smallest C with ratio <= C * growth for every row
    double worst_ratio = 0.0;  // largest raw ratio
    bool operator==(const ComplexOrderReport&) const = default;
};

/// Operator-norm growth of complex-order spatial potentials on a probe set.
ComplexOrderReport complex_order_bound_check(const std::vector<double>& a_values,
                                             const std::vector<double>& b_values,
                                             const std::vector<GridFunction>& probes, double q);

/// CSV with header `a,b,q,ratio,bound`, bound = fitted_C * growth.
void write_complex_order_csv(const ComplexOrderReport& report, const std::filesystem::path& path);

}  // namespace chronoreg
