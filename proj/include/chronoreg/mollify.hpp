#pragma once

#include "chronoreg/exponents.hpp"
#include "chronoreg/grid.hpp"
#include "chronoreg/verdict.hpp"

#include <json.hpp>

#include <vector>

namespace chronoreg {

/// Nested time intervals I'' c I' c I and spatial cubes Q'' c Q' c Q (each cube
/// is the same interval on every axis).
struct NestedDomains {
    Interval I, I_prime, I_dprime;
    Interval Q, Q_prime, Q_dprime;

    /// Smallest gap between I'' and the ends of I' (resp. Q'' and Q').
    double time_margin() const;
    double space_margin() const;

    /// Throws ConfigError unless every inclusion is strict with positive margins
    /// and I' x Q' stays at least L/8 away from the box edges on every axis.
    void validate(const Grid& g) const;

    bool operator==(const NestedDomains&) const = default;
};

nlohmann::json to_json(const NestedDomains& nd);
NestedDomains nested_domains_from_json(const nlohmann::json& j);

/// Default layout: I = [L/16, 15L/16], I' = [L/8, 7L/8], I'' = [L/4, 3L/4], same in x.
NestedDomains default_domains(const Grid& g);

/// exp(-1/(1 - |z|^2)) for |z| < 1, 0 otherwise (unnormalized).
double mollifier_profile(double z_sq);

/// Periodic convolution with the profile scaled to radius eps in (t, x),
/// sampled on the grid and divided by its discrete sum, so constants are kept
/// and the operator is self-adjoint for the bilinear pairing.
///
/// Warns when eps < 2 max(dt, dx). Throws ConfigError when eps <= 0 or eps
/// exceeds the padding margin min(L_t, L_x)/8.
GridFunction mollify(const GridFunction& g, double eps);

struct Cutoff {
    GridFunction chi;  // scalar, real, values in [0, 1]
    NestedDomains domains;
};

/// Tensor product of C-infinity transitions: 1 on I'' x Q'', 0 outside I' x Q'.
Cutoff build_cutoff(const Grid& g, const NestedDomains& nd);

/// Largest forward-difference slope of chi along any axis.
double cutoff_max_gradient(const Cutoff& c);

struct AprioriRow {
    double eps = 0.0;
    double potential_norm = 0.0;  // ||J_x^{-1} v_eps||_{L^{p+delta}}
    double mixed_norm = 0.0;      // ||J_t^{-1} J_x^{1} v_eps||_{L^{p'}}
    bool operator==(const AprioriRow&) const = default;
};

struct AprioriReport {
    std::vector<AprioriRow> rows;
    double potential_median = 0.0;
    double mixed_median = 0.0;
    Verdict verdict = Verdict::skipped;
    ExponentSet exponents{1, 2.0, 1.0};
    bool operator==(const AprioriReport&) const = default;
};

/// Evaluates both a-priori norms of v_eps = (chi u)_eps for each eps in the
/// (strictly decreasing) list. PASS when, for each norm, the max over the two
/// smallest eps is at most 1.1 times the median over all eps.
AprioriReport apriori_bounds_check(const GridFunction& u, const Cutoff& chi,
                                   const std::vector<double>& eps_list, const ExponentSet& exps);

nlohmann::json to_json(const AprioriReport& r);
AprioriReport apriori_report_from_json(const nlohmann::json& j);

}  // namespace chronoreg
