#pragma once

#include "chronoreg/exponents.hpp"
#include "chronoreg/grid.hpp"
#include "chronoreg/mollify.hpp"
#include "chronoreg/verdict.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace chronoreg {

// Gradient layout: V[i * d + k] = d u_i / d x_k, so column i (the argument of
// A_i) is the contiguous slice V[i * d .. i * d + d).
using FluxFn = std::function<void(double t, std::span<const double> x, std::span<const double> V,
                                  std::span<double> out)>;
using ScalarFn = std::function<double(double t, std::span<const double> x)>;
using StiffnessFn = std::function<double(double t, std::span<const double> x, std::span<const double> V)>;

/// Right-hand side data of du/dt = div(A + F) + B + f.
struct Forcing {
    FluxFn F;  // (t, x) -> d x N, V is ignored
    FluxFn f;  // (t, x) -> N, V is ignored
};

/// Parabolic system du_i/dt = div A_i(t, x, grad u) + B_i(t, x, grad u) with
/// growth |A_i| <= c1 |V|^{p-1} + h1, |B_i| <= c2 |V|^{p-1} + h2 and
/// coercivity sum_i <A_i, V_i> >= c3 |V|^p - h3.
struct StructureSpec {
    std::string name;
    int d = 1;
    int N = 1;
    double p = 2.0;
    FluxFn A;
    FluxFn B;                  // empty means B = 0
    StiffnessFn stiffness;     // scalar kappa ~ dA/dV: implicit part of each Picard step and CFL bound
    double c1 = 1.0, c2 = 1.0, c3 = 1.0;
    ScalarFn h1, h2, h3;       // empty means 0
    std::optional<Forcing> forcing;
    double epsilon_reg = 1e-8;
    bool linear = false;       // A = kappa V with kappa independent of V, B = 0

    /// Spot-checks growth and coercivity at `samples` random (t, x, V) points in
    /// the box [0, L_t] x [0, L_x]^d. Throws ConfigError naming the first violation.
    void validate(double L_t, double L_x, int samples = 10000, std::uint64_t seed = 7) const;
};

/// Preset names: heat, p-laplace-1.5, p-laplace-3, p-laplace-4, rough-linear.
StructureSpec make_preset(const std::string& name, int d, int N = 1, double epsilon_reg = 1e-8);
std::vector<std::string> preset_names();

/// || (|h1| + |h2|)^{p'} + |h3| ||_{L^q_hat(I x Q)} on the grid.
double structure_c4(const StructureSpec& spec, const Grid& g, const Interval& I, const Interval& Q, double q_hat);

enum class Scheme { semi_implicit, explicit_euler };

struct SolveConfig {
    Grid grid{1, 64, 64, 1.0, 1.0};
    double time_step = 1e-3;
    Scheme scheme = Scheme::semi_implicit;
    double cfl_safety = 0.9;
    int max_picard = 50;
    double picard_tol = 1e-10;
    double cg_tol = 1e-13;
};

struct SolveResult {
    GridFunction field;              // rows t_i = i L_t / n_t, row 0 = u0
    int steps = 0;                   // substeps taken
    double step_size = 0.0;          // actual substep, L_t / n_t / steps_per_row
    int max_picard_used = 0;
    double max_mass_drift = 0.0;     // max over steps and components of |mass change|
    double max_energy_increase = 0.0;  // max over steps of ||u^{n+1}||_2 - ||u^n||_2 (<= 0 when dissipative)
};

/// Time-marches from the t = 0 slice of u0 (other slices are ignored). The
/// spatial operator is div_- A(t, x, grad_+ u), with grad_+ the periodic forward
/// difference and div_- minus its adjoint, so the scheme is conservative.
///
/// Semi-implicit: backward Euler with Picard iteration. Each iterate freezes
/// kappa = stiffness(grad w) and solves
///   (I - dt div_-(kappa grad_+)) u = u_n + dt [div_-(A(grad w) - kappa grad_+ w) + B(grad w) + forcing]
/// by Jacobi-preconditioned conjugate gradients.
///
/// Throws ConfigError for a non-finite or complex u0, a CFL violation of the
/// explicit scheme, or an invalid spec; NumericalError naming the step on
/// Picard non-convergence or blow-up.
SolveResult solve(const StructureSpec& spec, const GridFunction& u0, const SolveConfig& cfg);

/// u0(x) sampled on every time slice of the grid.
GridFunction initial_condition(const Grid& g, const std::function<double(std::span<const double> x, int comp)>& fn);

/// Forward-difference gradient magnitude |grad_+ u| on every node (scalar field).
GridFunction gradient_magnitude(const GridFunction& u);

/// Smooth bumps compactly supported in the interior of I x Q^d.
std::vector<GridFunction> bump_test_functions(const Grid& g, const Interval& I, const Interval& Q, int count,
                                              std::uint64_t seed);

/// max over test functions of |sum (-u dphi/dt + <A(grad u) + F, grad phi> - (B + f) phi) dV|
/// / ||phi||_{L^p(W^{1,p})}, with centered differences in t and forward differences in x.
double weak_residual(const GridFunction& u, const StructureSpec& spec, const std::vector<GridFunction>& tests);

/// sup_{t in I'} ||u(t)||_{L^2(Q')} / (||u||_{L^2(I x Q)} + ||u||_{L^p(I; W^{1,p}(Q))}); nullopt for 0/0.
std::optional<double> caccioppoli_ratio(const GridFunction& u, double p, const NestedDomains& nd);

struct CaccioppoliReport {
    std::vector<std::optional<double>> ratios;  // per ladder level
    double spread = 0.0;                        // max/min - 1
    Verdict verdict = Verdict::skipped;
};

/// PASS when every level's ratio lies within 20% of the finest level's ratio.
CaccioppoliReport caccioppoli_check(const std::vector<GridFunction>& ladder, const ExponentSet& exps,
                                    const NestedDomains& nd);

struct IntegrabilityScan {
    std::vector<double> delta_grid;
    std::vector<std::vector<double>> norms;  // [delta][level] ||grad u||_{L^{p+delta}(I' x Q')}
    std::vector<bool> qualifies;
    double measured_delta = 0.0;
};

/// A delta qualifies when the norm grows by less than 15% between every pair
/// of consecutive ladder levels; measured_delta is the largest delta of the
/// qualifying prefix of the ascending grid (0 with a warning if empty).
/// Throws ConfigError for fewer than 3 levels.
IntegrabilityScan higher_integrability_scan(const std::vector<GridFunction>& ladder, double p,
                                            const NestedDomains& nd, const std::vector<double>& delta_grid);

nlohmann::json to_json(const IntegrabilityScan& s);

}  // namespace chronoreg
