#pragma once

#include "chronoreg/grid.hpp"
#include "chronoreg/verdict.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

namespace chronoreg {

/// 1/q_theta = (1 - theta)/q0 + theta/q1.
double q_theta(double theta, double q0, double q1);

struct InterpolationRow {
    double theta = 0.5;
    double q0 = 2.0;
    double q1 = 2.0;
    double q_theta = 2.0;
    double lhs = 0.0;   // ||J_x^{2 theta - 1} J_t^{-theta} f||_{q_theta}
    double rhs0 = 0.0;  // ||J_x^{-1} f||_{q0}
    double rhs1 = 0.0;  // ||J_x^{1} J_t^{-1} f||_{q1}
    double ratio = 0.0; // lhs / (rhs0^{1-theta} rhs1^theta)
    bool skipped = false;
};

/// One probe, one (theta, q0, q1). A zero probe is skipped (0/0).
InterpolationRow verify_interpolation(const GridFunction& f, double theta, double q0, double q1);

struct ExponentTriple {
    double theta;
    double q0;
    double q1;
};

struct InterpolationSuite {
    std::vector<InterpolationRow> rows;
    double c_suite = 0.0;  // max ratio over the suite
    Verdict verdict = Verdict::skipped;
};

/// Every probe against every triple. PASS when all ratios are finite and at
/// most c_suite; refinement stability of c_suite is judged by the caller.
InterpolationSuite interpolation_suite(const std::vector<GridFunction>& probes,
                                       const std::vector<ExponentTriple>& triples);

/// Samples of a function on the strip 0 <= Re z <= 1.
struct StripSample {
    double theta = 0.5;
    std::vector<double> a_grid;
    std::vector<double> b_grid;
    std::vector<std::vector<cplx>> H_values;  // [a index][b index]
    /// Per a: sup_b |H| after golden-section refinement of sampled local maxima.
    std::vector<double> refined_sup;
};

/// b in [-6, 6] with the given step; a grid 0, 0.1, ..., 1 with theta inserted.
std::vector<double> default_b_grid(double step = 0.05);
std::vector<double> default_a_grid(double theta);

/// Scales phi so that ||phi||_{L^r} = 1.
GridFunction normalize_in_lq(const GridFunction& phi, double r);

/// H(z) = sum <F(z), G(z)> dV with
///   F(z) = exp((z - theta)^2) J_x^{2z-1} J_t^{-z} f,
///   G(z) = |phi|^{(1-z) q' / q0' + z q' / q1'} conj(phi) / |phi|   (0 where phi = 0),
/// q' the conjugate of q_theta. phi must be normalized in L^{q'} to 1e-10.
StripSample sample_H(const GridFunction& f, const GridFunction& phi, double theta, double q0, double q1,
                     const std::vector<double>& a_grid, const std::vector<double>& b_grid);

/// Strip samples of an arbitrary holomorphic function, used for closed-form checks.
StripSample sample_strip(const std::function<cplx(cplx)>& H, double theta, const std::vector<double>& a_grid,
                         const std::vector<double>& b_grid);

struct ThreeLinesReport {
    std::vector<double> M;  // sup_b |H(a + ib)| per a
    double H_theta = 0.0;   // |H(theta)|
    double bound = 0.0;     // M_0^{1-theta} M_1^theta
    bool holds = false;     // H_theta <= bound (1 + 1e-6)
    bool log_convex = false;
    Verdict verdict = Verdict::skipped;
};

ThreeLinesReport three_lines_check(const StripSample& ss);

/// CSV with header `a,b,re_H,im_H`.
void write_strip_csv(const StripSample& ss, const std::filesystem::path& path);

}  // namespace chronoreg
