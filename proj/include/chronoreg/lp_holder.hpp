#pragma once

#include "chronoreg/grid.hpp"
#include "chronoreg/verdict.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace chronoreg {

/// Dyadic partition in the time frequency tau (angular, 2 pi k / L_t).
///
/// beta is a C-infinity step equal to 1 on [0, 1] and 0 on [2, inf);
/// psi(tau) = beta(|tau|/2) - beta(|tau|) is supported in [1, 4] and
/// psi_j(tau) = psi(2^-j tau). Telescoping gives
///   sum_{j=j_min}^{j_max} psi_j(tau) = beta(2^{-j_max-1}|tau|) - beta(2^{-j_min}|tau|),
/// which is 1 on 2^{j_min+1} <= |tau| <= 2^{j_max+1}. The range is chosen so
/// that band contains every nonzero grid frequency; the low-frequency
/// remainder beta(2^{-j_min}|tau|) then only sees tau = 0.
struct DyadicPartition {
    int j_min = 0;
    int j_max = 0;
    int n_t = 0;
    double L_t = 0.0;

    double psi(double tau) const;
    double psi_j(int j, double tau) const;
    double remainder(double tau) const;
    double band_lo() const;
    double band_hi() const;
    double dt() const { return L_t / n_t; }
};

double dyadic_beta(double s);

DyadicPartition build_partition(const Grid& g);
DyadicPartition build_partition(int n_t, double L_t);

/// F_t^{-1}(psi_j F_t f) on one time line.
std::vector<cplx> lp_block(std::span<const cplx> line, int j, const DyadicPartition& dp);
/// Same multiplier on every time line of a field.
GridFunction lp_block(const GridFunction& f, int j, const DyadicPartition& dp);
/// F_t^{-1}(beta(2^{-j_min}|tau|) F_t f).
std::vector<cplx> lp_remainder(std::span<const cplx> line, const DyadicPartition& dp);

struct HolderEstimate {
    double alpha = 0.5;
    double lp_value = 0.0;
    double direct_value = 0.0;
    std::size_t pairs_examined = 0;
    bool operator==(const HolderEstimate&) const = default;
};

/// sup_j 2^{j alpha} max|block_j| over j_min..j_max, plus the remainder term
/// max|R(t_{i+1}) - R(t_i)| / dt * span^{1 - alpha} with span = (n_t - 1) dt.
double holder_lp(std::span<const cplx> line, double alpha, const DyadicPartition& dp);

/// Max over all grid pairs of |f(t) - f(s)| / |t - s|^alpha with the
/// non-periodic distance |i - k| dt.
double holder_direct(std::span<const cplx> line, double alpha, double dt);

HolderEstimate holder_estimate(std::span<const cplx> line, double alpha, const DyadicPartition& dp);

struct BernsteinRow {
    int j = 0;
    double q = 2.0;
    double ratio = 0.0;  // ||block||_inf / (2^{j/q} ||block||_q)
    bool skipped = false;  // empty block (0/0)
    bool operator==(const BernsteinRow&) const = default;
};

BernsteinRow bernstein_ratio(std::span<const cplx> line, int j, double q, const DyadicPartition& dp);

struct BernsteinReport {
    std::vector<BernsteinRow> rows;
    double fitted_c = 0.0;   // constant fitted on the lower half of the scales
    double max_ratio = 0.0;
    Verdict verdict = Verdict::skipped;
};

/// Runs bernstein_ratio on every (probe, j) pair. The constant is fitted on the
/// scales j below the median scale; PASS when every ratio, including the finer
/// scales, is at most twice that constant.
BernsteinReport bernstein_check(const std::vector<std::vector<cplx>>& probes, const std::vector<int>& js,
                                double q, const DyadicPartition& dp);

struct SupBound {
    double sup = 0.0;
    double bound = 0.0;  // ||G_t^{1/2}||_{L^{q'}} ||J_t^{-1/2} f||_{L^q}
    bool holds = true;
};

/// Right-hand side of the kernel sup bound on one line; requires q > 2 so that
/// G^{1/2} lies in L^{q'}(R).
SupBound sup_bound_via_kernel(std::span<const cplx> line, double q, double dt);

struct LineHolderRow {
    std::size_t x_index = 0;
    double lp_value = 0.0;
    double direct_value = 0.0;
    bool operator==(const LineHolderRow&) const = default;
};

/// CSV with header `x_index,lp_value,direct_value`.
void write_line_holder_csv(const std::vector<LineHolderRow>& rows, const std::filesystem::path& path);

}  // namespace chronoreg
