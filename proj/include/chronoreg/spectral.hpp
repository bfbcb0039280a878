#pragma once

#include "chronoreg/grid.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace chronoreg {

// Unitary DFT: F[k] = n^{-1/2} sum_j f[j] exp(-2 pi i j k / n) per axis, so the
// transform preserves the discrete l^2 norm and inverse(forward(f)) = f.

/// In-place unitary transform of `howmany` interleaved arrays of shape `dims`
/// (row-major, element stride = howmany, distance between arrays = 1).
void fft_inplace(std::span<cplx> data, std::span<const int> dims, int howmany, bool inverse);

GridFunction forward_transform(const GridFunction& f);
GridFunction inverse_transform(const GridFunction& f);

std::vector<cplx> forward_line(std::span<const cplx> line);
std::vector<cplx> inverse_line(std::span<const cplx> line);

/// Which frequency coordinates a symbol reads.
enum class AxisSet { time, space, both };

/// Fourier multiplier. The symbol receives only the coordinates named by
/// `axes`: (tau) for time, (xi_1..xi_d) for space, (tau, xi_1..xi_d) for both.
struct SpectralMultiplier {
    std::function<cplx(std::span<const double>)> symbol;
    AxisSet axes = AxisSet::space;
    int dims = 1;                 // number of coordinates the symbol reads
    int declared_smoothness = 0;  // derivatives available; Mihlin needs >= dims + 2
    std::optional<cplx> value_at_zero;

    cplx evaluate(std::span<const double> freq) const;
};

int axis_dims(AxisSet axes, int d);

/// F^{-1}(m F f), applied componentwise. Throws NumericalError naming the
/// frequency if the symbol is not finite at a sampled frequency.
GridFunction apply_multiplier(const GridFunction& f, const SpectralMultiplier& m);

/// Multiplies a frequency-domain function by the symbol in place.
void multiply_spectrum(GridFunction& spectrum, const SpectralMultiplier& m);

/// Multiplies a frequency-domain function in place by time_factor[k_t] * space_factor[k_x],
/// where k_x is the flat spatial frequency index.
void multiply_separable(GridFunction& spectrum, std::span<const cplx> time_factor,
                        std::span<const cplx> space_factor);

/// Continuous frequency vectors of the grid for each axis set, flattened.
std::vector<double> time_frequencies(const Grid& g);
/// |xi|^2 at each flat spatial frequency index.
std::vector<double> space_frequency_sq(const Grid& g);

/// max over multi-indices |alpha| <= order_cap of |xi|^|alpha| |d^alpha m(xi)| at one
/// frequency, with central finite differences.
double mihlin_pointwise(const SpectralMultiplier& m, std::span<const double> xi, int order_cap);

/// Sampled estimate of the Mihlin constant M over `freq_samples` log-spaced
/// frequencies with |xi| in [1e-3, 1e3]. A sampled maximum can only
/// underestimate the true supremum, so this is a lower estimate of M.
double mihlin_norm_estimate(const SpectralMultiplier& m, int order_cap, int freq_samples);

}  // namespace chronoreg
