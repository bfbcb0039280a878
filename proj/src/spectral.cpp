#include "chronoreg/spectral.hpp"

#include "chronoreg/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>

namespace chronoreg {

namespace {

std::mutex g_plan_mutex;

std::string describe_freq(std::span<const double> freq) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < freq.size(); ++i) os << (i ? ", " : "") << freq[i];
    os << ")";
    return os.str();
}

}  // namespace

void fft_inplace(std::span<cplx> data, std::span<const int> dims, int howmany, bool inverse) {
    std::size_t total = 1;
    for (int n : dims) total *= static_cast<std::size_t>(n);
    if (data.size() != total * static_cast<std::size_t>(howmany))
        throw ConfigError("fft_inplace: data size does not match dims * howmany");
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        // FFTW planning is not thread-safe; execution is.
        std::lock_guard lock(g_plan_mutex);
        // FFTW_UNALIGNED pins the codelet choice independent of allocation
        // alignment, which keeps results bitwise reproducible across runs.
        plan = fftw_plan_many_dft(static_cast<int>(dims.size()), dims.data(), howmany, buf, nullptr,
                                  howmany, 1, buf, nullptr, howmany, 1,
                                  inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                                  FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    if (plan == nullptr) throw NumericalError("fft_inplace: FFTW failed to create a plan");
    fftw_execute(plan);
    {
        std::lock_guard lock(g_plan_mutex);
        fftw_destroy_plan(plan);
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(total));
    for (auto& v : data) v *= scale;
}

namespace {

GridFunction transform(const GridFunction& f, bool inverse) {
    const Grid& g = f.grid();
    std::vector<int> dims{g.n_t()};
    for (int k = 0; k < g.d(); ++k) dims.push_back(g.n_x());
    GridFunction out(f);
    fft_inplace(out.values(), dims, g.N(), inverse);
    return out;
}

std::vector<cplx> transform_line(std::span<const cplx> line, bool inverse) {
    std::vector<cplx> out(line.begin(), line.end());
    const int n = static_cast<int>(out.size());
    fft_inplace(out, std::span<const int>(&n, 1), 1, inverse);
    return out;
}

}  // namespace

GridFunction forward_transform(const GridFunction& f) { return transform(f, false); }
GridFunction inverse_transform(const GridFunction& f) { return transform(f, true); }

std::vector<cplx> forward_line(std::span<const cplx> line) { return transform_line(line, false); }
std::vector<cplx> inverse_line(std::span<const cplx> line) { return transform_line(line, true); }

cplx SpectralMultiplier::evaluate(std::span<const double> freq) const {
    if (value_at_zero && std::all_of(freq.begin(), freq.end(), [](double v) { return v == 0.0; }))
        return *value_at_zero;
    const cplx v = symbol(freq);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw NumericalError("multiplier symbol is not finite at frequency " + describe_freq(freq));
    return v;
}

int axis_dims(AxisSet axes, int d) {
    switch (axes) {
        case AxisSet::time: return 1;
        case AxisSet::space: return d;
        case AxisSet::both: return d + 1;
    }
    return 0;
}

std::vector<double> time_frequencies(const Grid& g) {
    std::vector<double> tau(g.n_t());
    for (int k = 0; k < g.n_t(); ++k) tau[k] = g.time_freq(k);
    return tau;
}

std::vector<double> space_frequency_sq(const Grid& g) {
    std::vector<double> out(g.spatial_points());
    std::vector<int> idx(g.d());
    for (std::size_t ix = 0; ix < g.spatial_points(); ++ix) {
        g.spatial_index(ix, idx);
        double s = 0.0;
        for (int k = 0; k < g.d(); ++k) {
            const double xi = g.space_freq(idx[k]);
            s += xi * xi;
        }
        out[ix] = s;
    }
    return out;
}

void multiply_separable(GridFunction& spectrum, std::span<const cplx> time_factor,
                        std::span<const cplx> space_factor) {
    const Grid& g = spectrum.grid();
    if (time_factor.size() != static_cast<std::size_t>(g.n_t()) ||
        space_factor.size() != g.spatial_points())
        throw ConfigError("multiply_separable: factor sizes do not match the grid");
    auto v = spectrum.values();
    const auto N = static_cast<std::size_t>(g.N());
    for (int it = 0; it < g.n_t(); ++it) {
        for (std::size_t ix = 0; ix < g.spatial_points(); ++ix) {
            const cplx m = time_factor[it] * space_factor[ix];
            const std::size_t base = (static_cast<std::size_t>(it) * g.spatial_points() + ix) * N;
            for (std::size_t c = 0; c < N; ++c) v[base + c] *= m;
        }
    }
}

void multiply_spectrum(GridFunction& spectrum, const SpectralMultiplier& m) {
    const Grid& g = spectrum.grid();
    const int dims = axis_dims(m.axes, g.d());
    if (m.dims != dims) {
        throw ConfigError("apply_multiplier: symbol reads " + std::to_string(m.dims) +
                          " coordinates but the axis set needs " + std::to_string(dims));
    }
    std::vector<int> idx(g.d());
    std::vector<double> freq(dims);
    if (m.axes == AxisSet::time) {
        std::vector<cplx> tf(g.n_t());
        for (int k = 0; k < g.n_t(); ++k) {
            freq[0] = g.time_freq(k);
            tf[k] = m.evaluate(freq);
        }
        multiply_separable(spectrum, tf, std::vector<cplx>(g.spatial_points(), 1.0));
        return;
    }
    if (m.axes == AxisSet::space) {
        std::vector<cplx> sf(g.spatial_points());
        for (std::size_t ix = 0; ix < g.spatial_points(); ++ix) {
            g.spatial_index(ix, idx);
            for (int k = 0; k < g.d(); ++k) freq[k] = g.space_freq(idx[k]);
            sf[ix] = m.evaluate(freq);
        }
        multiply_separable(spectrum, std::vector<cplx>(g.n_t(), 1.0), sf);
        return;
    }
    auto v = spectrum.values();
    const auto N = static_cast<std::size_t>(g.N());
    for (int it = 0; it < g.n_t(); ++it) {
        freq[0] = g.time_freq(it);
        for (std::size_t ix = 0; ix < g.spatial_points(); ++ix) {
            g.spatial_index(ix, idx);
            for (int k = 0; k < g.d(); ++k) freq[k + 1] = g.space_freq(idx[k]);
            const cplx s = m.evaluate(freq);
            const std::size_t base = (static_cast<std::size_t>(it) * g.spatial_points() + ix) * N;
            for (std::size_t c = 0; c < N; ++c) v[base + c] *= s;
        }
    }
}

GridFunction apply_multiplier(const GridFunction& f, const SpectralMultiplier& m) {
    GridFunction spec = forward_transform(f);
    multiply_spectrum(spec, m);
    return inverse_transform(spec);
}

namespace {

void enumerate_multi_indices(int dims, int cap, std::vector<int>& current, int pos,
                             std::vector<std::vector<int>>& out) {
    if (pos == dims) {
        out.push_back(current);
        return;
    }
    int used = 0;
    for (int i = 0; i < pos; ++i) used += current[i];
    for (int a = 0; a + used <= cap; ++a) {
        current[pos] = a;
        enumerate_multi_indices(dims, cap, current, pos + 1, out);
    }
    current[pos] = 0;
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Relative step for a derivative of total order k: balances the O(h^2)
// truncation error against the eps/h^k rounding error of the k-th difference.
double relative_step(int order) {
    const double eps = std::numeric_limits<double>::epsilon();
    return std::max(1e-4, std::pow(eps, 1.0 / (order + 2)));
}

cplx mixed_central_difference(const SpectralMultiplier& m, std::span<const double> xi,
                              const std::vector<int>& alpha, double h) {
    const int dims = static_cast<int>(xi.size());
    std::vector<int> j(dims, 0);
    std::vector<double> point(dims);
    cplx acc = 0.0;
    while (true) {
        double coeff = 1.0;
        for (int i = 0; i < dims; ++i) {
            coeff *= ((j[i] % 2) ? -1.0 : 1.0) * binomial(alpha[i], j[i]);
            point[i] = xi[i] + (0.5 * alpha[i] - j[i]) * h;
        }
        acc += coeff * m.evaluate(point);
        int i = 0;
        while (i < dims && ++j[i] > alpha[i]) j[i++] = 0;
        if (i == dims) break;
    }
    int order = 0;
    for (int a : alpha) order += a;
    return acc / std::pow(h, order);
}

}  // namespace

double mihlin_pointwise(const SpectralMultiplier& m, std::span<const double> xi, int order_cap) {
    if (order_cap < 0) throw ConfigError("mihlin: order cap must be >= 0");
    if (static_cast<int>(xi.size()) != m.dims) throw ConfigError("mihlin: frequency dimension mismatch");
    double r = 0.0;
    for (double v : xi) r += v * v;
    r = std::sqrt(r);
    if (r == 0.0) throw ConfigError("mihlin: frequency must be nonzero");
    std::vector<std::vector<int>> alphas;
    std::vector<int> current(m.dims, 0);
    enumerate_multi_indices(m.dims, order_cap, current, 0, alphas);
    double best = 0.0;
    for (const auto& alpha : alphas) {
        int order = 0;
        for (int a : alpha) order += a;
        double value;
        if (order == 0) {
            value = std::abs(m.evaluate(xi));
        } else {
            const double h = relative_step(order) * r;
            value = std::pow(r, order) * std::abs(mixed_central_difference(m, xi, alpha, h));
        }
        best = std::max(best, value);
    }
    return best;
}

double mihlin_norm_estimate(const SpectralMultiplier& m, int order_cap, int freq_samples) {
    if (order_cap < 1) throw ConfigError("mihlin_norm_estimate: order_cap must be >= 1");
    if (freq_samples < 64) throw ConfigError("mihlin_norm_estimate: freq_samples must be >= 64");
    std::mt19937_64 rng(0x5eedULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> xi(m.dims);
    double best = 0.0;
    for (int s = 0; s < freq_samples; ++s) {
        const double radius = std::pow(10.0, -3.0 + 6.0 * s / (freq_samples - 1));
        if (m.dims == 1) {
            xi[0] = (s % 2 == 0) ? radius : -radius;
        } else {
            double norm = 0.0;
            for (auto& v : xi) {
                v = normal(rng);
                norm += v * v;
            }
            norm = std::sqrt(norm);
            for (auto& v : xi) v *= radius / norm;
        }
        best = std::max(best, mihlin_pointwise(m, xi, order_cap));
    }
    return best;
}

}  // namespace chronoreg
