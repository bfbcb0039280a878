#include "chronoreg/grid.hpp"

#include "chronoreg/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace chronoreg {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

Grid::Grid(int d, int n_t, int n_x, double L_t, double L_x, int N)
    : d_(d), n_t_(n_t), n_x_(n_x), L_t_(L_t), L_x_(L_x), N_(N), spatial_points_(1) {
    if (d < 1) throw ConfigError("grid: spatial dimension d must be >= 1");
    if (N < 1) throw ConfigError("grid: component count N must be >= 1");
    if (n_t < 4 || !is_power_of_two(n_t))
        throw ConfigError("grid: n_t must be a power of two >= 4, got " + std::to_string(n_t));
    if (n_x < 4 || !is_power_of_two(n_x))
        throw ConfigError("grid: n_x must be a power of two >= 4, got " + std::to_string(n_x));
    if (!(L_t > 0.0) || !(L_x > 0.0) || !std::isfinite(L_t) || !std::isfinite(L_x))
        throw ConfigError("grid: box lengths must be positive and finite");
    for (int k = 0; k < d; ++k) spatial_points_ *= static_cast<std::size_t>(n_x);
}

double Grid::cell_volume() const { return dt() * std::pow(dx(), d_); }

void Grid::spatial_index(std::size_t flat, std::span<int> out) const {
    for (int k = d_ - 1; k >= 0; --k) {
        out[k] = static_cast<int>(flat % n_x_);
        flat /= n_x_;
    }
}

void Grid::spatial_coords(std::size_t flat, std::span<double> out) const {
    for (int k = d_ - 1; k >= 0; --k) {
        out[k] = static_cast<double>(flat % n_x_) * dx();
        flat /= n_x_;
    }
}

std::size_t Grid::spatial_neighbor(std::size_t flat, int axis, int shift) const {
    std::size_t stride = 1;
    for (int k = d_ - 1; k > axis; --k) stride *= n_x_;
    const auto idx = static_cast<long>((flat / stride) % n_x_);
    const long moved = ((idx + shift) % n_x_ + n_x_) % n_x_;
    return flat + static_cast<std::size_t>(moved - idx) * stride;
}

double Grid::time_freq(int k) const {
    return 2.0 * std::numbers::pi * signed_index(k, n_t_) / L_t_;
}

double Grid::space_freq(int k) const {
    return 2.0 * std::numbers::pi * signed_index(k, n_x_) / L_x_;
}

GridFunction::GridFunction(const Grid& grid) : grid_(grid), values_(grid.size()) {}

GridFunction::GridFunction(const Grid& grid, std::vector<cplx> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw ConfigError("grid function: value count " + std::to_string(values_.size()) +
                          " does not match grid size " + std::to_string(grid_.size()));
    }
}

GridFunction GridFunction::sample(const Grid& grid, const Sampler& fn) {
    GridFunction out(grid);
    std::vector<double> x(grid.d());
    for (int it = 0; it < grid.n_t(); ++it) {
        const double t = grid.time_coord(it);
        for (std::size_t ix = 0; ix < grid.spatial_points(); ++ix) {
            grid.spatial_coords(ix, x);
            for (int c = 0; c < grid.N(); ++c) out.at(it, ix, c) = fn(t, x, c);
        }
    }
    return out;
}

std::vector<cplx> GridFunction::time_line(std::size_t ix, int comp) const {
    std::vector<cplx> line(grid_.n_t());
    for (int it = 0; it < grid_.n_t(); ++it) line[it] = at(it, ix, comp);
    return line;
}

void GridFunction::set_time_line(std::size_t ix, int comp, std::span<const cplx> line) {
    for (int it = 0; it < grid_.n_t(); ++it) at(it, ix, comp) = line[it];
}

bool GridFunction::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](const cplx& v) {
        return std::isfinite(v.real()) && std::isfinite(v.imag());
    });
}

void GridFunction::require_finite(const char* what) const {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i].real()) || !std::isfinite(values_[i].imag())) {
            std::ostringstream os;
            os << what << ": non-finite value at flat index " << i;
            throw NumericalError(os.str());
        }
    }
}

double GridFunction::max_imag() const {
    double m = 0.0;
    for (const auto& v : values_) m = std::max(m, std::abs(v.imag()));
    return m;
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
    if (!(grid_ == other.grid_)) throw ConfigError("grid function: grid mismatch in +=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
    if (!(grid_ == other.grid_)) throw ConfigError("grid function: grid mismatch in -=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

GridFunction& GridFunction::operator*=(cplx scale) {
    for (auto& v : values_) v *= scale;
    return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(cplx s, GridFunction a) { return a *= s; }

GridFunction multiply_scalar_field(const GridFunction& f, const GridFunction& scalar) {
    const Grid& g = f.grid();
    if (scalar.grid().N() != 1 || scalar.grid().nodes() != g.nodes())
        throw ConfigError("multiply_scalar_field: scalar field must have N = 1 on the same nodes");
    GridFunction out(f);
    auto v = out.values();
    auto s = scalar.values();
    const auto N = static_cast<std::size_t>(g.N());
    for (std::size_t node = 0; node < g.nodes(); ++node) {
        for (std::size_t c = 0; c < N; ++c) v[node * N + c] *= s[node];
    }
    return out;
}

namespace {

double node_modulus_sq(std::span<const cplx> v, std::size_t node, std::size_t N) {
    double s = 0.0;
    for (std::size_t c = 0; c < N; ++c) s += std::norm(v[node * N + c]);
    return s;
}

}  // namespace

double lq_norm(const GridFunction& f, double q) {
    const Grid& g = f.grid();
    const auto N = static_cast<std::size_t>(g.N());
    const auto v = f.values();
    if (std::isinf(q)) {
        double m = 0.0;
        for (std::size_t node = 0; node < g.nodes(); ++node)
            m = std::max(m, node_modulus_sq(v, node, N));
        return std::sqrt(m);
    }
    if (!(q >= 1.0)) throw ConfigError("lq_norm: exponent must be >= 1");
    double s = 0.0;
    for (std::size_t node = 0; node < g.nodes(); ++node)
        s += std::pow(node_modulus_sq(v, node, N), 0.5 * q);
    return std::pow(s * g.cell_volume(), 1.0 / q);
}

cplx pairing(const GridFunction& f, const GridFunction& g) {
    if (!(f.grid() == g.grid())) throw ConfigError("pairing: grid mismatch");
    cplx s = 0.0;
    const auto a = f.values();
    const auto b = g.values();
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * f.grid().cell_volume();
}

cplx inner(const GridFunction& f, const GridFunction& g) {
    if (!(f.grid() == g.grid())) throw ConfigError("inner: grid mismatch");
    cplx s = 0.0;
    const auto a = f.values();
    const auto b = g.values();
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s * f.grid().cell_volume();
}

std::vector<double> cell_weights(const Interval& iv, int n, double L) {
    if (!(iv.hi >= iv.lo)) throw ConfigError("cell_weights: interval with hi < lo");
    if (iv.length() > L * (1.0 + 1e-12)) throw ConfigError("cell_weights: interval longer than the box");
    const double h = L / n;
    std::vector<double> w(n, 0.0);
    for (int k = 0; k < n; ++k) {
        const double c = k * h;
        double covered = 0.0;
        for (int image = -1; image <= 1; ++image) {
            const double lo = std::max(c - 0.5 * h, iv.lo + image * L);
            const double hi = std::min(c + 0.5 * h, iv.hi + image * L);
            if (hi > lo) covered += hi - lo;
        }
        w[k] = std::min(1.0, covered / h);
    }
    return w;
}

double restricted_lq_norm(const GridFunction& f, double q, const Interval& I, const Interval& Q) {
    const Grid& g = f.grid();
    const auto wt = cell_weights(I, g.n_t(), g.L_t());
    const auto wx = cell_weights(Q, g.n_x(), g.L_x());
    const auto N = static_cast<std::size_t>(g.N());
    const auto v = f.values();
    std::vector<int> idx(g.d());
    const bool sup = std::isinf(q);
    double acc = 0.0;
    for (int it = 0; it < g.n_t(); ++it) {
        if (wt[it] == 0.0) continue;
        for (std::size_t ix = 0; ix < g.spatial_points(); ++ix) {
            g.spatial_index(ix, idx);
            double w = wt[it];
            for (int k = 0; k < g.d() && w > 0.0; ++k) w *= wx[idx[k]];
            if (w == 0.0) continue;
            const double m2 = node_modulus_sq(v, it * g.spatial_points() + ix, N);
            if (sup) {
                acc = std::max(acc, std::sqrt(m2));
            } else {
                acc += w * std::pow(m2, 0.5 * q);
            }
        }
    }
    if (sup) return acc;
    return std::pow(acc * g.cell_volume(), 1.0 / q);
}

}  // namespace chronoreg
