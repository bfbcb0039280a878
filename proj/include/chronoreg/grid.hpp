#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace chronoreg {

using cplx = std::complex<double>;

/// Periodic space-time box [0, L_t) x [0, L_x)^d sampled on a uniform grid,
/// carrying N system components per node.
///
/// Frequency convention (used everywhere): index k on an axis of n samples and
/// length L is mapped to the signed index k' in [-n/2, n/2) and to the
/// continuous frequency 2*pi*k'/L.
class Grid {
public:
    Grid(int d, int n_t, int n_x, double L_t, double L_x, int N = 1);

    int d() const { return d_; }
    int n_t() const { return n_t_; }
    int n_x() const { return n_x_; }
    double L_t() const { return L_t_; }
    double L_x() const { return L_x_; }
    int N() const { return N_; }

    double dt() const { return L_t_ / n_t_; }
    double dx() const { return L_x_ / n_x_; }
    double cell_volume() const;

    std::size_t spatial_points() const { return spatial_points_; }
    std::size_t nodes() const { return spatial_points_ * static_cast<std::size_t>(n_t_); }
    std::size_t size() const { return nodes() * static_cast<std::size_t>(N_); }

    double time_coord(int it) const { return it * dt(); }
    double space_coord(int ix) const { return ix * dx(); }

    /// Multi-index (x_1 slowest) of a flat spatial index.
    void spatial_index(std::size_t flat, std::span<int> out) const;
    void spatial_coords(std::size_t flat, std::span<double> out) const;
    /// Flat index of the spatial neighbour shifted by `shift` along `axis` (periodic).
    std::size_t spatial_neighbor(std::size_t flat, int axis, int shift) const;

    static int signed_index(int k, int n) { return k < n / 2 ? k : k - n; }
    double time_freq(int k) const;
    double space_freq(int k) const;

    bool operator==(const Grid&) const = default;

private:
    int d_;
    int n_t_;
    int n_x_;
    double L_t_;
    double L_x_;
    int N_;
    std::size_t spatial_points_;
};

/// Complex N-vector samples on a Grid, layout (t, x_1..x_d, component) with the
/// component index fastest.
class GridFunction {
public:
    explicit GridFunction(const Grid& grid);
    GridFunction(const Grid& grid, std::vector<cplx> values);

    using Sampler = std::function<cplx(double t, std::span<const double> x, int comp)>;
    static GridFunction sample(const Grid& grid, const Sampler& fn);

    const Grid& grid() const { return grid_; }
    std::span<cplx> values() { return values_; }
    std::span<const cplx> values() const { return values_; }

    std::size_t index(int it, std::size_t ix, int comp) const {
        return (static_cast<std::size_t>(it) * grid_.spatial_points() + ix) * grid_.N() + comp;
    }
    cplx& at(int it, std::size_t ix, int comp) { return values_[index(it, ix, comp)]; }
    const cplx& at(int it, std::size_t ix, int comp) const { return values_[index(it, ix, comp)]; }

    /// Time line through spatial node ix for one component.
    std::vector<cplx> time_line(std::size_t ix, int comp) const;
    void set_time_line(std::size_t ix, int comp, std::span<const cplx> line);

    /// Throws NumericalError naming the first non-finite entry.
    void require_finite(const char* what) const;
    bool all_finite() const;
    double max_imag() const;

    GridFunction& operator+=(const GridFunction& other);
    GridFunction& operator-=(const GridFunction& other);
    GridFunction& operator*=(cplx scale);

    bool operator==(const GridFunction&) const = default;

private:
    Grid grid_;
    std::vector<cplx> values_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(cplx s, GridFunction a);

/// Pointwise product with a scalar (single-component) field.
GridFunction multiply_scalar_field(const GridFunction& f, const GridFunction& scalar);

/// Discrete L^q norm over the whole box: (sum |f|^q * cell volume)^(1/q), where
/// |f| is the Euclidean norm over components. q = infinity gives the max.
double lq_norm(const GridFunction& f, double q);

/// Bilinear pairing sum_nodes sum_i f_i g_i * cell volume.
cplx pairing(const GridFunction& f, const GridFunction& g);
/// L^2 inner product sum conj(f_i) g_i * cell volume.
cplx inner(const GridFunction& f, const GridFunction& g);

/// Closed interval [lo, hi] on one axis.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
    bool contains(double v) const { return v >= lo && v <= hi; }
    bool operator==(const Interval&) const = default;
};

/// Fraction of each grid cell [x_k - h/2, x_k + h/2] covered by the interval,
/// counting periodic images. Node-aligned endpoints give trapezoid weights.
std::vector<double> cell_weights(const Interval& iv, int n, double L);

/// Weighted L^q norm restricted to the box I x Q^d using cell_weights.
double restricted_lq_norm(const GridFunction& f, double q, const Interval& I, const Interval& Q);

}  // namespace chronoreg
