#pragma once

#include <Eigen/Core>
#include <Eigen/LU>
#include <array>
#include <cstdint>

namespace homog {

template <typename Scalar>
using VecT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat2T = Eigen::Matrix<Scalar, 2, 2>;
template <typename Scalar>
using Vec2T = Eigen::Matrix<Scalar, 2, 1>;

using Vec = VecT<double>;
using Mat2 = Mat2T<double>;
using Vec2 = Vec2T<double>;
using Index = Eigen::Index;

// One grid direction. Coordinates are (i - zero) * h so that node `zero` sits exactly at 0.
struct Axis {
    int n = 0;
    double h = 0.0;
    int zero = 0;
    bool periodic = true;

    double coord(int i) const { return (i - zero) * h; }
    double coord(double i) const { return (i - zero) * h; }
    int wrap(int i) const {
        int r = i % n;
        return r < 0 ? r + n : r;
    }
};

// Three-axis lattice (y1, y2, s). Storage is axial-major: y1 slowest, s fastest.
struct Grid3 {
    std::array<Axis, 3> ax;

    Index size() const { return Index(ax[0].n) * ax[1].n * ax[2].n; }
    Index idx(int i, int k, int m) const { return (Index(i) * ax[1].n + k) * ax[2].n + m; }
    double h() const { return ax[0].h; }
    double tau() const { return ax[2].h; }
    double cell_volume() const { return ax[0].h * ax[1].h * ax[2].h; }
};

// Unit space-time torus with ny nodes per space axis and ns time nodes.
Grid3 torus_grid(int ny, int ns);

// Truncated cylinder (-R,R) x T x T. Requires R * ny to be an integer.
Grid3 cylinder_grid(double R, int ny, int ns);

inline bool is_cylinder(const Grid3& g) { return !g.ax[0].periodic; }

// Square box [lo, lo + (n-1) h]^2 with nt backward-Euler steps of size tau.
struct BoxGrid {
    int n = 0;
    double h = 0.0;
    double lo = 0.0;
    int nt = 0;
    double tau = 0.0;

    double x(int i) const { return lo + i * h; }
    Index idx(int i, int k) const { return Index(i) * n + k; }
    Index size() const { return Index(n) * n; }
    double T() const { return nt * tau; }
};

// Box centred at the origin with half-width L, so that x1 = 0 is a node row.
BoxGrid centred_box(double L, double h, double T, double tau);

}  // namespace homog
