#pragma once

#include "homog/grid.hpp"

#include <Eigen/Dense>

namespace homog {

// Direct solver for the 7-point Laplacian Delta_h u = r on a Grid3: real Fourier modes on the
// periodic axes and a tridiagonal sweep along a non-periodic y1 axis (u = 0 on the two ends).
// On the full torus the zero mode is dropped and u has mean zero.
class PoissonSolver {
public:
    explicit PoissonSolver(const Grid3& g);
    Vec solve(const Vec& r) const;

    // Per-slice transverse problem Delta_{y2,s} u = r on each y1 slice, zero mean per slice.
    Vec solve_transverse(const Vec& r) const;

private:
    Grid3 g_;
    Eigen::MatrixXd Q1_, Q2_, Q0_;
    Vec lam1_, lam2_, lam0_;
};

// Exact inverse of D_s + a11 (-D+D-)_1 + a22 (-D+D-)_2. On a cylinder the two end slices act as
// identity rows (zero Dirichlet data); on the torus the constant mode is dropped. Used as a
// preconditioner for variable-coefficient space-time operators: complex Fourier modes in s, real
// modes in y2, and either real modes or a tridiagonal sweep in y1.
class SpaceTimeFourierSolver {
public:
    SpaceTimeFourierSolver(const Grid3& g, double a11, double a22);
    Vec solve(const Vec& r) const;

private:
    Grid3 g_;
    double a11_, a22_;
    Eigen::MatrixXd Q0_, Q1_;
    Vec lam0_, lam1_;
    Eigen::MatrixXcd W_;  // unitary DFT columns in s
    Eigen::VectorXcd mu_;  // eigenvalues of the periodic backward difference
};

// Orthonormal real Fourier basis of the periodic second difference on n points with spacing h,
// and the eigenvalues of -D+D- for each column.
void periodic_modes(int n, double h, Eigen::MatrixXd& Q, Vec& lam);

}  // namespace homog
