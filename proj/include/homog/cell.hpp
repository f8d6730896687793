#pragma once

#include "homog/coeff.hpp"
#include "homog/solver.hpp"

#include <array>

namespace homog {

// Correctors chi_1, chi_2 on the torus and the effective tensor.
struct CellSolution {
    Grid3 grid;
    std::array<Vec, 2> chi;
    Mat2 Ahat = Mat2::Identity();
    double residual = 0.0;  // max relative residual over j
};

// Solves (D_s + L) chi_j = -L(y_j) on the torus as one periodic space-time system; j in {0, 1}.
Vec solve_cell_problem(const PeriodicCoefficientField& A, const Grid3& g, int j, double tol,
                       SolveStats* stats = nullptr);

// Relative residual of the discrete cell equation for a candidate chi_j.
double cell_residual(const PeriodicCoefficientField& A, const Grid3& g, int j, const Vec& chi);

// Torus average of A (e_j + grad chi_j) using the stencil face fluxes; column j holds that flux.
Mat2 effective_tensor(const PeriodicCoefficientField& A, const Grid3& g, const std::array<Vec, 2>& chi);

// Constant-coefficient space-time inverse built from the mean diagonal of A, used to precondition the
// torus and cylinder systems.
std::function<Vec(const Vec&)> fourier_preconditioner(const Sampler& A, const Grid3& g);

CellSolution solve_cells(const PeriodicCoefficientField& A, int ny, int ns, double tol);

}  // namespace homog
