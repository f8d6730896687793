#include "homog/cell.hpp"

#include "homog/poisson.hpp"
#include "homog/stencil.hpp"

#include <memory>

#include <stdexcept>

namespace homog {

namespace {

Vec cell_rhs(const PeriodicCoefficientField& A, const Grid3& g, int j) {
    return flux_divergence(g, face_fluxes(g, A.A, Vec::Zero(g.size()), Vec2::Unit(j)));
}

}  // namespace

std::function<Vec(const Vec&)> fourier_preconditioner(const Sampler& A, const Grid3& g) {
    double a11 = 0.0, a22 = 0.0;
    long count = 0;
    const int n0 = std::min(g.ax[0].n, 2 * g.ax[1].n);
    const double y0 = is_cylinder(g) ? -1.0 : 0.0, dy = is_cylinder(g) ? 2.0 / n0 : 1.0 / n0;
    for (int i = 0; i < n0; ++i)
        for (int k = 0; k < g.ax[1].n; ++k)
            for (int m = 0; m < g.ax[2].n; ++m, ++count) {
                const Mat2 a = A(y0 + (i + 0.5) * dy, g.ax[1].coord(k), g.ax[2].coord(m));
                a11 += a(0, 0);
                a22 += a(1, 1);
            }
    const auto pre = std::make_shared<SpaceTimeFourierSolver>(g, a11 / count, a22 / count);
    return [pre](const Vec& r) { return pre->solve(r); };
}

Vec solve_cell_problem(const PeriodicCoefficientField& A, const Grid3& g, int j, double tol, SolveStats* stats) {
    if (j < 0 || j > 1) throw std::invalid_argument("cell problem axis must be 0 or 1");
    if (is_cylinder(g)) throw std::invalid_argument("cell problems live on the torus");
    SparseSystem sys;
    sys.A = assemble_divergence_form(g, A.A);
    sys.b = cell_rhs(A, g, j);
    sys.zero_mean = true;
    sys.symmetric = false;
    sys.precond = fourier_preconditioner(A.A, g);
    return solve_sparse(sys, tol, nullptr, stats);
}

double cell_residual(const PeriodicCoefficientField& A, const Grid3& g, int j, const Vec& chi) {
    const SpMat M = assemble_divergence_form(g, A.A);
    const Vec b = cell_rhs(A, g, j);
    const double bn = b.norm();
    return bn > 0 ? (M * chi - b).norm() / bn : (M * chi).norm();
}

Mat2 effective_tensor(const PeriodicCoefficientField& A, const Grid3& g, const std::array<Vec, 2>& chi) {
    Mat2 Ahat;
    for (int j = 0; j < 2; ++j) {
        const FaceFlux F = face_fluxes(g, A.A, chi[j], Vec2::Unit(j));
        Ahat(0, j) = F.F1.mean();
        Ahat(1, j) = F.F2.mean();
    }
    return Ahat;
}

CellSolution solve_cells(const PeriodicCoefficientField& A, int ny, int ns, double tol) {
    CellSolution out;
    out.grid = torus_grid(ny, ns);
    if (A.constant) {
        // right-hand side vanishes identically
        for (auto& c : out.chi) c = Vec::Zero(out.grid.size());
    } else {
        for (int j = 0; j < 2; ++j) out.chi[j] = solve_cell_problem(A, out.grid, j, tol);
    }
    out.Ahat = effective_tensor(A, out.grid, out.chi);
    for (int j = 0; j < 2; ++j) out.residual = std::max(out.residual, cell_residual(A, out.grid, j, out.chi[j]));
    return out;
}

}  // namespace homog
