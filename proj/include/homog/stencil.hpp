#pragma once

#include "homog/coeff.hpp"
#include "homog/grid.hpp"

#include <Eigen/SparseCore>
#include <vector>

namespace homog {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Spatial operator L = -div(A grad) on a 2-D lattice at time t, flux form.
// x1-faces carry A11 and x2-faces A22, both sampled at face midpoints; the mixed term A12 lives on
// cell centres and enters through cell-averaged gradients. The matrix is the Hessian of the discrete
// energy, so it is symmetric and its rows sum to zero. Faces beyond a non-periodic end are absent.
// With symmetric = false a non-symmetric A is accepted (A12 drives the x1 flux, A21 the x2 flux).
SpMat assemble_spatial(const Axis& a0, const Axis& a1, const Sampler& A, double t, bool symmetric = true);

// Space-time operator D_s + L^m on a torus or cylinder grid with periodic backward difference in s.
// L^m is sampled at s_m.
SpMat assemble_divergence_form(const Grid3& g, const Sampler& A, bool symmetric = true);

// -Laplacian in (y1, y2, s) with spacings (h, h, tau); natural ends on non-periodic axes.
SpMat assemble_laplacian3(const Grid3& g);

// -Laplacian in (y2, s) on the transverse torus of a Grid3.
SpMat assemble_transverse_laplacian(const Grid3& g);

// Face fluxes of A (grad u + slope). F1 is stored at the node left of its x1-face, F2 at the node
// below its x2-face; entries with no face (non-periodic ends) are zero.
struct FaceFlux {
    Vec F1, F2;
};
FaceFlux face_fluxes(const Grid3& g, const Sampler& A, const Vec& u, const Vec2& slope);

// Discrete divergence of face fluxes at nodes; L u = -flux_divergence(face_fluxes(u)).
Vec flux_divergence(const Grid3& g, const FaceFlux& F);

// Fixes the nodes flagged in `fixed` to the values g: fixed rows become identity rows, fixed
// columns are eliminated into the right-hand side. Symmetry of L carries over.
void apply_dirichlet(const SpMat& L, const std::vector<char>& fixed, const Vec& g, const Vec& rhs, SpMat& A,
                     Vec& b);

// Nodes on the two axial ends of a cylinder grid.
std::vector<char> cylinder_ends(const Grid3& g);

// Row sums, used for discrete conservation checks.
Vec row_sums(const SpMat& L);

}  // namespace homog
