#pragma once

#include "homog/cell.hpp"
#include "homog/poisson.hpp"

#include <array>

namespace homog {

// Index ranges: I, K in {0, 1, 2} with 2 standing for the time axis s; j in {0, 1}.
template <typename T>
using PerIj = std::array<std::array<T, 2>, 3>;
template <typename T>
using PerKIj = std::array<PerIj<T>, 3>;

// Periodic: B_ij = A_ij + A_ik d_k chi_j - Ahat_ij on the torus.
// Interface: B_ij = A_il (d_l P_j + d_l chi_j) - Ahat_il d_l P_j on the cylinder.
// Both use B_(d+1)j = -chi_j, which makes B divergence-free in (y, s).
enum class Convention { Periodic, Interface };

// B[i] for i < 2 holds the stencil face flux of the i-th face at each node (the face on the positive
// side), so its backward divergence reproduces the discrete corrector equation exactly. nodal[i] holds
// the average of the two faces adjacent to the node, i.e. B sampled at the nodes.
struct FluxField {
    Grid3 grid;
    Convention convention = Convention::Periodic;
    PerIj<Vec> B;
    PerIj<Vec> nodal;
};

struct DualCorrectorSet {
    Grid3 grid;
    FluxField flux;
    PerIj<Vec> f;     // potentials, Delta f_Ij = B_Ij
    PerKIj<Vec> phi;  // phi_KIj = D+_K f_Ij - D+_I f_Kj
};

FluxField periodic_flux(const PeriodicCoefficientField& A, const CellSolution& cell);

// Throws std::runtime_error naming (I, j) when a component has non-zero torus mean.
void check_zero_mean(const FluxField& B);

DualCorrectorSet periodic_dual(const PeriodicCoefficientField& A, const CellSolution& cell);

// Antisymmetrised forward differences of the potentials.
PerKIj<Vec> antisymmetric_gradient(const Grid3& g, const PerIj<Vec>& f);

// max |sum_K D-_K phi_KIj - B_Ij| per (I, j) over nodes with |y1| <= inner (inner < 0: all nodes),
// measured against the nodal flux; the two end slices of a cylinder are skipped, and so are nodes
// with |y1| < skip.
PerIj<double> divergence_mismatch(const DualCorrectorSet& d, double inner, double skip = 0.0);

// Same, against the face-located flux the potentials were built from.
PerIj<double> identity_residual(const DualCorrectorSet& d, double inner);
double max_entry(const PerIj<double>& m);

enum class SourceKind { Integrable, Compact };

struct SplitParts {
    Vec N1;         // axial double antiderivative of the transverse mean (integrable kind)
    Vec N2;         // per-slice transverse solution
    Vec N2_tilde;   // cylinder re-solve with right-hand side div g
};

// Solves Delta u = g on the cylinder. Compact sources (support in |y1| <= 1) use one Dirichlet solve;
// integrable sources use the mean / fluctuation split. The result has zero mean over |y1| <= 1.
Vec poisson_cylinder_split(const Grid3& cyl, const Vec& g, SourceKind kind, const PoissonSolver& solver,
                           SplitParts* parts = nullptr);

struct CutoffPair;
struct InterfaceCorrector;
struct Medium;
struct InterfaceProfile;
struct TwoSided;

// Interface dual correctors: f_Ij = psi+ f+_Il d_l P_j + psi- f-_Il d_l P_j + f~_Ij, where f~ is
// assembled from the compact part (1 - psi+ - psi-) B, the integrable corrector-difference part and
// the compact cutoff-derivative part.
DualCorrectorSet interface_dual(const TwoSided& A, const InterfaceProfile& profile, const CutoffPair& cut,
                                const InterfaceCorrector& corr, const Medium& plus, const Medium& minus);

// Cylinder flux field of the interface corrector.
FluxField interface_flux(const TwoSided& A, const InterfaceProfile& profile, const InterfaceCorrector& corr);

}  // namespace homog
