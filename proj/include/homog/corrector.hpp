#pragma once

#include "homog/cell.hpp"
#include "homog/dual.hpp"
#include "homog/interface.hpp"

#include <string>
#include <vector>

namespace homog {

// C^2 smoothstep cutoffs: psi+ = 0 for y1 <= 0, 1 for y1 >= 1; psi-(y1) = psi+(-y1).
struct CutoffPair {
    double plus(double y1) const;
    double dplus(double y1) const;
    double ddplus(double y1) const;
    double minus(double y1) const { return plus(-y1); }
    double dminus(double y1) const { return -dplus(-y1); }
    double ddminus(double y1) const { return ddplus(-y1); }
};

CutoffPair make_cutoffs();

// Everything known about one periodic medium.
struct Medium {
    PeriodicCoefficientField A;
    CellSolution cell;
    DualCorrectorSet dual;
};

Medium build_medium(const PeriodicCoefficientField& A, int ny, int ns, double tol);

struct InterfaceCorrector {
    Grid3 grid;
    std::array<Vec, 2> V;       // cutoff-weighted periodic part
    std::array<Vec, 2> w;       // decaying part, zero mean over |y1| <= 1
    std::array<Vec, 2> chi;     // chi_j = V_j + w_j
    std::array<Vec, 2> source;  // discrete right-hand side of the w equation
    std::array<double, 2> leak{};        // largest discarded source value outside |y1| <= 1
    std::array<double, 2> end_value{};   // Dirichlet value at +R that cancels the axial flux
    std::array<double, 2> residual{};    // relative residual of the chi equation on |y1| <= R - 2
};

// Vector source f~ (two spatial components) of the w equation, evaluated at the nodes; j in {0, 1}.
std::array<Vec, 2> assemble_interface_source(const TwoSided& A, const InterfaceProfile& profile,
                                             const CutoffPair& cut, const Medium& plus, const Medium& minus,
                                             const Grid3& cyl, int j);

// Cutoff-weighted periodic part V_j sampled on the cylinder.
Vec interface_periodic_part(const InterfaceProfile& profile, const CutoffPair& cut, const Medium& plus,
                            const Medium& minus, const Grid3& cyl, int j);

// Solves (D_s + L)(P_j + chi_j) = 0 on (-R, R) x T x T via chi_j = V_j + w_j. w vanishes at -R and takes
// the constant at +R for which the axial flux of w is zero.
InterfaceCorrector solve_interface_corrector(const TwoSided& A, const InterfaceProfile& profile,
                                             const CutoffPair& cut, const Medium& plus, const Medium& minus,
                                             double R, double tol);

// Axial flux of w through every x1-face slice, ordered by face; faces with |centre| <= 1 are omitted.
struct SliceFlux {
    std::vector<double> y1;  // face centres
    std::vector<double> flux;
    double max_abs() const;
};
SliceFlux flux_constancy_check(const Grid3& cyl, const TwoSided& A, const Vec& w);

struct DecayFit {
    std::vector<int> slab;      // slab [n, n+1] (plus side) or [-n-1, -n] (minus side)
    std::vector<double> energy;
    std::vector<char> used;
    double lambda = 0.0;  // fitted rate, E(n) ~ exp(-lambda n)
    double r2 = 0.0;
    bool below_floor = false;
    bool monotone = true;
};

struct DecayReport {
    std::array<DecayFit, 2> side;  // kMinus, kPlus
    double floor = 1e-28;
};

// Unit-slab energies of |grad_(y,s) w|^2 for 1 <= n <= R - 2 and a least-squares fit of log E(n).
// Slabs with energy below `floor` are excluded.
DecayReport fit_decay(const Grid3& cyl, const Vec& w, double floor = 1e-28);

// ||grad_(y,s) w||_{L^2} over the cylinder; with_time = false drops the s-derivative.
double gradient_norm(const Grid3& cyl, const Vec& w, bool with_time = true);
// ||d_s w|| + ||grad_y d_s w||, reported alongside the source size.
double time_derivative_energy(const Grid3& cyl, const Vec& w);
double l2_norm(const Grid3& cyl, const Vec& v);

// Flat binary dump: int32 n[3], int32 zero[3], float64 h[3], then the values in storage order.
void write_field_binary(const std::string& path, const Grid3& g, const Vec& v);
Vec read_field_binary(const std::string& path, Grid3& g);

}  // namespace homog
