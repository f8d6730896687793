#pragma once

#include "homog/corrector.hpp"
#include "homog/smoothing.hpp"
#include "homog/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <functional>
#include <memory>
#include <string>

namespace homog {

// Source f(x, t) = sin(pi t / T) * e * bump(|x| / (2 r)): smooth, supported in |x| < r, f(., 0) = 0.
struct Source {
    std::function<double(double, double, double)> f, ft;
    double radius = 0.0;
};
Source bump_source(double radius, double T);
Source zero_source();

struct ProblemSpec {
    double L = 1.0;             // box half-width
    double T = 0.25;            // final time
    int points_per_eps = 8;     // h = eps / points_per_eps, tau = eps^2 / points_per_eps
    double interior = 0.5;      // w norms are taken over |x|_inf <= interior * L
    double tol = 1e-10;         // relative residual of each time step
    double lipschitz_radius = 0.25;
    double lipschitz_p = 8.0;
};

// Fails when f does not vanish within two cells of the box edge.
void validate_problem(const ProblemSpec& spec, const Source& src, double eps);

BoxGrid problem_grid(const ProblemSpec& spec, double eps);

// eta rises on [2 eps^2, 4 eps^2] and falls on [3T/2, 2T]; eta~ rises on [2 eps^2, 4 eps^2] only.
struct TimeCutoff {
    double eps = 0.0, T = 0.0;
    double eta(double t) const;
    double deta(double t) const;
    double eta_tilde(double t) const;
};

// Backward Euler for (u^n - u^{n-1}) / tau + L(t_n) u^n = f^n with zero Dirichlet data on the box edge.
// Time-independent operators are factorised once; otherwise each step runs a Krylov solve to `tol`.
// symmetric = false admits a non-symmetric constant tensor (LU instead of LDL^T).
class BoxStepper {
public:
    BoxStepper(const BoxGrid& g, Sampler A, bool time_dependent, double tol, bool symmetric = true);
    Vec step(const Vec& prev, const Vec& f, double t);
    long iterations() const { return iterations_; }

private:
    void assemble(double t);
    BoxGrid g_;
    Sampler A_;
    bool time_dependent_;
    double tol_;
    bool symmetric_;
    std::vector<char> edge_;
    Eigen::SparseMatrix<double, Eigen::RowMajor> M_;
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double, Eigen::RowMajor>, Eigen::Lower | Eigen::Upper> cg_;
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double, Eigen::RowMajor>> bicg_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    bool ready_ = false;
    long iterations_ = 0;
};

// A(x / eps, t / eps^2) for a two-sided medium, and the piecewise-constant effective tensor.
Sampler scaled_sampler(const TwoSided& A, double eps);
Sampler effective_sampler(const InterfaceProfile& profile);

SpaceTimeField solve_eps_problem(const ProblemSpec& spec, const Source& src, const TwoSided& A, double eps);
SpaceTimeField solve_homogenized(const ProblemSpec& spec, const Source& src, const InterfaceProfile& profile,
                                 double eps);

// U~0 = (grad P)^{-1} grad u0 at every node: central differences, one-sided on the box edge, and the
// average of the two one-sided transforms on the interface row.
std::array<Vec, 2> transformed_gradient(const BoxGrid& g, const InterfaceProfile& profile, const Vec& u0);
// u~0(z) = u0(P^{-1}(z)) by the explicit inverse map and bilinear interpolation of u0.
double transformed_value(const BoxGrid& g, const InterfaceProfile& profile, const Vec& u0, const Vec2& z);

// Interface correctors sampled at (x / eps, t / eps^2). The cylinder must share the cell resolution of
// the box (h = eps h_y, tau = eps^2 tau_y) and reach |x1| / eps.
struct CorrectorSampler {
    const InterfaceCorrector* corr = nullptr;
    const DualCorrectorSet* dual = nullptr;
    std::vector<int> axial;  // cylinder y1 index per box column
    int ny = 0, ns = 0;
    double chi(int j, int i, int k, int n) const;
    double phi_time(int i_axis, int j, int i, int k, int n) const;  // phi_{(d+1) i j}
};
CorrectorSampler make_corrector_sampler(const BoxGrid& g, double eps, const InterfaceCorrector& corr,
                                        const DualCorrectorSet& dual);

// Everything the expansion needs apart from eps.
struct ExpansionSetup {
    ProblemSpec spec;
    Source source;
    TwoSided A;
    InterfaceProfile profile;
    const InterfaceCorrector* corr = nullptr;  // on a cylinder with R >= L / eps + 2
    const DualCorrectorSet* dual = nullptr;
};

struct ExpansionRecord {
    double eps = 0, h = 0, tau = 0;
    int n = 0, nt = 0;
    double err_L4 = 0;         // ||u_eps - u0||_{L^4(Omega_T)}
    double w_LinfL2 = 0;       // interior ||w_eps||_{L^inf L^2}
    double w_gradL2 = 0;       // interior ||grad w_eps||_{L^2}
    double diff_LinfL2 = 0;    // same norms of u_eps - u0
    double diff_gradL2 = 0;
    double f_L2 = 0, ft_L2 = 0;
    double energy_ratio = 0;   // (||u_eps||_{L^inf L^2} + ||grad u_eps||_{L^2}) / ||f||
    double eta_tilde_ratio = 0;  // eps ||eta~ grad d_t u0|| / (||f|| + eps ||f_t||)
    double w21_ratio = 0;      // ||u~0||_{W^{2,1}_2} / ||f||
    double tangential_jump = 0;  // max jump of U~0_2 across the interface row
    double w_initial = 0;      // max |w_eps(., 0)|
    double lip_sup_grad = 0, lip_u_avg = 0, lip_f_avg = 0, lip_ratio = 0;
    long iterations = 0;
};

// Optional per-level observer: level n, u_eps, u0, w_eps (w is delivered for every level after the
// smoothing window has passed, in order).
struct ExpansionObserver {
    std::function<void(int, const Vec&, const Vec&, const Vec&)> level;
};

// Streams u_eps and u0 through time, forms w_eps = u_eps - u0 - eps chi_j^eps S(eta U~0_j)
// - eps^2 phi_{(d+1)ij}^eps d_i S(eta U~0_j) and accumulates every norm in the record.
ExpansionRecord run_expansion(const ExpansionSetup& setup, double eps, const ExpansionObserver* obs = nullptr);

}  // namespace homog
