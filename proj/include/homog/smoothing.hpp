#pragma once

#include "homog/grid.hpp"
#include "homog/norms.hpp"

#include <functional>
#include <vector>

namespace homog {

// Levels u^0 .. u^nt of a field on a box, each a vector over BoxGrid nodes.
using SpaceTimeField = std::vector<Vec>;

// Unnormalised bump exp(-1 / (1 - 4 r^2)) on r < 1/2 and its radial derivative.
double bump(double r);
double bump_derivative(double r);

// Discrete weights of rho_1 at scale eps (space) and rho_2 at scale eps^2 (time), each renormalised
// to unit mass. Derivative weights are scaled so that linear functions are differentiated exactly.
struct Mollifier {
    struct Tap {
        int di, dk;  // node offset
        double w;    // value weight
        double d1, d2;  // derivative weights along x1, x2
    };
    double eps = 0.0, h = 0.0, tau = 0.0;
    std::vector<Tap> space;
    std::vector<int> time_offset;
    std::vector<double> time_weight;
};

// Throws std::invalid_argument when eps < 2h or eps^2 < 2 tau (kernel not resolved).
Mollifier make_mollifier(double eps, double h, double tau);

// Spatial convolution of one level with zero extension outside the box. deriv = -1 gives the value,
// 0 or 1 the derivative along x1 or x2 (kernel derivative, not a difference of the result).
Vec smooth_x(const BoxGrid& g, const Mollifier& m, const Vec& u, int deriv = -1);
// Same, evaluated only on the nodes of `window` (other entries are zero).
Vec smooth_x(const BoxGrid& g, const Mollifier& m, const Vec& u, int deriv, const SubBox& window);

// Temporal convolution at level n. Levels outside [0, nt] are even reflections about t = 0 and t = T.
Vec smooth_t(const BoxGrid& g, const Mollifier& m, const SpaceTimeField& u, int n);

SpaceTimeField smooth_x(const BoxGrid& g, const Mollifier& m, const SpaceTimeField& u, int deriv = -1);
SpaceTimeField smooth_t(const BoxGrid& g, const Mollifier& m, const SpaceTimeField& u);
// S = S^t o S^x.
SpaceTimeField smooth(const BoxGrid& g, const Mollifier& m, const SpaceTimeField& u, int deriv = -1);

// eps ||grad S u|| / ||u|| in the space-time L^2 norm.
double derivative_bound_ratio(const BoxGrid& g, const Mollifier& m, const SpaceTimeField& u);

// Ratios ||f^eps S g|| / (||f||_cell ||g||) and eps ||f^eps grad S g|| / (||f||_cell ||g||) in L^2, with
// f^eps(x, t) = f(x / eps, t / eps^2) and ||f||_cell the L^2 norm over the unit space-time cell.
struct OscillatoryRatios {
    double value = 0.0;
    double gradient = 0.0;
};
OscillatoryRatios verify_oscillatory_bound(const BoxGrid& g, const Mollifier& m, const SpaceTimeField& gfield,
                                           const std::function<double(double, double, double)>& f);

// Smooth manufactured field F(x, t) = G(x) q(t) with closed-form derivatives, used for the smoothing
// error ||S(grad F) - grad F|| <= C eps (||grad^2 F|| + ||d_t F||).
struct ManufacturedField {
    std::function<double(double, double)> G;
    std::function<Vec2(double, double)> gradG;
    std::function<double(double, double)> hessG_norm;  // Frobenius norm of the Hessian
    std::function<double(double)> q, dq;
};
ManufacturedField gaussian_field(double width);

struct SmoothingError {
    double error = 0.0;  // ||S(grad F) - grad F|| over the measurement window
    double scale = 0.0;  // ||grad^2 F|| + ||d_t F|| over the same window
};
// Evaluates on the node window |x|_inf <= half_width, t in [t0, t0 + duration] of a grid with
// h = eps / 8 and tau = eps^2 / 8, streaming over time levels.
SmoothingError smoothing_error(const ManufacturedField& F, double eps, double half_width, double t0,
                               double duration);

}  // namespace homog
