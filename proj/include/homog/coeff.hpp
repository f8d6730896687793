#pragma once

#include "homog/grid.hpp"

#include <Eigen/Eigenvalues>

#include <functional>
#include <string>

namespace homog {

// A(y1, y2, s), 1-periodic in every argument.
using Sampler = std::function<Mat2(double, double, double)>;

// Catalog entry selected by name in configs.
struct CoeffSpec {
    std::string kind = "constant";  // constant | laminate | separable_trig | checkerboard
    double base = 1.0;
    double amp = 0.0;
    int axis = 1;                   // laminate direction
    double a11 = 1.0, a12 = 0.0, a22 = 1.0;  // constant entries
    double anisotropy = 1.0;        // laminate: A = a(y) diag(1, anisotropy) rotated by angle
    double angle = 0.0;             // radians
    double sharpness = 4.0;         // checkerboard smoothing
    double time_amp = 0.0;          // multiplies A by 1 + time_amp sin(2 pi s)
};

struct PeriodicCoefficientField {
    std::string name;
    Sampler A;
    double kappa = 1.0;  // measured ellipticity constant in (0, 1]
    double M = 0.0;      // measured time-Lipschitz constant
    bool time_dependent = false;
    bool constant = false;
};

PeriodicCoefficientField make_coefficient(const CoeffSpec& spec);

// Samples A on the torus nodes, face midpoints and cell centres, checks symmetry and ellipticity,
// and records kappa and M. Throws std::invalid_argument on violation.
void validate_coefficient(PeriodicCoefficientField& field, int ny = 16, int ns = 16);

// A_+ on y1 > 0, A_- on y1 < 0 and the average on the interface plane itself.
struct TwoSided {
    PeriodicCoefficientField plus, minus;
    Mat2 operator()(double y1, double y2, double s) const;
};

inline double ellipticity_of(const Mat2& A) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(A, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(1);
    return std::min(lo, 1.0 / hi);
}

}  // namespace homog
