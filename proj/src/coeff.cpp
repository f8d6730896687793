#include "homog/coeff.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace homog {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Mat2 rotated(double angle, double l1, double l2) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat2 R;
    R << c, -s, s, c;
    return R * Vec2(l1, l2).asDiagonal() * R.transpose();
}

}  // namespace

PeriodicCoefficientField make_coefficient(const CoeffSpec& spec) {
    PeriodicCoefficientField f;
    f.name = spec.kind;
    const double ta = spec.time_amp;
    auto modulate = [ta](double s) { return 1.0 + ta * std::sin(kTwoPi * s); };

    if (spec.kind == "constant") {
        Mat2 A;
        A << spec.a11, spec.a12, spec.a12, spec.a22;
        f.A = [A, modulate](double, double, double s) -> Mat2 { return A * modulate(s); };
        f.constant = (ta == 0.0);
    } else if (spec.kind == "laminate") {
        if (spec.axis != 1 && spec.axis != 2) throw std::invalid_argument("laminate axis must be 1 or 2");
        const Mat2 shape = rotated(spec.angle, 1.0, spec.anisotropy);
        const double base = spec.base, amp = spec.amp;
        const int axis = spec.axis;
        f.A = [=](double y1, double y2, double s) -> Mat2 {
            const double y = axis == 1 ? y1 : y2;
            return (base + amp * std::sin(kTwoPi * y)) * modulate(s) * shape;
        };
    } else if (spec.kind == "separable_trig") {
        const double base = spec.base, amp = spec.amp;
        f.A = [=](double y1, double y2, double s) -> Mat2 {
            const double c1 = std::cos(kTwoPi * y1), c2 = std::cos(kTwoPi * y2);
            const double s1 = std::sin(kTwoPi * y1), s2 = std::sin(kTwoPi * y2);
            Mat2 A;
            A(0, 0) = base + amp * s1 * c2;
            A(1, 1) = base + amp * c1 * s2;
            A(0, 1) = A(1, 0) = 0.25 * amp * s1 * s2;
            return A * modulate(s);
        };
    } else if (spec.kind == "checkerboard") {
        const double base = spec.base, amp = spec.amp, k = spec.sharpness;
        f.A = [=](double y1, double y2, double s) -> Mat2 {
            const double v = std::tanh(k * std::sin(kTwoPi * y1)) * std::tanh(k * std::sin(kTwoPi * y2));
            return Mat2::Identity() * (base + amp * v) * modulate(s);
        };
    } else {
        throw std::invalid_argument("unknown coefficient kind '" + spec.kind + "'");
    }
    f.time_dependent = (ta != 0.0);
    validate_coefficient(f);
    return f;
}

void validate_coefficient(PeriodicCoefficientField& field, int ny, int ns) {
    double kappa = 1.0, M = 0.0;
    const double h = 1.0 / ny, tau = 1.0 / ns;
    for (int i = 0; i < 2 * ny; ++i)
        for (int k = 0; k < 2 * ny; ++k)
            for (int m = 0; m < ns; ++m) {
                const double y1 = 0.5 * i * h, y2 = 0.5 * k * h, s = m * tau;
                const Mat2 A = field.A(y1, y2, s);
                if (!A.allFinite()) throw std::invalid_argument(field.name + ": non-finite coefficient sample");
                if (std::abs(A(0, 1) - A(1, 0)) > 1e-14 * A.norm())
                    throw std::invalid_argument(field.name + ": coefficient sample is not symmetric");
                kappa = std::min(kappa, ellipticity_of(A));
                const Mat2 An = field.A(y1, y2, s + tau);
                Eigen::SelfAdjointEigenSolver<Mat2> es(An - A, Eigen::EigenvaluesOnly);
                M = std::max(M, es.eigenvalues().cwiseAbs().maxCoeff() / tau);
            }
    if (!(kappa > 0.0)) throw std::invalid_argument(field.name + ": coefficient is not uniformly elliptic");
    field.kappa = kappa;
    field.M = M;
}

Mat2 TwoSided::operator()(double y1, double y2, double s) const {
    if (y1 > 0.0) return plus.A(y1, y2, s);
    if (y1 < 0.0) return minus.A(y1, y2, s);
    return 0.5 * (plus.A(y1, y2, s) + minus.A(y1, y2, s));
}

}  // namespace homog
