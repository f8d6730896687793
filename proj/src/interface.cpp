#include "homog/interface.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace homog {

Vec2 compute_theta(const Mat2& Ahat_plus, const Mat2& Ahat_minus) {
    if (!(Ahat_plus(0, 0) > 0.0)) throw std::invalid_argument("(Ahat_plus)_11 must be positive");
    return (Ahat_minus.row(0) - Ahat_plus.row(0)).transpose() / Ahat_plus(0, 0);
}

InterfaceProfile build_profile(const Mat2& Ahat_plus, const Mat2& Ahat_minus) {
    InterfaceProfile p;
    p.Ahat_plus = Ahat_plus;
    p.Ahat_minus = Ahat_minus;
    p.theta = compute_theta(Ahat_plus, Ahat_minus);
    p.grad[InterfaceProfile::kMinus] = Mat2::Identity();
    p.grad[InterfaceProfile::kPlus] = Mat2::Identity() + Vec2::Unit(0) * p.theta.transpose();
    for (int s = 0; s < 2; ++s) {
        p.J[s] = p.grad[s].determinant();
        p.grad_inv[s] = p.grad[s].inverse();
        const Mat2& Ah = s == InterfaceProfile::kPlus ? Ahat_plus : Ahat_minus;
        p.Atilde[s] = p.grad[s].transpose() * Ah * p.grad[s];
    }
    return p;
}

Vec2 InterfaceProfile::P(const Vec2& x) const {
    if (x(0) <= 0.0) return x;
    return x + theta * x(0);
}

Vec2 InterfaceProfile::P_inverse(const Vec2& z) const {
    if (z(0) <= 0.0) return z;
    const double x1 = z(0) / (1.0 + theta(0));
    return Vec2(x1, z(1) - theta(1) * x1);
}

double TransmissionJumps::max() const {
    return std::max({normal_flux[0], normal_flux[1], tangential[0], tangential[1]});
}

TransmissionJumps check_transmission(const InterfaceProfile& p) {
    TransmissionJumps t;
    for (int j = 0; j < 2; ++j) {
        const Vec2 gm = p.grad[InterfaceProfile::kMinus].col(j), gp = p.grad[InterfaceProfile::kPlus].col(j);
        t.normal_flux[j] = std::abs((p.Ahat_plus * gp)(0) - (p.Ahat_minus * gm)(0));
        t.tangential[j] = std::abs(gp(1) - gm(1));
    }
    return t;
}

double divergence_free_check(const InterfaceProfile& p) {
    double r = 0.0;
    const Mat2 Mm = p.Atilde[0] / std::abs(p.J[0]), Mp = p.Atilde[1] / std::abs(p.J[1]);
    for (int j = 0; j < 2; ++j) r = std::max(r, std::abs(Mp(0, j) - Mm(0, j)));
    return r;
}

}  // namespace homog
