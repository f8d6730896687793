#pragma once

#include "homog/grid.hpp"

#include <array>

namespace homog {

// Piecewise-linear map P with P(x) = x on x1 < 0 and P_j(x) = x_j + theta_j x1 on x1 > 0.
// grad[s] has columns grad P_j on side s (0 = minus, 1 = plus), i.e. grad = I + e1 theta^T on the plus side.
struct InterfaceProfile {
    Vec2 theta = Vec2::Zero();
    Mat2 Ahat_minus = Mat2::Identity(), Ahat_plus = Mat2::Identity();
    std::array<Mat2, 2> grad, grad_inv, Atilde;
    std::array<double, 2> J{1.0, 1.0};

    static constexpr int kMinus = 0, kPlus = 1;
    static int side(double x1) { return x1 > 0.0 ? kPlus : kMinus; }

    const Mat2& Ahat(double x1) const { return x1 > 0.0 ? Ahat_plus : Ahat_minus; }
    Vec2 P(const Vec2& x) const;
    Vec2 P_inverse(const Vec2& z) const;
    double Pj(int j, double x1, double x2) const { return P(Vec2(x1, x2))(j); }
};

Vec2 compute_theta(const Mat2& Ahat_plus, const Mat2& Ahat_minus);

InterfaceProfile build_profile(const Mat2& Ahat_plus, const Mat2& Ahat_minus);

struct TransmissionJumps {
    std::array<double, 2> normal_flux{};  // |[Ahat grad P_j . e1]|
    std::array<double, 2> tangential{};   // |[d_2 P_j]|
    double max() const;
};

TransmissionJumps check_transmission(const InterfaceProfile& p);

// Jump of the normal component of |J|^{-1} Atilde e_j across z1 = 0, maximised over j; this is the
// weak divergence of |J|^{-1} Atilde grad v for linear probes v.
double divergence_free_check(const InterfaceProfile& p);

}  // namespace homog
