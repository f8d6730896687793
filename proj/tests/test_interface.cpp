#include "doctest.h"
#include "homog/interface.hpp"
#include "homog/stencil.hpp"

#include <Eigen/Eigenvalues>
#include <random>

using namespace homog;

namespace {

Mat2 diag(double a, double b) { return Vec2(a, b).asDiagonal(); }

Mat2 random_spd(std::mt19937_64& rng, double kappa) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double l1 = kappa + (1.0 / kappa - kappa) * U(rng), l2 = kappa + (1.0 / kappa - kappa) * U(rng);
    const double a = 6.283185307179586 * U(rng);
    Mat2 R;
    R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    Mat2 A = R * diag(l1, l2) * R.transpose();
    A(1, 0) = A(0, 1);
    return A;
}

}  // namespace

TEST_CASE("theta examples") {
    CHECK(compute_theta(diag(2, 3), diag(2, 3)).norm() == 0.0);
    CHECK(compute_theta(Mat2::Identity(), 2 * Mat2::Identity()) == Vec2(1, 0));
    CHECK(compute_theta(diag(2, 1), diag(3, 1)) == Vec2(0.5, 0));
    CHECK_THROWS_AS(compute_theta(diag(0, 1), Mat2::Identity()), std::invalid_argument);
}

TEST_CASE("profile structure") {
    SUBCASE("theta = 0 gives the identity map") {
        const auto p = build_profile(diag(2, 3), diag(2, 3));
        CHECK(p.P(Vec2(0.7, -0.2)) == Vec2(0.7, -0.2));
        CHECK((p.Atilde[1] - diag(2, 3)).norm() == 0.0);
        CHECK((p.Atilde[0] - diag(2, 3)).norm() == 0.0);
        CHECK(divergence_free_check(p) == 0.0);
        CHECK(check_transmission(p).max() == 0.0);
    }
    SUBCASE("Ahat_minus = 2I, Ahat_plus = I") {
        const auto p = build_profile(Mat2::Identity(), 2 * Mat2::Identity());
        CHECK(p.grad[1].col(0) == Vec2(2, 0));
        CHECK(p.J[1] == 2.0);
        CHECK(p.J[0] == 1.0);
        const auto t = check_transmission(p);
        CHECK(t.normal_flux[0] == 0.0);
        CHECK(divergence_free_check(p) <= 1e-12);
    }
}

TEST_CASE("random tensor pairs satisfy the transmission identities") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const Mat2 Ap = random_spd(rng, 0.3), Am = random_spd(rng, 0.3);
        const auto p = build_profile(Ap, Am);
        // direct expansion of the flux difference
        for (int j = 0; j < 2; ++j) {
            const double plus = Ap(0, j) + p.theta(j) * Ap(0, 0);
            CHECK(std::abs(plus - Am(0, j)) <= 1e-12);
        }
        CHECK(check_transmission(p).max() <= 1e-12);
        CHECK(divergence_free_check(p) <= 1e-12);
        for (int b = 0; b < 5; ++b) {
            const double x2 = 10 * U(rng);
            CHECK((p.P(Vec2(0.0, x2)) - p.P(Vec2(-0.0, x2))).norm() == 0.0);
            CHECK((p.P(Vec2(1e-300, x2)) - Vec2(0.0, x2)).norm() < 1e-14);
        }
        // transformed tensor bounds
        for (int s = 0; s < 2; ++s) {
            const Mat2& Ah = s ? Ap : Am;
            Eigen::SelfAdjointEigenSolver<Mat2> ea(Ah), et(p.Atilde[s]);
            Eigen::JacobiSVD<Mat2> sv(p.grad[s]);
            const double smin = sv.singularValues()(1), smax = sv.singularValues()(0);
            CHECK(et.eigenvalues()(0) >= ea.eigenvalues()(0) * smin * smin * (1 - 1e-12));
            CHECK(et.eigenvalues()(1) <= ea.eigenvalues()(1) * smax * smax * (1 + 1e-12));
            CHECK(et.eigenvalues()(0) > 0.0);
        }
    }
}

TEST_CASE("P is continuous at the interface and inverted exactly") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    const auto p = build_profile(diag(1.3, 0.9) + Mat2::Constant(0.2), diag(2.1, 1.4) + Mat2::Constant(-0.3));
    for (int i = 0; i < 100; ++i) {
        const double x2 = U(rng);
        const Vec2 left = Vec2(0.0, x2), right = p.grad[1].transpose() * Vec2(0.0, x2);
        CHECK((p.P(left) - right).norm() == 0.0);
    }
    double err = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Vec2 x(U(rng), U(rng));
        err = std::max(err, (p.P_inverse(p.P(x)) - x).norm());
    }
    CHECK(err <= 1e-14 * 4);
}

TEST_CASE("P_j is discretely Ahat-harmonic including the interface row") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        const Mat2 Ap = random_spd(rng, 0.4), Am = random_spd(rng, 0.4);
        const auto p = build_profile(Ap, Am);
        Sampler A = [&](double x1, double, double) -> Mat2 {
            if (x1 > 0) return Ap;
            if (x1 < 0) return Am;
            return 0.5 * (Ap + Am);
        };
        const Axis a{17, 0.125, 8, false};
        const SpMat L = assemble_spatial(a, a, A, 0.0);
        for (int j = 0; j < 2; ++j) {
            Vec u(17 * 17);
            for (int i = 0; i < 17; ++i)
                for (int k = 0; k < 17; ++k) u(i * 17 + k) = p.Pj(j, a.coord(i), a.coord(k));
            const Vec r = L * u;
            double worst = 0.0;
            for (int i = 1; i < 16; ++i)
                for (int k = 1; k < 16; ++k) worst = std::max(worst, std::abs(r(i * 17 + k)));
            CHECK(worst < 1e-11);
        }
    }
}
