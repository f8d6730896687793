#include "homog/poisson.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace homog {

void periodic_modes(int n, double h, Eigen::MatrixXd& Q, Vec& lam) {
    Q.resize(n, n);
    lam.resize(n);
    const double pi = std::numbers::pi;
    int col = 0;
    auto put = [&](int k, auto fn, double norm) {
        for (int i = 0; i < n; ++i) Q(i, col) = norm * fn(i);
        lam(col) = 4.0 * std::pow(std::sin(pi * k / n), 2) / (h * h);
        ++col;
    };
    put(0, [](int) { return 1.0; }, 1.0 / std::sqrt(double(n)));
    for (int k = 1; 2 * k < n; ++k) {
        put(k, [&](int i) { return std::cos(2 * pi * k * i / n); }, std::sqrt(2.0 / n));
        put(k, [&](int i) { return std::sin(2 * pi * k * i / n); }, std::sqrt(2.0 / n));
    }
    if (n % 2 == 0) put(n / 2, [](int i) { return i % 2 ? -1.0 : 1.0; }, 1.0 / std::sqrt(double(n)));
}

PoissonSolver::PoissonSolver(const Grid3& g) : g_(g) {
    periodic_modes(g.ax[1].n, g.ax[1].h, Q1_, lam1_);
    periodic_modes(g.ax[2].n, g.ax[2].h, Q2_, lam2_);
    if (g.ax[0].periodic) periodic_modes(g.ax[0].n, g.ax[0].h, Q0_, lam0_);
}

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

Vec PoissonSolver::solve(const Vec& r) const {
    const int n0 = g_.ax[0].n, n1 = g_.ax[1].n, n2 = g_.ax[2].n;
    const Index slice = Index(n1) * n2;
    // transverse transform of every slice
    RowMat hat(n0, slice);
    for (int i = 0; i < n0; ++i) {
        Eigen::Map<const RowMat> R(r.data() + i * slice, n1, n2);
        RowMat T = Q1_.transpose() * R * Q2_;
        hat.row(i) = Eigen::Map<const Eigen::RowVectorXd>(T.data(), slice);
    }
    const double h0 = g_.ax[0].h, c = 1.0 / (h0 * h0);
    if (g_.ax[0].periodic) {
        RowMat full = Q0_.transpose() * hat;
        for (int a = 0; a < n0; ++a)
            for (int b = 0; b < n1; ++b)
                for (int m = 0; m < n2; ++m) {
                    const double l = lam0_(a) + lam1_(b) + lam2_(m);
                    full(a, Index(b) * n2 + m) = l > 0 ? -full(a, Index(b) * n2 + m) / l : 0.0;
                }
        hat = Q0_ * full;
    } else {
        // Thomas sweep on interior nodes 1..n0-2 for each transverse mode
        Vec cp(n0), dp(n0);
        for (Index col = 0; col < slice; ++col) {
            const double l = lam1_(col / n2) + lam2_(col % n2);
            const double diag = -2.0 * c - l;
            cp(1) = c / diag;
            dp(1) = hat(1, col) / diag;
            for (int i = 2; i <= n0 - 2; ++i) {
                const double den = diag - c * cp(i - 1);
                cp(i) = c / den;
                dp(i) = (hat(i, col) - c * dp(i - 1)) / den;
            }
            hat(n0 - 1, col) = 0.0;
            hat(n0 - 2, col) = dp(n0 - 2);
            for (int i = n0 - 3; i >= 1; --i) hat(i, col) = dp(i) - cp(i) * hat(i + 1, col);
            hat(0, col) = 0.0;
        }
    }
    Vec u(g_.size());
    for (int i = 0; i < n0; ++i) {
        Eigen::Map<const RowMat> H(hat.row(i).data(), n1, n2);
        Eigen::Map<RowMat> U(u.data() + i * slice, n1, n2);
        U = Q1_ * H * Q2_.transpose();
    }
    return u;
}

Vec PoissonSolver::solve_transverse(const Vec& r) const {
    const int n1 = g_.ax[1].n, n2 = g_.ax[2].n;
    const Index slice = Index(n1) * n2;
    Vec u(r.size());
    for (Index i = 0; i < r.size() / slice; ++i) {
        Eigen::Map<const RowMat> R(r.data() + i * slice, n1, n2);
        RowMat T = Q1_.transpose() * R * Q2_;
        for (int b = 0; b < n1; ++b)
            for (int m = 0; m < n2; ++m) {
                const double l = lam1_(b) + lam2_(m);
                T(b, m) = l > 0 ? -T(b, m) / l : 0.0;
            }
        Eigen::Map<RowMat>(u.data() + i * slice, n1, n2) = Q1_ * T * Q2_.transpose();
    }
    return u;
}

}  // namespace homog

namespace homog {

SpaceTimeFourierSolver::SpaceTimeFourierSolver(const Grid3& g, double a11, double a22)
    : g_(g), a11_(a11), a22_(a22) {
    periodic_modes(g.ax[1].n, g.ax[1].h, Q1_, lam1_);
    if (g.ax[0].periodic) periodic_modes(g.ax[0].n, g.ax[0].h, Q0_, lam0_);
    const int n = g.ax[2].n;
    const double pi = std::numbers::pi;
    W_.resize(n, n);
    mu_.resize(n);
    for (int k = 0; k < n; ++k) {
        for (int m = 0; m < n; ++m) W_(m, k) = std::polar(1.0 / std::sqrt(double(n)), 2 * pi * k * m / n);
        mu_(k) = (1.0 - std::polar(1.0, -2 * pi * k / n)) / g.ax[2].h;
    }
}

Vec SpaceTimeFourierSolver::solve(const Vec& r) const {
    using CRowMat = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const int n0 = g_.ax[0].n, n1 = g_.ax[1].n, n2 = g_.ax[2].n;
    const Index slice = Index(n1) * n2;
    const bool torus = g_.ax[0].periodic;
    const int lo = torus ? 0 : 1, hi = torus ? n0 : n0 - 1;
    CRowMat hat = CRowMat::Zero(n0, slice);
    for (int i = lo; i < hi; ++i) {
        Eigen::Map<const RowMat> R(r.data() + i * slice, n1, n2);
        CRowMat T = (Q1_.transpose() * R).cast<std::complex<double>>() * W_.conjugate();
        hat.row(i) = Eigen::Map<const Eigen::RowVectorXcd>(T.data(), slice);
    }
    if (torus) {
        CRowMat full = Q0_.transpose().cast<std::complex<double>>() * hat;
        for (int a = 0; a < n0; ++a)
            for (Index col = 0; col < slice; ++col) {
                const std::complex<double> l = a11_ * lam0_(a) + a22_ * lam1_(col / n2) + mu_(col % n2);
                full(a, col) = std::abs(l) > 0 ? full(a, col) / l : 0.0;
            }
        hat = Q0_.cast<std::complex<double>>() * full;
    } else {
        const double c = a11_ / (g_.ax[0].h * g_.ax[0].h);
        Eigen::VectorXcd cp(n0), dp(n0);
        for (Index col = 0; col < slice; ++col) {
            const std::complex<double> diag = 2.0 * c + a22_ * lam1_(col / n2) + mu_(col % n2);
            cp(1) = -c / diag;
            dp(1) = hat(1, col) / diag;
            for (int i = 2; i <= n0 - 2; ++i) {
                const std::complex<double> den = diag + c * cp(i - 1);
                cp(i) = -c / den;
                dp(i) = (hat(i, col) + c * dp(i - 1)) / den;
            }
            hat(n0 - 2, col) = dp(n0 - 2);
            for (int i = n0 - 3; i >= 1; --i) hat(i, col) = dp(i) - cp(i) * hat(i + 1, col);
        }
    }
    Vec u(g_.size());
    if (!torus) {
        u.head(slice) = r.head(slice);
        u.tail(slice) = r.tail(slice);
    }
    for (int i = lo; i < hi; ++i) {
        Eigen::Map<const CRowMat> H(hat.row(i).data(), n1, n2);
        const CRowMat U = H * W_.transpose();
        Eigen::Map<RowMat>(u.data() + i * slice, n1, n2) = Q1_ * U.real();
    }
    return u;
}

}  // namespace homog
