#include "doctest.h"
#include "homog/cell.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace homog;

namespace {

constexpr double kPi = std::numbers::pi;

PeriodicCoefficientField laminate(double time_amp = 0.0) {
    CoeffSpec s;
    s.kind = "laminate";
    s.base = 2.0;
    s.amp = 1.0;
    s.time_amp = time_amp;
    return make_coefficient(s);
}

// Composite Simpson rule, independent of the PDE machinery.
template <typename F>
double simpson(F f, double a, double b, int n = 20000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace

TEST_CASE("constant and space-constant coefficients have zero correctors") {
    CoeffSpec s;
    s.kind = "constant";
    s.a11 = 1.5;
    s.a12 = 0.3;
    s.a22 = 0.8;
    const auto A = make_coefficient(s);
    const Grid3 g = torus_grid(8, 8);
    for (int j = 0; j < 2; ++j) CHECK(solve_cell_problem(A, g, j, 1e-10).cwiseAbs().maxCoeff() == 0.0);
    const CellSolution c = solve_cells(A, 8, 8, 1e-10);
    Mat2 A0;
    A0 << 1.5, 0.3, 0.3, 0.8;
    CHECK((c.Ahat - A0).cwiseAbs().maxCoeff() < 1e-14);

    s.a11 = s.a22 = 2.0;
    s.a12 = 0.0;
    s.time_amp = 0.5;  // A(s) = (2 + sin 2 pi s) I
    const auto B = make_coefficient(s);
    for (int j = 0; j < 2; ++j) CHECK(solve_cell_problem(B, g, j, 1e-10).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("laminate corrector matches the one-dimensional closed form") {
    const auto A = laminate();
    auto a = [](double y) { return 2.0 + std::sin(2 * kPi * y); };
    const double c = 1.0 / simpson([&](double y) { return 1.0 / a(y); }, 0.0, 1.0);
    // chi(y) = int_0^y (c/a - 1) minus its mean
    auto chi0 = [&](double y) { return simpson([&](double t) { return c / a(t) - 1.0; }, 0.0, y, 2000); };
    const double mean0 = simpson(chi0, 0.0, 1.0, 200);
    std::vector<double> errs;
    for (int n : {16, 32}) {
        const Grid3 g = torus_grid(n, 4);
        const Vec chi = solve_cell_problem(A, g, 0, 1e-11);
        double e = 0.0;
        for (int i = 0; i < n; ++i) e = std::max(e, std::abs(chi(g.idx(i, 3, 1)) - (chi0(i * 1.0 / n) - mean0)));
        errs.push_back(e);
        // transverse corrector of a y1-laminate vanishes
        CHECK(solve_cell_problem(A, g, 1, 1e-11).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK(errs[1] < 2e-3);
    CHECK(std::log2(errs[0] / errs[1]) > 1.8);
}

TEST_CASE("laminate effective tensor is diag(sqrt 3, 2)") {
    const double harm = 1.0 / simpson([](double y) { return 1.0 / (2.0 + std::sin(2 * kPi * y)); }, 0.0, 1.0);
    const double arith = simpson([](double y) { return 2.0 + std::sin(2 * kPi * y); }, 0.0, 1.0);
    CHECK(harm == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    CHECK(arith == doctest::Approx(2.0).epsilon(1e-12));
    const CellSolution c = solve_cells(laminate(), 128, 4, 1e-10);
    CHECK(std::abs(c.Ahat(0, 0) - harm) < 1e-4);
    CHECK(std::abs(c.Ahat(1, 1) - arith) < 1e-4);
    CHECK(std::abs(c.Ahat(0, 1)) < 1e-10);
    CHECK(std::abs(c.Ahat(1, 0)) < 1e-10);
    CHECK(c.residual <= 1e-9);
}

TEST_CASE("effective tensor converges at second order") {
    std::vector<double> errs;
    for (int n : {8, 16, 32}) {
        const CellSolution c = solve_cells(laminate(), n, 4, 1e-12);
        errs.push_back(std::abs(c.Ahat(0, 0) - std::sqrt(3.0)));
    }
    CHECK(std::log2(errs[0] / errs[1]) >= 1.9);
    CHECK(std::log2(errs[1] / errs[2]) >= 1.9);
}

TEST_CASE("effective tensors of random elliptic fields stay in the ellipticity band") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const char* kinds[] = {"laminate", "separable_trig", "checkerboard"};
    for (int trial = 0; trial < 20; ++trial) {
        CoeffSpec s;
        s.kind = kinds[trial % 3];
        s.base = 1.0 + U(rng);
        s.amp = 0.8 * U(rng) * (s.kind == "separable_trig" ? 0.8 : 1.0);
        s.axis = 1 + trial % 2;
        s.anisotropy = 0.5 + U(rng);
        s.angle = 3.0 * U(rng);
        s.time_amp = trial % 4 == 0 ? 0.5 * U(rng) : 0.0;
        const auto A = make_coefficient(s);
        const CellSolution c = solve_cells(A, 8, 8, 1e-10);
        const Mat2 sym = 0.5 * (c.Ahat + c.Ahat.transpose());
        Eigen::SelfAdjointEigenSolver<Mat2> es(sym);
        CHECK(es.eigenvalues()(0) >= A.kappa - 1e-12);
        CHECK(es.eigenvalues()(1) <= 1.0 / A.kappa + 1e-12);
        CHECK(c.residual <= 1e-9);
        if (!A.time_dependent) CHECK((c.Ahat - c.Ahat.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    }
}
