#include "doctest.h"
#include "homog/corrector.hpp"
#include "homog/fields.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace homog;

namespace {

PeriodicCoefficientField constant(double a11, double a12, double a22) {
    CoeffSpec s;
    s.a11 = a11;
    s.a12 = a12;
    s.a22 = a22;
    return make_coefficient(s);
}

PeriodicCoefficientField laminate(int axis, double base, double amp, double aniso = 1.0, double angle = 0.0,
                                  double time_amp = 0.0) {
    CoeffSpec s;
    s.kind = "laminate";
    s.axis = axis;
    s.base = base;
    s.amp = amp;
    s.anisotropy = aniso;
    s.angle = angle;
    s.time_amp = time_amp;
    return make_coefficient(s);
}

struct Setup {
    TwoSided A;
    Medium plus, minus;
    InterfaceProfile profile;
    CutoffPair cut = make_cutoffs();
};

Setup make_setup(const PeriodicCoefficientField& p, const PeriodicCoefficientField& m, int ny, int ns = 4) {
    Setup s{{p, m}, build_medium(p, ny, ns, 1e-12), build_medium(m, ny, ns, 1e-12), {}};
    s.profile = build_profile(s.plus.cell.Ahat, s.minus.cell.Ahat);
    return s;
}

InterfaceCorrector solve(const Setup& s, double R, double tol = 1e-12) {
    return solve_interface_corrector(s.A, s.profile, s.cut, s.plus, s.minus, R, tol);
}

Setup contrasting(int ny, int ns = 4) {
    return make_setup(laminate(2, 2.0, 1.0, 0.25), laminate(2, 3.0, 1.5, 0.3, 0.4), ny, ns);
}

double source_norm(const Grid3& g, const std::array<Vec, 2>& f) {
    return std::sqrt((f[0].squaredNorm() + f[1].squaredNorm()) * g.cell_volume());
}

}  // namespace

TEST_CASE("cutoff examples") {
    const CutoffPair c = make_cutoffs();
    CHECK(c.plus(1.5) == 1.0);
    CHECK(c.plus(-0.5) == 0.0);
    for (double y = -1.5; y <= 1.5; y += 0.0625) {
        CHECK(c.minus(y) == c.plus(-y));
        CHECK(c.plus(y) >= 0.0);
        CHECK(c.plus(y) <= 1.0);
        if (y <= 0.0 || y >= 1.0) {
            CHECK(c.dplus(y) == 0.0);
            CHECK(c.ddplus(y) == 0.0);
        }
    }
    // C^2 at the joins
    for (double y : {0.0, 1.0}) {
        CHECK(std::abs(c.dplus(y + 1e-6)) < 1e-9);
        CHECK(std::abs(c.ddplus(y + 1e-6)) < 1e-3);
        CHECK(std::abs(c.ddplus(y - 1e-6)) < 1e-3);
    }
    // derivatives are consistent with the values
    for (double y : {0.2, 0.5, 0.8}) {
        const double d = 1e-5;
        CHECK(c.dplus(y) == doctest::Approx((c.plus(y + d) - c.plus(y - d)) / (2 * d)).epsilon(1e-8));
        CHECK(c.ddplus(y) == doctest::Approx((c.dplus(y + d) - c.dplus(y - d)) / (2 * d)).epsilon(1e-7));
    }
}

TEST_CASE("constant media give a zero source and a zero corrector") {
    const Setup s = make_setup(constant(2.0, 0.3, 1.0), constant(1.0, -0.2, 3.0), 8);
    const InterfaceCorrector c = solve(s, 4.0);
    for (int j = 0; j < 2; ++j) {
        const auto f = assemble_interface_source(s.A, s.profile, s.cut, s.plus, s.minus, c.grid, j);
        CHECK(f[0].cwiseAbs().maxCoeff() < 1e-12);
        CHECK(f[1].cwiseAbs().maxCoeff() < 1e-12);
        CHECK(c.w[j].cwiseAbs().maxCoeff() < 1e-10);
        CHECK(c.chi[j].cwiseAbs().maxCoeff() < 1e-10);
        CHECK(flux_constancy_check(c.grid, s.A, c.w[j]).max_abs() < 1e-12);
        const DecayReport d = fit_decay(c.grid, c.w[j]);
        for (const auto& side : d.side)
            for (double e : side.energy) CHECK(e <= 1e-24);
    }
}

TEST_CASE("identical laminates reproduce the periodic corrector gradient") {
    const auto L = laminate(1, 2.0, 1.0);
    const Setup s = make_setup(L, L, 16);
    CHECK(s.profile.theta.norm() < 1e-12);
    const InterfaceCorrector c = solve(s, 5.0);
    const Grid3& g = c.grid;
    for (int j = 0; j < 2; ++j) {
        const Vec chiP = periodic_to_cylinder(s.plus.cell.grid, s.plus.cell.chi[j], g);
        double diff = 0.0, scale = 1e-3;
        for (int a = 0; a < 2; ++a) {
            const Vec d = diff_forward(g, c.chi[j] - chiP, a);
            for (int i = 1; i + 2 < g.ax[0].n; ++i) {
                if (std::abs(g.ax[0].coord(i)) <= 2.0) continue;
                const Index slice = Index(g.ax[1].n) * g.ax[2].n;
                diff = std::max(diff, d.segment(i * slice, slice).cwiseAbs().maxCoeff());
            }
            scale = std::max(scale, diff_forward(g, chiP, a).cwiseAbs().maxCoeff());
        }
        CHECK(diff <= 1e-3 * scale);
    }
}

TEST_CASE("identical periodic media keep the source inside the unit block") {
    CoeffSpec t;
    t.kind = "separable_trig";
    t.base = 2.0;
    t.amp = 0.8;
    const auto P = make_coefficient(t);
    const Setup s = make_setup(P, P, 8);
    const Grid3 g = cylinder_grid(4.0, 8, 4);
    double inside = 0.0, outside = 0.0;
    for (int j = 0; j < 2; ++j) {
        const auto f = assemble_interface_source(s.A, s.profile, s.cut, s.plus, s.minus, g, j);
        for (const Vec& v : f) {
            inside = std::max(inside, max_abs_within(g, v, 1.0));
            outside = std::max(outside, max_abs_within(g, v, -1.0));
        }
    }
    CHECK(inside > 1e-3);
    CHECK(outside == inside);
}

TEST_CASE("contrasting media: residual, support, flux constancy, decay and energy bound") {
    const Setup s = contrasting(8);
    const double tol = 1e-12;
    const InterfaceCorrector c = solve(s, 8.0, tol);
    const Grid3& g = c.grid;
    const double kappa = std::min(s.A.plus.kappa, s.A.minus.kappa);
    for (int j = 0; j < 2; ++j) {
        CHECK(c.residual[j] <= 10 * tol);
        CHECK(c.leak[j] <= 1e-10);
        const auto f = assemble_interface_source(s.A, s.profile, s.cut, s.plus, s.minus, g, j);
        CHECK(max_abs_within(g, f[0], -1.0) == max_abs_within(g, f[0], 1.0));
        CHECK(max_abs_within(g, f[1], -1.0) == max_abs_within(g, f[1], 1.0));
        const double fn = source_norm(g, f);

        const SliceFlux F = flux_constancy_check(g, s.A, c.w[j]);
        CHECK(F.max_abs() <= 1e-8);
        CHECK(F.max_abs() <= 10 * tol * std::max(1.0, fn) * 100);
        // slices at y1 = 2 and y1 = 6
        double f2 = 0.0, f6 = 0.0;
        for (size_t k = 0; k < F.y1.size(); ++k) {
            if (std::abs(F.y1[k] - 2.0) < 0.5 * g.h()) f2 = F.flux[k];
            if (std::abs(F.y1[k] - 6.0) < 0.5 * g.h()) f6 = F.flux[k];
        }
        CHECK(std::abs(f2 - f6) <= 1e-9);

        const DecayReport d = fit_decay(g, c.w[j]);
        for (const auto& side : d.side) {
            CHECK(!side.below_floor);
            CHECK(side.lambda > 0.0);
            CHECK(side.r2 >= 0.9);
            CHECK(side.monotone);
        }
        CHECK(gradient_norm(g, c.w[j], false) <= fn / kappa);
    }
}

TEST_CASE("truncation: interior corrector is stable under R 6 -> 10") {
    const Setup s = contrasting(8);
    const InterfaceCorrector a = solve(s, 6.0), b = solve(s, 10.0);
    const Index slice = Index(a.grid.ax[1].n) * a.grid.ax[2].n;
    const int shift = 4 * 8;
    for (int j = 0; j < 2; ++j) {
        const DecayReport d = fit_decay(a.grid, a.w[j]);
        const double lam = std::min(d.side[0].lambda, d.side[1].lambda);
        double diff = 0.0, scale = 0.0;
        for (int i = 0; i < a.grid.ax[0].n; ++i) {
            if (std::abs(a.grid.ax[0].coord(i)) > 4.0 + 1e-12) continue;
            const Vec da = a.chi[j].segment(i * slice, slice), db = b.chi[j].segment((i + shift) * slice, slice);
            diff = std::max(diff, (da - db).cwiseAbs().maxCoeff());
            scale = std::max(scale, da.cwiseAbs().maxCoeff());
        }
        CHECK(diff <= std::exp(-lam * 4.0) * scale);
    }
}

TEST_CASE("R below 4 is rejected") {
    const Setup s = contrasting(8);
    CHECK_THROWS_AS(solve(s, 3.0), std::invalid_argument);
}

TEST_CASE("time-dependent media: time-derivative energy is finite and reported") {
    const Setup s = make_setup(laminate(2, 2.0, 1.0, 0.5, 0.0, 0.3), laminate(1, 3.0, 1.0, 0.5, 0.3, 0.2), 8, 8);
    const InterfaceCorrector c = solve(s, 4.0, 1e-10);
    for (int j = 0; j < 2; ++j) {
        CHECK(c.residual[j] <= 1e-9);
        const double e = time_derivative_energy(c.grid, c.w[j]);
        CHECK(std::isfinite(e));
        CHECK(e > 0.0);
    }
}

TEST_CASE("binary field dump round-trips") {
    const Grid3 g = cylinder_grid(2.0, 4, 4);
    Vec v(g.size());
    for (Index i = 0; i < v.size(); ++i) v(i) = std::sin(0.37 * double(i)) * 1e3;
    const auto path = std::filesystem::temp_directory_path() / "homog_field_roundtrip.bin";
    write_field_binary(path.string(), g, v);
    Grid3 back;
    const Vec w = read_field_binary(path.string(), back);
    std::filesystem::remove(path);
    CHECK((w.array() == v.array()).all());
    for (int a = 0; a < 3; ++a) {
        CHECK(back.ax[a].n == g.ax[a].n);
        CHECK(back.ax[a].h == g.ax[a].h);
        CHECK(back.ax[a].zero == g.ax[a].zero);
        CHECK(back.ax[a].periodic == g.ax[a].periodic);
    }
}
