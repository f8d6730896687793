#include "doctest.h"
#include "homog/expansion.hpp"
#include "homog/fields.hpp"

#include <cmath>

using namespace homog;

namespace {

PeriodicCoefficientField constant(double a11, double a12, double a22) {
    CoeffSpec s;
    s.a11 = a11;
    s.a12 = a12;
    s.a22 = a22;
    return make_coefficient(s);
}

PeriodicCoefficientField laminate(int axis, double base, double amp, double aniso = 1.0, double angle = 0.0) {
    CoeffSpec s;
    s.kind = "laminate";
    s.axis = axis;
    s.base = base;
    s.amp = amp;
    s.anisotropy = aniso;
    s.angle = angle;
    return make_coefficient(s);
}

// media, correctors and duals at cell resolution 8, on a cylinder long enough for eps_min
struct Built {
    Medium plus, minus;
    InterfaceCorrector corr;
    DualCorrectorSet dual;
    ExpansionSetup setup;
};

std::unique_ptr<Built> build(const PeriodicCoefficientField& p, const PeriodicCoefficientField& m,
                             const ProblemSpec& spec, double eps_min, int ns = 8) {
    auto b = std::make_unique<Built>();
    b->plus = build_medium(p, 8, ns, 1e-12);
    b->minus = build_medium(m, 8, ns, 1e-12);
    const TwoSided A{p, m};
    const InterfaceProfile prof = build_profile(b->plus.cell.Ahat, b->minus.cell.Ahat);
    const CutoffPair cut = make_cutoffs();
    b->corr = solve_interface_corrector(A, prof, cut, b->plus, b->minus, std::ceil(spec.L / eps_min) + 2, 1e-12);
    b->dual = interface_dual(A, prof, cut, b->corr, b->plus, b->minus);
    b->setup = {spec, bump_source(0.3 * spec.L, spec.T), A, prof, &b->corr, &b->dual};
    return b;
}

ProblemSpec small_spec(double L = 0.5, double T = 1.0 / 16) {
    ProblemSpec s;
    s.L = L;
    s.T = T;
    return s;
}

double max_diff(const SpaceTimeField& a, const SpaceTimeField& b) {
    double m = 0.0;
    for (size_t n = 0; n < a.size(); ++n) m = std::max(m, (a[n] - b[n]).cwiseAbs().maxCoeff());
    return m;
}

}  // namespace

TEST_CASE("time cutoffs: ranges, plateaus and derivative size") {
    const TimeCutoff c{0.125, 0.25};
    const double e2 = c.eps * c.eps, tau = e2 / 8;
    double dmax = 0.0;
    for (int n = 0; n * tau <= 2 * c.T + 1e-12; ++n) {
        const double t = n * tau;
        CHECK(c.eta(t) >= 0.0);
        CHECK(c.eta(t) <= 1.0);
        if (t <= 2 * e2 + 1e-15) {
            CHECK(c.eta(t) == 0.0);
            CHECK(c.eta_tilde(t) == 0.0);
        }
        if (t >= 4 * e2 - 1e-15 && t <= 1.5 * c.T) CHECK(c.eta(t) == 1.0);
        if (t >= 4 * e2 - 1e-15) CHECK(c.eta_tilde(t) == 1.0);
        dmax = std::max(dmax, std::abs(c.deta(t)));
        const double fd = (c.eta(t + 1e-7) - c.eta(t - 1e-7)) / 2e-7;
        CHECK(std::abs(fd - c.deta(t)) <= 1e-5 / e2);
    }
    CHECK(dmax * e2 <= 1.0);
    CHECK(c.eta(2 * c.T) == 0.0);
}

TEST_CASE("problem validation") {
    ProblemSpec s = small_spec();
    CHECK_NOTHROW(validate_problem(s, bump_source(0.15, s.T), 0.125));
    CHECK_THROWS_AS(validate_problem(s, bump_source(0.49, s.T), 0.125), std::invalid_argument);
    s.points_per_eps = 4;
    CHECK_THROWS_AS(validate_problem(s, bump_source(0.15, s.T), 0.125), std::invalid_argument);
}

TEST_CASE("zero source gives zero solutions and zero error") {
    auto b = build(laminate(2, 2.0, 1.0, 0.25), laminate(2, 3.0, 1.5, 0.3, 0.4), small_spec(), 0.125);
    b->setup.source = zero_source();
    const SpaceTimeField u = solve_eps_problem(b->setup.spec, b->setup.source, b->setup.A, 0.125);
    for (const Vec& v : u) CHECK(v.cwiseAbs().maxCoeff() == 0.0);
    const ExpansionRecord r = run_expansion(b->setup, 0.125);
    CHECK(r.err_L4 == 0.0);
    CHECK(r.w_LinfL2 == 0.0);
    CHECK(r.w_gradL2 == 0.0);
}

TEST_CASE("constant media: u_eps equals u0 and w equals u_eps - u0") {
    const PeriodicCoefficientField A = constant(1.5, 0.3, 0.8);
    auto b = build(A, A, small_spec(), 0.0625);
    for (double eps : {0.125, 0.0625}) {
        const SpaceTimeField ue = solve_eps_problem(b->setup.spec, b->setup.source, b->setup.A, eps);
        const SpaceTimeField u0 = solve_homogenized(b->setup.spec, b->setup.source, b->setup.profile, eps);
        CHECK(max_diff(ue, u0) <= 1e-12);
        CHECK(ue[0].cwiseAbs().maxCoeff() == 0.0);
        const ExpansionRecord r = run_expansion(b->setup, eps);
        CHECK(r.err_L4 <= 1e-12);
        CHECK(r.w_LinfL2 <= 1e-12);
        CHECK(r.w_gradL2 <= 1e-10);
        CHECK(r.f_L2 > 0.0);
    }
}

TEST_CASE("equal effective tensors give the plain gradient") {
    const PeriodicCoefficientField A = laminate(1, 2.0, 1.0);
    auto b = build(A, A, small_spec(), 0.125);
    const BoxGrid g = problem_grid(b->setup.spec, 0.125);
    const SpaceTimeField u0 = solve_homogenized(b->setup.spec, b->setup.source, b->setup.profile, 0.125);
    const Vec& u = u0[g.nt];
    const std::array<Vec, 2> U = transformed_gradient(g, b->setup.profile, u);
    double m = 0.0;
    for (int i = 1; i + 1 < g.n; ++i)
        for (int k = 1; k + 1 < g.n; ++k) {
            const double d1 = (u(g.idx(i + 1, k)) - u(g.idx(i - 1, k))) / (2 * g.h);
            const double d2 = (u(g.idx(i, k + 1)) - u(g.idx(i, k - 1))) / (2 * g.h);
            m = std::max({m, std::abs(U[0](g.idx(i, k)) - d1), std::abs(U[1](g.idx(i, k)) - d2)});
        }
    CHECK(m <= 1e-12);
}

TEST_CASE("transformed value inverts the profile map exactly on affine data") {
    const InterfaceProfile p = build_profile((Mat2() << 3.0, 0.4, 0.4, 1.0).finished(), Mat2::Identity());
    CHECK(p.theta.norm() > 0.1);
    BoxGrid g = centred_box(1.0, 1.0 / 32, 0.25, 1.0 / 512);
    Vec u(g.size());
    for (int i = 0; i < g.n; ++i)
        for (int k = 0; k < g.n; ++k) u(g.idx(i, k)) = 0.5 + 2.0 * g.x(i) - g.x(k);
    for (const Vec2 z : {Vec2(0.3, -0.2), Vec2(-0.4, 0.1), Vec2(0.05, 0.6)}) {
        const Vec2 x = p.P_inverse(z);
        CHECK(transformed_value(g, p, u, z) == doctest::Approx(0.5 + 2.0 * x(0) - x(1)).epsilon(1e-12));
    }
}

TEST_CASE("corrector sampling rejects incompatible grids") {
    auto b = build(laminate(2, 2.0, 1.0), laminate(2, 3.0, 1.0), small_spec(), 0.125, 4);
    const BoxGrid g = problem_grid(b->setup.spec, 0.125);
    CHECK_THROWS_AS(make_corrector_sampler(g, 0.125, b->corr, b->dual), std::invalid_argument);
    const BoxGrid fine = problem_grid(b->setup.spec, 0.0625);
    CHECK_THROWS_AS(make_corrector_sampler(fine, 0.0625, b->corr, b->dual), std::invalid_argument);
}

TEST_CASE("contrasting media: rates, stable ratios and the expansion") {
    auto b = build(laminate(2, 2.0, 1.0, 0.25), laminate(2, 3.0, 1.5, 0.3, 0.4), small_spec(), 0.0625);
    int levels = 0;
    bool ordered = true;
    ExpansionObserver obs{[&](int n, const Vec&, const Vec&, const Vec& w) {
        ordered = ordered && n == levels++;
        if (n == 0) CHECK(w.cwiseAbs().maxCoeff() == 0.0);
    }};
    const ExpansionRecord c = run_expansion(b->setup, 0.125, &obs);
    CHECK(ordered);
    CHECK(levels == c.nt + 1);
    const ExpansionRecord f = run_expansion(b->setup, 0.0625);

    for (const auto& r : {c, f}) {
        CHECK(r.w_initial == 0.0);
        CHECK(r.tangential_jump <= 1e-12);
        CHECK(r.w_gradL2 < r.diff_gradL2);
        CHECK(r.eta_tilde_ratio < 1.0);
    }
    const double ratio = c.err_L4 / f.err_L4;
    CHECK(ratio >= 1.6);
    CHECK(ratio <= 2.4);
    CHECK(c.w_gradL2 / f.w_gradL2 >= 1.8);
    CHECK(c.w_LinfL2 / f.w_LinfL2 >= 1.8);
    CHECK(f.energy_ratio == doctest::Approx(c.energy_ratio).epsilon(0.1));
    CHECK(f.w21_ratio == doctest::Approx(c.w21_ratio).epsilon(0.15));
    CHECK(f.lip_ratio == doctest::Approx(c.lip_ratio).epsilon(0.1));
    // u_eps - u0 gradients do not converge, the corrected expansion does
    CHECK(f.diff_gradL2 == doctest::Approx(c.diff_gradL2).epsilon(0.2));
}

TEST_CASE("coarse eps: the expansion is already closer than u_eps - u0") {
    const ProblemSpec spec = small_spec(0.5, 0.25);
    auto b = build(laminate(2, 2.0, 1.0, 0.25), laminate(2, 3.0, 1.5, 0.3, 0.4), spec, 0.25);
    const ExpansionRecord r = run_expansion(b->setup, 0.25);
    CHECK(r.w_LinfL2 < r.diff_LinfL2);
    CHECK(r.w_gradL2 < r.diff_gradL2);
}
