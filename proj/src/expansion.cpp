#include "homog/expansion.hpp"

#include "homog/norms.hpp"
#include "homog/stencil.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace homog {

namespace {

constexpr double kPi = std::numbers::pi;

double smoothstep(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

double dsmoothstep(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    const double t = x * (1.0 - x);
    return 30.0 * t * t;
}

Axis box_axis(const BoxGrid& g) { return {g.n, g.h, (g.n - 1) / 2, false}; }

std::vector<char> box_edge(const BoxGrid& g) {
    std::vector<char> e(g.size(), 0);
    for (int i = 0; i < g.n; ++i)
        for (int k = 0; k < g.n; ++k)
            if (i == 0 || k == 0 || i + 1 == g.n || k + 1 == g.n) e[g.idx(i, k)] = 1;
    return e;
}

Vec sample_source(const BoxGrid& g, const std::function<double(double, double, double)>& f, double t) {
    Vec v(g.size());
    for (int i = 0; i < g.n; ++i)
        for (int k = 0; k < g.n; ++k) v(g.idx(i, k)) = f(g.x(i), g.x(k), t);
    return v;
}

// integral of |grad u|^2 over the faces whose both nodes lie in b
double grad_sq_integral(const Vec& u, const BoxGrid& g, const SubBox& b) {
    double s = 0.0;
    for (int i = b.i0; i <= b.i1; ++i)
        for (int k = b.k0; k <= b.k1; ++k) {
            const double v = u(g.idx(i, k));
            if (i < b.i1) s += std::pow(u(g.idx(i + 1, k)) - v, 2);
            if (k < b.k1) s += std::pow(u(g.idx(i, k + 1)) - v, 2);
        }
    return s;  // h^2 * (diff / h)^2
}

SubBox centred_window(const BoxGrid& g, double half_width) {
    const int c = (g.n - 1) / 2, r = std::min(c, int(std::floor(half_width / g.h + 1e-9)));
    return {c - r, c + r, c - r, c + r};
}

// Time-integrated quantity with trapezoidal weights over levels 0..nt.
struct TimeSum {
    double sum = 0.0;
    void add(double v, int n, int nt, double tau) { sum += (n == 0 || n == nt ? 0.5 : 1.0) * tau * v; }
};

}  // namespace

Source bump_source(double radius, double T) {
    Source s;
    s.radius = radius;
    const double e = std::exp(1.0);
    s.f = [=](double x1, double x2, double t) {
        return std::sin(kPi * t / T) * e * bump(std::hypot(x1, x2) / (2.0 * radius));
    };
    s.ft = [=](double x1, double x2, double t) {
        return kPi / T * std::cos(kPi * t / T) * e * bump(std::hypot(x1, x2) / (2.0 * radius));
    };
    return s;
}

Source zero_source() {
    Source s;
    s.f = s.ft = [](double, double, double) { return 0.0; };
    return s;
}

BoxGrid problem_grid(const ProblemSpec& spec, double eps) {
    return centred_box(spec.L, eps / spec.points_per_eps, spec.T, eps * eps / spec.points_per_eps);
}

void validate_problem(const ProblemSpec& spec, const Source& src, double eps) {
    std::ostringstream err;
    if (spec.points_per_eps < 8) err << "oscillation not resolved: need h <= eps/8 and tau <= eps^2/8; ";
    if (!(eps > 0.0)) err << "eps must be positive; ";
    const double h = eps / std::max(spec.points_per_eps, 1);
    if (src.radius > spec.L - 2.0 * h) err << "source must vanish within two cells of the box edge; ";
    if (!(spec.interior > 0.0 && spec.interior <= 1.0)) err << "interior fraction must lie in (0, 1]; ";
    if (4.0 * eps * eps >= 1.5 * spec.T) err << "time cutoff plateau is empty for this eps and T; ";
    if (!err.str().empty()) throw std::invalid_argument(err.str());
    problem_grid(spec, eps);  // checks that L / h and T / tau are integers
}

double TimeCutoff::eta(double t) const {
    const double e2 = eps * eps;
    return smoothstep((t - 2.0 * e2) / (2.0 * e2)) * (1.0 - smoothstep((t - 1.5 * T) / (0.5 * T)));
}

double TimeCutoff::deta(double t) const {
    const double e2 = eps * eps;
    const double up = smoothstep((t - 2.0 * e2) / (2.0 * e2)), dup = dsmoothstep((t - 2.0 * e2) / (2.0 * e2)) / (2.0 * e2);
    const double dn = 1.0 - smoothstep((t - 1.5 * T) / (0.5 * T)), ddn = -dsmoothstep((t - 1.5 * T) / (0.5 * T)) / (0.5 * T);
    return dup * dn + up * ddn;
}

double TimeCutoff::eta_tilde(double t) const {
    const double e2 = eps * eps;
    return smoothstep((t - 2.0 * e2) / (2.0 * e2));
}

BoxStepper::BoxStepper(const BoxGrid& g, Sampler A, bool time_dependent, double tol, bool symmetric)
    : g_(g), A_(std::move(A)), time_dependent_(time_dependent), tol_(tol), symmetric_(symmetric), edge_(box_edge(g)) {
    cg_.setTolerance(tol);
    cg_.setMaxIterations(20000);
    bicg_.setTolerance(tol);
    bicg_.setMaxIterations(20000);
}

void BoxStepper::assemble(double t) {
    const Axis a = box_axis(g_);
    SpMat M = assemble_spatial(a, a, A_, t, symmetric_);
    M.diagonal().array() += 1.0 / g_.tau;
    Vec b;
    apply_dirichlet(M, edge_, Vec::Zero(g_.size()), Vec::Zero(g_.size()), M_, b);
    if (!time_dependent_) {
        const Eigen::SparseMatrix<double> C = M_;
        if (symmetric_) {
            ldlt_.compute(C);
            if (ldlt_.info() != Eigen::Success) throw SolveError("box factorisation failed", 0.0, 0);
        } else {
            lu_.compute(C);
            if (lu_.info() != Eigen::Success) throw SolveError("box factorisation failed", 0.0, 0);
        }
    } else if (symmetric_) {
        cg_.compute(M_);
    } else {
        bicg_.compute(M_);
    }
    ready_ = true;
}

Vec BoxStepper::step(const Vec& prev, const Vec& f, double t) {
    if (!ready_ || time_dependent_) assemble(t);
    Vec rhs = prev / g_.tau + f;
    for (Index p = 0; p < rhs.size(); ++p)
        if (edge_[p]) rhs(p) = 0.0;
    const double bn = rhs.norm();
    if (bn == 0.0) return Vec::Zero(rhs.size());
    Vec x;
    long it = 0;
    if (!time_dependent_) {
        x = symmetric_ ? Vec(ldlt_.solve(rhs)) : Vec(lu_.solve(rhs));
    } else if (symmetric_) {
        x = cg_.solveWithGuess(rhs, prev);
        it = cg_.iterations();
    } else {
        x = bicg_.solveWithGuess(rhs, prev);
        it = bicg_.iterations();
    }
    iterations_ += it;
    const double res = (rhs - M_ * x).norm() / bn;
    if (!(res <= 2.0 * tol_)) {
        std::ostringstream os;
        os << "time step at t = " << t << " did not converge (relative residual " << res << ")";
        throw SolveError(os.str(), res, it);
    }
    return x;
}

namespace {

bool is_symmetric(const InterfaceProfile& p) {
    auto asym = [](const Mat2& A) { return std::abs(A(0, 1) - A(1, 0)) > 1e-12 * A.norm(); };
    return !asym(p.Ahat_plus) && !asym(p.Ahat_minus);
}

}  // namespace

Sampler scaled_sampler(const TwoSided& A, double eps) {
    return [A, eps](double x1, double x2, double t) { return A(x1 / eps, x2 / eps, t / (eps * eps)); };
}

Sampler effective_sampler(const InterfaceProfile& p) {
    const Mat2 Ap = p.Ahat_plus, Am = p.Ahat_minus;
    return [Ap, Am](double x1, double, double) -> Mat2 { return x1 > 0 ? Ap : x1 < 0 ? Am : Mat2(0.5 * (Ap + Am)); };
}

namespace {

SpaceTimeField evolve(const ProblemSpec& spec, const Source& src, const Sampler& A, bool time_dependent, double eps,
                      bool symmetric) {
    const BoxGrid g = problem_grid(spec, eps);
    BoxStepper st(g, A, time_dependent, spec.tol, symmetric);
    SpaceTimeField u(g.nt + 1);
    u[0] = Vec::Zero(g.size());
    for (int n = 1; n <= g.nt; ++n) u[n] = st.step(u[n - 1], sample_source(g, src.f, n * g.tau), n * g.tau);
    return u;
}

}  // namespace

SpaceTimeField solve_eps_problem(const ProblemSpec& spec, const Source& src, const TwoSided& A, double eps) {
    validate_problem(spec, src, eps);
    return evolve(spec, src, scaled_sampler(A, eps), A.plus.time_dependent || A.minus.time_dependent, eps, true);
}

SpaceTimeField solve_homogenized(const ProblemSpec& spec, const Source& src, const InterfaceProfile& profile,
                                 double eps) {
    validate_problem(spec, src, eps);
    return evolve(spec, src, effective_sampler(profile), false, eps, is_symmetric(profile));
}

namespace {

std::array<Vec, 2> transformed_gradient_impl(const BoxGrid& g, const InterfaceProfile& p, const Vec& u,
                                             double* jump) {
    std::array<Vec, 2> U{Vec(g.size()), Vec(g.size())};
    const int n = g.n, z = (n - 1) / 2;
    const double h = g.h;
    auto at = [&](int i, int k) { return u(g.idx(i, k)); };
    double J = 0.0;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const double d2 = k == 0       ? (at(i, 1) - at(i, 0)) / h
                              : k == n - 1 ? (at(i, k) - at(i, k - 1)) / h
                                           : (at(i, k + 1) - at(i, k - 1)) / (2 * h);
            Vec2 v;
            if (i == z) {
                const Vec2 plus = p.grad_inv[InterfaceProfile::kPlus] * Vec2((at(i + 1, k) - at(i, k)) / h, d2);
                const Vec2 minus = p.grad_inv[InterfaceProfile::kMinus] * Vec2((at(i, k) - at(i - 1, k)) / h, d2);
                v = 0.5 * (plus + minus);
                J = std::max(J, std::abs(plus(1) - minus(1)));
            } else {
                const double d1 = i == 0       ? (at(1, k) - at(0, k)) / h
                                  : i == n - 1 ? (at(i, k) - at(i - 1, k)) / h
                                               : (at(i + 1, k) - at(i - 1, k)) / (2 * h);
                v = p.grad_inv[InterfaceProfile::side(g.x(i))] * Vec2(d1, d2);
            }
            U[0](g.idx(i, k)) = v(0);
            U[1](g.idx(i, k)) = v(1);
        }
    if (jump) *jump = J;
    return U;
}

}  // namespace

std::array<Vec, 2> transformed_gradient(const BoxGrid& g, const InterfaceProfile& profile, const Vec& u0) {
    return transformed_gradient_impl(g, profile, u0, nullptr);
}

double transformed_value(const BoxGrid& g, const InterfaceProfile& profile, const Vec& u0, const Vec2& z) {
    const Vec2 x = profile.P_inverse(z);
    const double fi = (x(0) - g.lo) / g.h, fk = (x(1) - g.lo) / g.h;
    if (fi < 0 || fk < 0 || fi > g.n - 1 || fk > g.n - 1) return 0.0;
    const int i = std::min(int(fi), g.n - 2), k = std::min(int(fk), g.n - 2);
    const double a = fi - i, b = fk - k;
    return (1 - a) * (1 - b) * u0(g.idx(i, k)) + a * (1 - b) * u0(g.idx(i + 1, k)) + (1 - a) * b * u0(g.idx(i, k + 1)) +
           a * b * u0(g.idx(i + 1, k + 1));
}

CorrectorSampler make_corrector_sampler(const BoxGrid& g, double eps, const InterfaceCorrector& corr,
                                        const DualCorrectorSet& dual) {
    const Grid3& c = corr.grid;
    if (std::abs(g.h - eps * c.ax[0].h) > 1e-12 * g.h || std::abs(g.h - eps * c.ax[1].h) > 1e-12 * g.h ||
        std::abs(g.tau - eps * eps * c.ax[2].h) > 1e-12 * g.tau)
        throw std::invalid_argument("grid incompatibility: box spacing must equal eps times the cell spacing");
    CorrectorSampler s;
    s.corr = &corr;
    s.dual = &dual;
    s.ny = c.ax[1].n;
    s.ns = c.ax[2].n;
    const int half = (g.n - 1) / 2;
    s.axial.resize(g.n);
    for (int i = 0; i < g.n; ++i) {
        const int a = c.ax[0].zero + (i - half);
        if (a < 1 || a > c.ax[0].n - 2)
            throw std::invalid_argument("grid incompatibility: corrector cylinder shorter than the box at this eps");
        s.axial[i] = a;
    }
    return s;
}

double CorrectorSampler::chi(int j, int i, int k, int n) const {
    const int half = (int(axial.size()) - 1) / 2;
    const Grid3& c = corr->grid;
    return corr->chi[j](c.idx(axial[i], c.ax[1].wrap(k - half), c.ax[2].wrap(n)));
}

double CorrectorSampler::phi_time(int i_axis, int j, int i, int k, int n) const {
    const int half = (int(axial.size()) - 1) / 2;
    const Grid3& c = corr->grid;
    return dual->phi[2][i_axis][j](c.idx(axial[i], c.ax[1].wrap(k - half), c.ax[2].wrap(n)));
}

ExpansionRecord run_expansion(const ExpansionSetup& setup, double eps, const ExpansionObserver* obs) {
    const ProblemSpec& spec = setup.spec;
    validate_problem(spec, setup.source, eps);
    if (!setup.corr || !setup.dual) throw std::invalid_argument("expansion needs interface correctors and duals");
    const BoxGrid g = problem_grid(spec, eps);
    const int nt = g.nt;
    const Mollifier mol = make_mollifier(eps, g.h, g.tau);
    const TimeCutoff eta{eps, spec.T};
    const CorrectorSampler cs = make_corrector_sampler(g, eps, *setup.corr, *setup.dual);
    const InterfaceProfile& prof = setup.profile;

    BoxStepper ue(g, scaled_sampler(setup.A, eps), setup.A.plus.time_dependent || setup.A.minus.time_dependent,
                  spec.tol);
    BoxStepper u0s(g, effective_sampler(prof), false, spec.tol, is_symmetric(prof));

    const SubBox all = whole(g), in = centred_window(g, spec.interior * spec.L);
    const double h2 = g.h * g.h;

    ExpansionRecord rec;
    rec.eps = eps;
    rec.h = g.h;
    rec.tau = g.tau;
    rec.n = g.n;
    rec.nt = nt;

    SpaceTimeNorm errL4(g, all, 4.0), fL2(g, all, 2.0), ftL2(g, all, 2.0);
    TimeSum wgrad, dgrad, uegrad, etat;
    double ue_linf = 0.0;
    // W^{2,1}_2 pieces of u~0 in the transformed variables
    TimeSum w21;
    const double detP = std::abs(prof.grad[InterfaceProfile::kPlus].determinant());
    const double detM = std::abs(prof.grad[InterfaceProfile::kMinus].determinant());

    // Lipschitz probe: Q_r = B_r(0) x (T - r^2, T], 2Q = B_2r(0) x (T - 4 r^2, T]
    const double r = spec.lipschitz_radius, pexp = spec.lipschitz_p;
    double lip_sup = 0.0, lip_u = 0.0, lip_f = 0.0;
    long lip_count = 0;

    // ring of spatially smoothed eta U~0 levels: [j][0 value, 1 d/dx1, 2 d/dx2]
    int rt = 0;
    for (int k : mol.time_offset) rt = std::max(rt, std::abs(k));
    if (2 * rt > nt) throw std::invalid_argument("time interval too short for the temporal kernel");
    const int ring = 2 * rt + 1;
    std::vector<std::array<std::array<Vec, 3>, 2>> SV(ring);
    std::vector<int> SV_level(ring, -1);
    std::vector<Vec> UE(ring), U0(ring);
    auto reflect = [nt](int m) { return m < 0 ? -m : m > nt ? 2 * nt - m : m; };

    Vec ue_prev = Vec::Zero(g.size()), u0_prev = Vec::Zero(g.size());
    const int half = (g.n - 1) / 2;

    auto emit = [&](int m) {
        std::array<std::array<Vec, 3>, 2> S;
        for (auto& a : S)
            for (auto& v : a) v = Vec::Zero(g.size());
        for (size_t q = 0; q < mol.time_offset.size(); ++q) {
            const int l = reflect(m + mol.time_offset[q]);
            const int slot = l % ring;
            if (SV_level[slot] != l) throw std::logic_error("smoothing window out of order");
            for (int j = 0; j < 2; ++j)
                for (int c = 0; c < 3; ++c) S[j][c] += mol.time_weight[q] * SV[slot][j][c];
        }
        const Vec& uem = UE[m % ring];
        const Vec& u0m = U0[m % ring];
        Vec w = Vec::Zero(g.size());
        for (int i = in.i0; i <= in.i1; ++i)
            for (int k = in.k0; k <= in.k1; ++k) {
                const Index p = g.idx(i, k);
                double v = uem(p) - u0m(p);
                for (int j = 0; j < 2; ++j) {
                    v -= eps * cs.chi(j, i, k, m) * S[j][0](p);
                    for (int a = 0; a < 2; ++a) v -= eps * eps * cs.phi_time(a, j, i, k, m) * S[j][1 + a](p);
                }
                w(p) = v;
            }
        if (m == 0) rec.w_initial = w.cwiseAbs().maxCoeff();
        rec.w_LinfL2 = std::max(rec.w_LinfL2, std::sqrt(spatial_power_integral(w, g, in, 2.0)));
        wgrad.add(grad_sq_integral(w, g, in), m, nt, g.tau);
        const Vec d = uem - u0m;
        rec.diff_LinfL2 = std::max(rec.diff_LinfL2, std::sqrt(spatial_power_integral(d, g, in, 2.0)));
        dgrad.add(grad_sq_integral(d, g, in), m, nt, g.tau);
        if (obs && obs->level) obs->level(m, uem, u0m, w);
    };

    int next_out = 0;
    for (int n = 0; n <= nt; ++n) {
        const double t = n * g.tau;
        const Vec f = sample_source(g, setup.source.f, t);
        Vec uen = ue_prev, u0n = u0_prev;
        if (n > 0) {
            uen = ue.step(ue_prev, f, t);
            u0n = u0s.step(u0_prev, f, t);
        }
        const Vec ft = sample_source(g, setup.source.ft, t);
        const bool endpoint = n == 0 || n == nt;
        errL4.add_level(uen - u0n, endpoint);
        fL2.add_level(f, endpoint);
        ftL2.add_level(ft, endpoint);
        ue_linf = std::max(ue_linf, std::sqrt(spatial_power_integral(uen, g, all, 2.0)));
        uegrad.add(grad_sq_integral(uen, g, all), n, nt, g.tau);

        double jump = 0.0;
        const std::array<Vec, 2> U = transformed_gradient_impl(g, prof, u0n, &jump);
        rec.tangential_jump = std::max(rec.tangential_jump, jump);
        if (n > 0) {
            const Vec dt = (u0n - u0_prev) / g.tau;
            const double et = eta.eta_tilde(t);
            etat.add(et * et * grad_sq_integral(dt, g, all), n, nt, g.tau);
        }

        // W^{2,1}_2 of u~0: value, transformed gradient, transformed Hessian, time derivative
        {
            double s = 0.0;
            const Vec dt = n > 0 ? Vec((u0n - u0_prev) / g.tau) : Vec::Zero(g.size());
            for (int i = 1; i + 1 < g.n; ++i) {
                if (i == half) continue;
                const int side = InterfaceProfile::side(g.x(i));
                const double J = side == InterfaceProfile::kPlus ? detP : detM;
                const Mat2& Gi = prof.grad_inv[side];
                const bool hess = !(i == half - 1 || i == half + 1);
                for (int k = 1; k + 1 < g.n; ++k) {
                    const Index p = g.idx(i, k);
                    double e = u0n(p) * u0n(p) + U[0](p) * U[0](p) + U[1](p) * U[1](p) + dt(p) * dt(p);
                    if (hess) {
                        auto at = [&](int a, int b) { return u0n(g.idx(a, b)); };
                        Mat2 H;
                        H(0, 0) = (at(i + 1, k) - 2 * at(i, k) + at(i - 1, k)) / h2;
                        H(1, 1) = (at(i, k + 1) - 2 * at(i, k) + at(i, k - 1)) / h2;
                        H(0, 1) = H(1, 0) =
                            (at(i + 1, k + 1) - at(i + 1, k - 1) - at(i - 1, k + 1) + at(i - 1, k - 1)) / (4 * h2);
                        e += (Gi * H * Gi.transpose()).squaredNorm();
                    }
                    s += e * J * h2;
                }
            }
            w21.add(s, n, nt, g.tau);
        }

        // Lipschitz probe
        {
            const double t2 = spec.T - 4 * r * r, t1 = spec.T - r * r;
            if (n > 0 && t > t2 - 1e-12) {
                for (int i = 0; i + 1 < g.n; ++i)
                    for (int k = 0; k + 1 < g.n; ++k) {
                        const double rr = std::hypot(g.x(i), g.x(k));
                        if (rr > 2 * r + 1e-12) continue;
                        const Index p = g.idx(i, k);
                        lip_u += uen(p) * uen(p);
                        lip_f += std::pow(std::abs(f(p)), pexp);
                        ++lip_count;
                        if (rr <= r + 1e-12 && t >= t1 - 1e-12) {
                            const double g1 = (uen(g.idx(i + 1, k)) - uen(p)) / g.h;
                            const double g2 = (uen(g.idx(i, k + 1)) - uen(p)) / g.h;
                            lip_sup = std::max(lip_sup, std::hypot(g1, g2));
                        }
                    }
            }
        }

        // spatial smoothing of eta U~0 on the measurement window
        const int slot = n % ring;
        const double et = eta.eta(t);
        for (int j = 0; j < 2; ++j) {
            const Vec V = et * U[j];
            for (int c = 0; c < 3; ++c) SV[slot][j][c] = smooth_x(g, mol, V, c - 1, in);
        }
        SV_level[slot] = n;
        UE[slot] = uen;
        U0[slot] = u0n;

        while (next_out <= n - rt) emit(next_out++);
        ue_prev = std::move(uen);
        u0_prev = std::move(u0n);
    }
    while (next_out <= nt) emit(next_out++);

    rec.err_L4 = errL4.value();
    rec.f_L2 = fL2.value();
    rec.ft_L2 = ftL2.value();
    rec.w_gradL2 = std::sqrt(wgrad.sum);
    rec.diff_gradL2 = std::sqrt(dgrad.sum);
    rec.energy_ratio = rec.f_L2 > 0 ? (ue_linf + std::sqrt(uegrad.sum)) / rec.f_L2 : 0.0;
    rec.eta_tilde_ratio = rec.f_L2 > 0 ? eps * std::sqrt(etat.sum) / (rec.f_L2 + eps * rec.ft_L2) : 0.0;
    rec.w21_ratio = rec.f_L2 > 0 ? std::sqrt(w21.sum) / rec.f_L2 : 0.0;
    rec.lip_sup_grad = lip_sup;
    if (lip_count > 0) {
        rec.lip_u_avg = std::sqrt(lip_u / lip_count);
        rec.lip_f_avg = std::pow(lip_f / lip_count, 1.0 / pexp);
        const double scale = rec.lip_u_avg / r + r * rec.lip_f_avg;
        rec.lip_ratio = scale > 0 ? lip_sup / scale : 0.0;
    }
    rec.iterations = ue.iterations() + u0s.iterations();
    return rec;
}

}  // namespace homog
