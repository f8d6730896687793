#include "homog/dual.hpp"

#include "homog/corrector.hpp"
#include "homog/fields.hpp"
#include "homog/stencil.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace homog {

namespace {

// Face-located and nodal flux components i < 2 of the field u + slope, minus the constant c_i(y1).
void fill_flux(FluxField& out, const Grid3& g, const FaceFlux& F, int j, const std::function<double(double)>& c0,
               const std::function<double(double)>& c1) {
    for (int i = 0; i < 2; ++i) {
        const Vec& Fi = i == 0 ? F.F1 : F.F2;
        const Vec c = axial_field(g, i == 0 ? c0 : c1);
        out.B[i][j] = Fi - c;
        out.nodal[i][j] = faces_to_nodes(g, Fi, i) - c;
    }
}

}  // namespace

FluxField periodic_flux(const PeriodicCoefficientField& A, const CellSolution& cell) {
    const Grid3& g = cell.grid;
    FluxField out{g, Convention::Periodic, {}, {}};
    for (int j = 0; j < 2; ++j) {
        const FaceFlux F = face_fluxes(g, A.A, cell.chi[j], Vec2::Unit(j));
        const double a0 = cell.Ahat(0, j), a1 = cell.Ahat(1, j);
        fill_flux(out, g, F, j, [a0](double) { return a0; }, [a1](double) { return a1; });
        out.B[2][j] = -cell.chi[j];
        out.nodal[2][j] = -cell.chi[j];
    }
    return out;
}

void check_zero_mean(const FluxField& B) {
    for (int I = 0; I < 3; ++I)
        for (int j = 0; j < 2; ++j) {
            const Vec& b = B.B[I][j];
            const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
            if (std::abs(b.mean()) > 1e-9 * scale) {
                std::ostringstream os;
                os << "flux component B(" << I + 1 << "," << j + 1 << ") has non-zero mean " << b.mean();
                throw std::runtime_error(os.str());
            }
        }
}

PerKIj<Vec> antisymmetric_gradient(const Grid3& g, const PerIj<Vec>& f) {
    PerKIj<Vec> D;  // D[K][I][j] = D+_K f_Ij
    for (int K = 0; K < 3; ++K)
        for (int I = 0; I < 3; ++I)
            for (int j = 0; j < 2; ++j) D[K][I][j] = diff_forward(g, f[I][j], K);
    PerKIj<Vec> phi;
    for (int K = 0; K < 3; ++K)
        for (int I = 0; I < 3; ++I)
            for (int j = 0; j < 2; ++j) phi[K][I][j] = D[K][I][j] - D[I][K][j];
    return phi;
}

DualCorrectorSet periodic_dual(const PeriodicCoefficientField& A, const CellSolution& cell) {
    DualCorrectorSet d;
    d.grid = cell.grid;
    d.flux = periodic_flux(A, cell);
    check_zero_mean(d.flux);
    const PoissonSolver ps(d.grid);
    for (int I = 0; I < 3; ++I)
        for (int j = 0; j < 2; ++j) {
            const Vec& b = d.flux.B[I][j];
            d.f[I][j] = b.cwiseAbs().maxCoeff() == 0.0 ? Vec::Zero(b.size()) : ps.solve(b.array() - b.mean());
        }
    d.phi = antisymmetric_gradient(d.grid, d.f);
    return d;
}

namespace {

PerIj<double> mismatch(const DualCorrectorSet& d, const PerIj<Vec>& B, double inner, double skip) {
    const Grid3& g = d.grid;
    const bool cyl = is_cylinder(g);
    const Index slice = Index(g.ax[1].n) * g.ax[2].n;
    PerIj<double> out{};
    for (int I = 0; I < 3; ++I)
        for (int j = 0; j < 2; ++j) {
            Vec r = -B[I][j];
            for (int K = 0; K < 3; ++K) r += diff_backward(g, d.phi[K][I][j], K);
            double m = 0.0;
            for (int i = 0; i < g.ax[0].n; ++i) {
                if (cyl && (i == 0 || i == g.ax[0].n - 1)) continue;
                const double y = std::abs(g.ax[0].coord(i));
                if ((inner >= 0 && y > inner + 1e-12) || y < skip - 1e-12) continue;
                m = std::max(m, r.segment(i * slice, slice).cwiseAbs().maxCoeff());
            }
            out[I][j] = m;
        }
    return out;
}

}  // namespace

PerIj<double> divergence_mismatch(const DualCorrectorSet& d, double inner, double skip) {
    return mismatch(d, d.flux.nodal, inner, skip);
}

PerIj<double> identity_residual(const DualCorrectorSet& d, double inner) { return mismatch(d, d.flux.B, inner, 0.0); }

double max_entry(const PerIj<double>& m) {
    double r = 0.0;
    for (const auto& row : m)
        for (double v : row) r = std::max(r, v);
    return r;
}

Vec poisson_cylinder_split(const Grid3& cyl, const Vec& g, SourceKind kind, const PoissonSolver& solver,
                           SplitParts* parts) {
    if (!is_cylinder(cyl)) throw std::invalid_argument("poisson_cylinder_split needs a cylinder grid");
    const Index slice = Index(cyl.ax[1].n) * cyl.ax[2].n;
    const int n0 = cyl.ax[0].n;
    Vec u;
    if (kind == SourceKind::Compact) {
        const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
        for (int i = 0; i < n0; ++i)
            if (std::abs(cyl.ax[0].coord(i)) > 1.0 + 1e-12 &&
                g.segment(i * slice, slice).cwiseAbs().maxCoeff() > 1e-12 * scale)
                throw std::invalid_argument("compact source has support outside |y1| <= 1");
        u = solver.solve(g);
    } else {
        const Vec f1 = slice_means(cyl, g);
        Vec f2 = g;
        for (int i = 0; i < n0; ++i) f2.segment(i * slice, slice).array() -= f1(i);
        // discrete double antiderivative anchored at y1 = 0: D+D- N1 = f1
        const int z = cyl.ax[0].zero;
        const double h2 = cyl.ax[0].h * cyl.ax[0].h;
        Vec n1 = Vec::Zero(n0);
        if (z + 1 < n0) n1(z + 1) = 0.5 * h2 * f1(z);
        if (z - 1 >= 0) n1(z - 1) = 0.5 * h2 * f1(z);
        for (int i = z + 1; i + 1 < n0; ++i) n1(i + 1) = 2.0 * n1(i) - n1(i - 1) + h2 * f1(i);
        for (int i = z - 1; i - 1 >= 0; --i) n1(i - 1) = 2.0 * n1(i) - n1(i + 1) + h2 * f1(i);
        Vec N1(g.size());
        for (int i = 0; i < n0; ++i) N1.segment(i * slice, slice).setConstant(n1(i));
        const Vec N2 = solver.solve_transverse(f2);
        // g = (0, D+_2 N2, D+_s N2), re-solved with its backward divergence as source
        const Vec div = diff_backward(cyl, diff_forward(cyl, N2, 1), 1) + diff_backward(cyl, diff_forward(cyl, N2, 2), 2);
        const Vec N2t = solver.solve(div);
        u = N1 + N2t;
        if (parts) *parts = {N1, N2, N2t};
    }
    u.array() -= mean_over_unit_block(cyl, u);
    return u;
}

namespace {

// Columns of grad P on each side; minus side is the identity.
double dP(const InterfaceProfile& p, int side, int l, int j) { return p.grad[side](l, j); }

}  // namespace

FluxField interface_flux(const TwoSided& A, const InterfaceProfile& profile, const InterfaceCorrector& corr) {
    const Grid3& g = corr.grid;
    FluxField out{g, Convention::Interface, {}, {}};
    const Sampler S = [&A](double y1, double y2, double s) { return A(y1, y2, s); };
    for (int j = 0; j < 2; ++j) {
        const double th = profile.theta(j);
        const Vec u = corr.chi[j] + axial_field(g, [th](double y1) { return th * std::max(y1, 0.0); });
        const FaceFlux F = face_fluxes(g, S, u, Vec2::Unit(j));
        const Vec2 cm = profile.Ahat_minus * profile.grad[InterfaceProfile::kMinus].col(j);
        const Vec2 cp = profile.Ahat_plus * profile.grad[InterfaceProfile::kPlus].col(j);
        auto side = [cm, cp](int i) {
            return [=](double y1) { return y1 > 0 ? cp(i) : y1 < 0 ? cm(i) : 0.5 * (cp(i) + cm(i)); };
        };
        fill_flux(out, g, F, j, side(0), side(1));
        out.B[2][j] = -corr.chi[j];
        out.nodal[2][j] = -corr.chi[j];
    }
    return out;
}

DualCorrectorSet interface_dual(const TwoSided& A, const InterfaceProfile& profile, const CutoffPair& cut,
                                const InterfaceCorrector& corr, const Medium& plus, const Medium& minus) {
    const Grid3& g = corr.grid;
    DualCorrectorSet d;
    d.grid = g;
    d.flux = interface_flux(A, profile, corr);
    const PoissonSolver ps(g);
    const SpMat L3 = assemble_laplacian3(g);  // -Delta
    const Vec psiP = axial_field(g, [&](double y) { return cut.plus(y); });
    const Vec psiM = axial_field(g, [&](double y) { return cut.minus(y); });
    const Vec rest = Vec::Ones(g.size()) - psiP - psiM;
    auto lap = [&](const Vec& v) -> Vec { return -(L3 * v); };
    auto on_cyl = [&](const Medium& m, const Vec& v) { return periodic_to_cylinder(m.cell.grid, v, g); };
    const int P = InterfaceProfile::kPlus;

    for (int j = 0; j < 2; ++j)
        for (int I = 0; I < 3; ++I) {
            Vec Qp = Vec::Zero(g.size()), Fp = Vec::Zero(g.size());
            for (int l = 0; l < 2; ++l) {
                const double c = dP(profile, P, l, j);
                if (c == 0.0) continue;
                Qp += c * on_cyl(plus, plus.dual.flux.B[I][l]);
                Fp += c * on_cyl(plus, plus.dual.f[I][l]);
            }
            const Vec Qm = on_cyl(minus, minus.dual.flux.B[I][j]);
            const Vec Fm = on_cyl(minus, minus.dual.f[I][j]);
            const Vec& B = d.flux.B[I][j];

            const Vec M1 = rest.cwiseProduct(B);
            const Vec M2 = psiP.cwiseProduct(B - Qp) + psiM.cwiseProduct(B - Qm);
            const Vec M3 = -(lap(psiP.cwiseProduct(Fp)) - psiP.cwiseProduct(lap(Fp))) -
                           (lap(psiM.cwiseProduct(Fm)) - psiM.cwiseProduct(lap(Fm)));
            const Vec ft = poisson_cylinder_split(g, M1, SourceKind::Compact, ps) +
                           poisson_cylinder_split(g, M2, SourceKind::Integrable, ps) +
                           poisson_cylinder_split(g, M3, SourceKind::Compact, ps);
            Vec f = psiP.cwiseProduct(Fp) + psiM.cwiseProduct(Fm) + ft;
            f.array() -= mean_over_unit_block(g, f);
            d.f[I][j] = std::move(f);
        }
    d.phi = antisymmetric_gradient(g, d.f);
    return d;
}

}  // namespace homog
