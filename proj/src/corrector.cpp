#include "homog/corrector.hpp"

#include "homog/fields.hpp"
#include "homog/poisson.hpp"
#include "homog/solver.hpp"
#include "homog/stencil.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace homog {

Medium build_medium(const PeriodicCoefficientField& A, int ny, int ns, double tol) {
    Medium m;
    m.A = A;
    m.cell = solve_cells(A, ny, ns, tol);
    m.dual = periodic_dual(A, m.cell);
    return m;
}

namespace {

Sampler two_sided_sampler(const TwoSided& A) {
    return [A](double y1, double y2, double s) { return A(y1, y2, s); };
}

Vec on_cyl(const Medium& m, const Vec& v, const Grid3& cyl) { return periodic_to_cylinder(m.cell.grid, v, cyl); }

void check_media(const Medium& plus, const Medium& minus, const Grid3& cyl) {
    for (const Medium* m : {&plus, &minus}) {
        const Grid3& t = m->cell.grid;
        if (t.ax[0].n != cyl.ax[1].n || t.ax[2].n != cyl.ax[2].n)
            throw std::invalid_argument("periodic media and cylinder resolutions differ");
        if (m->dual.f[0][0].size() != t.size()) throw std::invalid_argument("periodic dual correctors missing");
    }
}

// sum_l v_l d_l P_j on the plus side
Vec plus_combination(const InterfaceProfile& p, const Medium& m, const Grid3& cyl, int j,
                     const std::array<Vec, 2>& v) {
    Vec out = Vec::Zero(cyl.size());
    for (int l = 0; l < 2; ++l) {
        const double c = p.grad[InterfaceProfile::kPlus](l, j);
        if (c != 0.0) out += c * on_cyl(m, v[l], cyl);
    }
    return out;
}

Vec axial(const Grid3& g, double (CutoffPair::*fn)(double) const, const CutoffPair& cut) {
    return axial_field(g, [&](double y) { return (cut.*fn)(y); });
}

// nodal P_j minus its constant-slope part e_j
Vec profile_bend(const Grid3& g, const InterfaceProfile& p, int j) {
    const double th = p.theta(j);
    return axial_field(g, [th](double y1) { return th * std::max(y1, 0.0); });
}

// slice mean of the x1-face flux at face index i
double face_flux(const Grid3& g, const Vec& F1, int i) {
    const Index slice = Index(g.ax[1].n) * g.ax[2].n;
    return F1.segment(i * slice, slice).mean();
}

}  // namespace

Vec interface_periodic_part(const InterfaceProfile& profile, const CutoffPair& cut, const Medium& plus,
                            const Medium& minus, const Grid3& cyl, int j) {
    check_media(plus, minus, cyl);
    const Vec psiP = axial(cyl, &CutoffPair::plus, cut), psiM = axial(cyl, &CutoffPair::minus, cut);
    const Vec dpsiP = axial(cyl, &CutoffPair::dplus, cut), dpsiM = axial(cyl, &CutoffPair::dminus, cut);
    const std::array<Vec, 2> phiP{plus.dual.phi[2][0][0], plus.dual.phi[2][0][1]};
    Vec V = psiP.cwiseProduct(plus_combination(profile, plus, cyl, j, plus.cell.chi)) +
            psiM.cwiseProduct(on_cyl(minus, minus.cell.chi[j], cyl)) +
            dpsiP.cwiseProduct(plus_combination(profile, plus, cyl, j, phiP)) +
            dpsiM.cwiseProduct(on_cyl(minus, minus.dual.phi[2][0][j], cyl));
    return V;
}

std::array<Vec, 2> assemble_interface_source(const TwoSided& A, const InterfaceProfile& profile,
                                             const CutoffPair& cut, const Medium& plus, const Medium& minus,
                                             const Grid3& cyl, int j) {
    check_media(plus, minus, cyl);
    const int P = InterfaceProfile::kPlus, Mn = InterfaceProfile::kMinus;
    const Vec chiP = plus_combination(profile, plus, cyl, j, plus.cell.chi);
    const Vec chiM = on_cyl(minus, minus.cell.chi[j], cyl);
    const std::array<Vec, 2> phiP3{plus.dual.phi[2][0][0], plus.dual.phi[2][0][1]};
    Vec q = Vec::Zero(cyl.size());  // psi'+ phi+_(d+1)1l dP + psi'- phi-_(d+1)1j
    std::array<Vec, 2> phik;        // psi'+ phi+_k1l dP + psi'- phi-_k1j
    const Vec dpsiP = axial(cyl, &CutoffPair::dplus, cut), dpsiM = axial(cyl, &CutoffPair::dminus, cut);
    q = dpsiP.cwiseProduct(plus_combination(profile, plus, cyl, j, phiP3)) +
        dpsiM.cwiseProduct(on_cyl(minus, minus.dual.phi[2][0][j], cyl));
    for (int k = 0; k < 2; ++k) {
        const std::array<Vec, 2> pk{plus.dual.phi[k][0][0], plus.dual.phi[k][0][1]};
        phik[k] = dpsiP.cwiseProduct(plus_combination(profile, plus, cyl, j, pk)) +
                  dpsiM.cwiseProduct(on_cyl(minus, minus.dual.phi[k][0][j], cyl));
    }
    std::array<Vec, 2> gq;
    for (int k = 0; k < 2; ++k) gq[k] = 0.5 * (diff_forward(cyl, q, k) + diff_backward(cyl, q, k));

    std::array<Vec, 2> out{Vec::Zero(cyl.size()), Vec::Zero(cyl.size())};
    for (int i = 0; i < cyl.ax[0].n; ++i) {
        const double y1 = cyl.ax[0].coord(i);
        const double pp = cut.plus(y1), pm = cut.minus(y1), dp = cut.dplus(y1), dm = cut.dminus(y1);
        Vec2 gradP = profile.grad[profile.side(y1)].col(j);
        Mat2 Ah = profile.Ahat(y1);
        if (y1 == 0.0) {
            gradP = 0.5 * (profile.grad[P].col(j) + profile.grad[Mn].col(j));
            Ah = 0.5 * (profile.Ahat_plus + profile.Ahat_minus);
        }
        for (int k = 0; k < cyl.ax[1].n; ++k)
            for (int m = 0; m < cyl.ax[2].n; ++m) {
                const Index p = cyl.idx(i, k, m);
                const Mat2 a = A(y1, cyl.ax[1].coord(k), cyl.ax[2].coord(m));
                const Vec2 e1 = a.col(0);
                Vec2 v = (1.0 - pp - pm) * (a - Ah) * gradP + e1 * (dp * chiP(p) + dm * chiM(p));
                v += Vec2(phik[0](p), phik[1](p));
                v += a * Vec2(gq[0](p), gq[1](p));
                out[0](p) = v(0);
                out[1](p) = v(1);
            }
    }
    return out;
}

InterfaceCorrector solve_interface_corrector(const TwoSided& A, const InterfaceProfile& profile,
                                             const CutoffPair& cut, const Medium& plus, const Medium& minus,
                                             double R, double tol) {
    if (R < 4.0) throw std::invalid_argument("cylinder half-length must be at least 4");
    const int ny = plus.cell.grid.ax[0].n, ns = plus.cell.grid.ax[2].n;
    InterfaceCorrector c;
    c.grid = cylinder_grid(R, ny, ns);
    const Grid3& g = c.grid;
    check_media(plus, minus, g);
    const Sampler S = two_sided_sampler(A);
    const SpMat M = assemble_divergence_form(g, S);
    const std::vector<char> fixed = cylinder_ends(g);
    const Index slice = Index(g.ax[1].n) * g.ax[2].n;
    const int n0 = g.ax[0].n, probe = g.ax[0].zero + (n0 - 1 - g.ax[0].zero) / 2;

    const auto precond = fourier_preconditioner(S, g);

    // homogeneous solution with w1(-R) = 0, w1(R) = 1
    Vec end = Vec::Zero(g.size());
    end.tail(slice).setOnes();
    SparseSystem sys1;
    sys1.precond = precond;
    apply_dirichlet(M, fixed, end, Vec::Zero(g.size()), sys1.A, sys1.b);
    const Vec w1 = solve_sparse(sys1, tol);
    const double flux1 = face_flux(g, face_fluxes(g, S, w1, Vec2::Zero()).F1, probe);

    for (int j = 0; j < 2; ++j) {
        c.V[j] = interface_periodic_part(profile, cut, plus, minus, g, j);
        const Vec pn = c.V[j] + profile_bend(g, profile, j);
        const Vec slope_div = flux_divergence(g, face_fluxes(g, S, Vec::Zero(g.size()), Vec2::Unit(j)));
        Vec src = slope_div - M * pn;
        double leak = 0.0;
        for (int i = 0; i < n0; ++i)
            if (std::abs(g.ax[0].coord(i)) > 1.0 + 1e-12) {
                // end rows are replaced by the boundary data
                if (i > 0 && i + 1 < n0) leak = std::max(leak, src.segment(i * slice, slice).cwiseAbs().maxCoeff());
                src.segment(i * slice, slice).setZero();
            }
        c.leak[j] = leak;
        c.source[j] = src;

        SparseSystem sys0;
        sys0.precond = precond;
        apply_dirichlet(M, fixed, Vec::Zero(g.size()), src, sys0.A, sys0.b);
        const Vec w0 = solve_sparse(sys0, tol);
        const double flux0 = face_flux(g, face_fluxes(g, S, w0, Vec2::Zero()).F1, probe);
        const double K = -flux0 / flux1;
        Vec w = w0 + K * w1;
        c.end_value[j] = K;
        w.array() -= mean_over_unit_block(g, w);
        c.w[j] = w;
        c.chi[j] = c.V[j] + w;

        // residual of (D_s + L)(P_j + chi_j) = 0 away from the truncation ends
        const Vec r = M * (c.chi[j] + profile_bend(g, profile, j)) - slope_div;
        const Vec r0 = M * pn - slope_div;
        double num = 0.0, den = 0.0;
        for (int i = 1; i + 1 < n0; ++i) {
            if (std::abs(g.ax[0].coord(i)) > R - 2.0 + 1e-12) continue;
            num += r.segment(i * slice, slice).squaredNorm();
            den += r0.segment(i * slice, slice).squaredNorm();
        }
        c.residual[j] = den > 0 ? std::sqrt(num / den) : std::sqrt(num);
    }
    return c;
}

double SliceFlux::max_abs() const {
    double m = 0.0;
    for (double f : flux) m = std::max(m, std::abs(f));
    return m;
}

SliceFlux flux_constancy_check(const Grid3& cyl, const TwoSided& A, const Vec& w) {
    const FaceFlux F = face_fluxes(cyl, two_sided_sampler(A), w, Vec2::Zero());
    SliceFlux out;
    for (int i = 0; i + 1 < cyl.ax[0].n; ++i) {
        const double y = cyl.ax[0].coord(i) + 0.5 * cyl.ax[0].h;
        if (std::abs(y) <= 1.0) continue;
        out.y1.push_back(y);
        out.flux.push_back(face_flux(cyl, F.F1, i));
    }
    return out;
}

namespace {

// |grad_(y,s) w|^2 per node from forward differences
Vec energy_density(const Grid3& g, const Vec& w, bool with_time = true) {
    Vec e = Vec::Zero(w.size());
    for (int a = 0; a < (with_time ? 3 : 2); ++a) e += diff_forward(g, w, a).cwiseAbs2();
    return e;
}

void fit_line(DecayFit& fit) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    int n = 0;
    for (size_t k = 0; k < fit.slab.size(); ++k) {
        if (!fit.used[k]) continue;
        const double x = fit.slab[k], y = std::log(fit.energy[k]);
        sx += x, sy += y, sxx += x * x, sxy += x * y, syy += y * y;
        ++n;
    }
    if (n < 2) {
        fit.below_floor = true;
        return;
    }
    const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
    const double slope = cxy / vx;
    fit.lambda = -slope;
    fit.r2 = vy > 0 ? cxy * cxy / (vx * vy) : 1.0;
}

}  // namespace

DecayReport fit_decay(const Grid3& cyl, const Vec& w, double floor) {
    DecayReport rep;
    rep.floor = floor;
    const Vec e = energy_density(cyl, w);
    const Index slice = Index(cyl.ax[1].n) * cyl.ax[2].n;
    const double h = cyl.ax[0].h, vol = cyl.cell_volume();
    const int R = int(std::floor(-cyl.ax[0].coord(0) + 1e-9));
    for (int s = 0; s < 2; ++s) {
        DecayFit& fit = rep.side[s];
        for (int n = 1; n <= R - 2; ++n) {
            const double lo = s == InterfaceProfile::kPlus ? n : -n - 1.0;
            double E = 0.0;
            for (int i = 0; i < cyl.ax[0].n; ++i) {
                const double y = cyl.ax[0].coord(i);
                if (y >= lo - 1e-12 && y <= lo + 1.0 - 0.5 * h) E += e.segment(i * slice, slice).sum() * vol;
            }
            fit.slab.push_back(n);
            fit.energy.push_back(E);
            fit.used.push_back(E >= floor);
        }
        for (size_t k = 1; k < fit.energy.size(); ++k)
            if (fit.energy[k] > fit.energy[k - 1] && fit.used[k]) fit.monotone = false;
        fit_line(fit);
    }
    return rep;
}

double gradient_norm(const Grid3& cyl, const Vec& w, bool with_time) {
    return std::sqrt(energy_density(cyl, w, with_time).sum() * cyl.cell_volume());
}

double time_derivative_energy(const Grid3& cyl, const Vec& w) {
    const Vec ws = diff_backward(cyl, w, 2);
    return l2_norm(cyl, ws) + gradient_norm(cyl, ws, false);
}

double l2_norm(const Grid3& cyl, const Vec& v) { return std::sqrt(v.squaredNorm() * cyl.cell_volume()); }

void write_field_binary(const std::string& path, const Grid3& g, const Vec& v) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    for (int a = 0; a < 3; ++a) {
        const std::int32_t n = g.ax[a].n;
        os.write(reinterpret_cast<const char*>(&n), sizeof n);
    }
    for (int a = 0; a < 3; ++a) {
        const std::int32_t z = g.ax[a].zero;
        os.write(reinterpret_cast<const char*>(&z), sizeof z);
    }
    for (int a = 0; a < 3; ++a) os.write(reinterpret_cast<const char*>(&g.ax[a].h), sizeof(double));
    os.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * sizeof(double)));
}

Vec read_field_binary(const std::string& path, Grid3& g) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path);
    std::int32_t n[3], z[3];
    double h[3];
    is.read(reinterpret_cast<char*>(n), sizeof n);
    is.read(reinterpret_cast<char*>(z), sizeof z);
    is.read(reinterpret_cast<char*>(h), sizeof h);
    for (int a = 0; a < 3; ++a) g.ax[a] = {n[a], h[a], z[a], !(a == 0 && z[a] != 0)};
    Vec v(g.size());
    is.read(reinterpret_cast<char*>(v.data()), std::streamsize(v.size() * sizeof(double)));
    if (!is) throw std::runtime_error("truncated field file " + path);
    return v;
}

}  // namespace homog
