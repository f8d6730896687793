#include "homog/stencil.hpp"

#include <stdexcept>

namespace homog {

namespace {

using Triplet = Eigen::Triplet<double>;

void check_sample(const Mat2& A, bool symmetric) {
    if (symmetric && std::abs(A(0, 1) - A(1, 0)) > 1e-14 * A.cwiseAbs().maxCoeff())
        throw std::invalid_argument("coefficient sample is not symmetric");
    if (!(A(0, 0) > 0.0) || !(A.determinant() > 0.0))
        throw std::invalid_argument("coefficient sample is not elliptic");
}

// Adds the spatial stencil of one time level; id(i, k) maps lattice nodes to matrix indices.
template <typename Id>
void add_spatial(std::vector<Triplet>& trip, const Axis& a0, const Axis& a1, const Sampler& coeff, double t,
                 bool symmetric, Id id) {
    const double h0 = a0.h, h1 = a1.h;
    for (int i = 0; i < a0.n; ++i) {
        const bool has_i = a0.periodic || i + 1 < a0.n;
        const int ip = a0.wrap(i + 1);
        const double x = a0.coord(i);
        for (int k = 0; k < a1.n; ++k) {
            const bool has_k = a1.periodic || k + 1 < a1.n;
            const int kp = a1.wrap(k + 1);
            const double y = a1.coord(k);
            const Index p = id(i, k);
            if (has_i) {
                const Mat2 A = coeff(x + 0.5 * h0, y, t);
                check_sample(A, symmetric);
                const double c = A(0, 0) / (h0 * h0);
                const Index q = id(ip, k);
                trip.emplace_back(p, p, c);
                trip.emplace_back(q, q, c);
                trip.emplace_back(p, q, -c);
                trip.emplace_back(q, p, -c);
            }
            if (has_k) {
                const Mat2 A = coeff(x, y + 0.5 * h1, t);
                check_sample(A, symmetric);
                const double c = A(1, 1) / (h1 * h1);
                const Index q = id(i, kp);
                trip.emplace_back(p, p, c);
                trip.emplace_back(q, q, c);
                trip.emplace_back(p, q, -c);
                trip.emplace_back(q, p, -c);
            }
            if (has_i && has_k) {
                const Mat2 Ac = coeff(x + 0.5 * h0, y + 0.5 * h1, t);
                const double a12 = Ac(0, 1), a21 = Ac(1, 0);
                if (a12 == 0.0 && a21 == 0.0) continue;
                // corners a=(i,k) b=(i+1,k) c=(i,k+1) d=(i+1,k+1)
                const Index n[4] = {p, id(ip, k), id(i, kp), id(ip, kp)};
                const double v1[4] = {-1, 1, -1, 1}, v2[4] = {-1, -1, 1, 1};
                const double s = 1.0 / (4.0 * h0 * h1);
                for (int r = 0; r < 4; ++r)
                    for (int q = 0; q < 4; ++q) {
                        const double e = s * (a12 * v1[r] * v2[q] + a21 * v2[r] * v1[q]);
                        if (e != 0.0) trip.emplace_back(n[r], n[q], e);
                    }
            }
        }
    }
}

}  // namespace

SpMat assemble_spatial(const Axis& a0, const Axis& a1, const Sampler& A, double t, bool symmetric) {
    std::vector<Triplet> trip;
    trip.reserve(size_t(a0.n) * a1.n * 17);
    add_spatial(trip, a0, a1, A, t, symmetric, [&](int i, int k) { return Index(i) * a1.n + k; });
    SpMat L(Index(a0.n) * a1.n, Index(a0.n) * a1.n);
    L.setFromTriplets(trip.begin(), trip.end());
    L.prune(0.0);
    return L;
}

SpMat assemble_divergence_form(const Grid3& g, const Sampler& A, bool symmetric) {
    std::vector<Triplet> trip;
    trip.reserve(size_t(g.size()) * 19);
    const Axis& at = g.ax[2];
    for (int m = 0; m < at.n; ++m) {
        const double s = at.coord(m);
        add_spatial(trip, g.ax[0], g.ax[1], A, s, symmetric, [&](int i, int k) { return g.idx(i, k, m); });
    }
    const double it = 1.0 / at.h;
    for (int i = 0; i < g.ax[0].n; ++i)
        for (int k = 0; k < g.ax[1].n; ++k)
            for (int m = 0; m < at.n; ++m) {
                const Index p = g.idx(i, k, m);
                trip.emplace_back(p, p, it);
                trip.emplace_back(p, g.idx(i, k, at.wrap(m - 1)), -it);
            }
    SpMat M(g.size(), g.size());
    M.setFromTriplets(trip.begin(), trip.end());
    M.prune(0.0);
    return M;
}

namespace {

template <typename Id>
void add_axis_laplacian(std::vector<Triplet>& trip, const Grid3& g, int axis, Id id) {
    const Axis& a = g.ax[axis];
    const double c = 1.0 / (a.h * a.h);
    for (int i = 0; i < g.ax[0].n; ++i)
        for (int k = 0; k < g.ax[1].n; ++k)
            for (int m = 0; m < g.ax[2].n; ++m) {
                int j[3] = {i, k, m};
                if (!a.periodic && j[axis] + 1 >= a.n) continue;
                const Index p = id(j[0], j[1], j[2]);
                j[axis] = a.wrap(j[axis] + 1);
                const Index q = id(j[0], j[1], j[2]);
                trip.emplace_back(p, p, c);
                trip.emplace_back(q, q, c);
                trip.emplace_back(p, q, -c);
                trip.emplace_back(q, p, -c);
            }
}

}  // namespace

SpMat assemble_laplacian3(const Grid3& g) {
    std::vector<Triplet> trip;
    trip.reserve(size_t(g.size()) * 12);
    auto id = [&](int i, int k, int m) { return g.idx(i, k, m); };
    for (int axis = 0; axis < 3; ++axis) add_axis_laplacian(trip, g, axis, id);
    SpMat L(g.size(), g.size());
    L.setFromTriplets(trip.begin(), trip.end());
    return L;
}

SpMat assemble_transverse_laplacian(const Grid3& g) {
    Grid3 t = g;
    t.ax[0] = {1, g.ax[0].h, 0, true};
    std::vector<Triplet> trip;
    auto id = [&](int, int k, int m) { return Index(k) * g.ax[2].n + m; };
    add_axis_laplacian(trip, t, 1, id);
    add_axis_laplacian(trip, t, 2, id);
    const Index n = Index(g.ax[1].n) * g.ax[2].n;
    SpMat L(n, n);
    L.setFromTriplets(trip.begin(), trip.end());
    return L;
}

FaceFlux face_fluxes(const Grid3& g, const Sampler& coeff, const Vec& u, const Vec2& slope) {
    const Axis &a0 = g.ax[0], &a1 = g.ax[1], &at = g.ax[2];
    const double h0 = a0.h, h1 = a1.h;
    FaceFlux out{Vec::Zero(g.size()), Vec::Zero(g.size())};
    for (int m = 0; m < at.n; ++m) {
        const double s = at.coord(m);
        auto U = [&](int i, int k) { return u(g.idx(a0.wrap(i), a1.wrap(k), m)); };
        // cell-centred mixed flux contributions: A12 * (averaged transverse gradient)
        auto cell = [&](int i, int k, int comp) {
            const double x = a0.coord(i) + 0.5 * h0, y = a1.coord(k) + 0.5 * h1;
            const Mat2 Ac = coeff(x, y, s);
            if (comp == 0) {
                const double g2 = 0.5 * (U(i, k + 1) - U(i, k) + U(i + 1, k + 1) - U(i + 1, k)) / h1 + slope(1);
                return Ac(0, 1) * g2;
            }
            const double g1 = 0.5 * (U(i + 1, k) - U(i, k) + U(i + 1, k + 1) - U(i, k + 1)) / h0 + slope(0);
            return Ac(1, 0) * g1;
        };
        for (int i = 0; i < a0.n; ++i) {
            const bool has_i = a0.periodic || i + 1 < a0.n;
            const bool has_im = a0.periodic || i > 0;
            for (int k = 0; k < a1.n; ++k) {
                const bool has_k = a1.periodic || k + 1 < a1.n;
                const bool has_km = a1.periodic || k > 0;
                const double x = a0.coord(i), y = a1.coord(k);
                const Index p = g.idx(i, k, m);
                if (has_i) {
                    const double a11 = coeff(x + 0.5 * h0, y, s)(0, 0);
                    double f = a11 * ((U(i + 1, k) - U(i, k)) / h0 + slope(0));
                    double c = 0.0;
                    if (has_k) c += 0.5 * cell(i, k, 0);
                    if (has_km) c += 0.5 * cell(i, k - 1, 0);
                    out.F1(p) = f + c;
                }
                if (has_k) {
                    const double a22 = coeff(x, y + 0.5 * h1, s)(1, 1);
                    double f = a22 * ((U(i, k + 1) - U(i, k)) / h1 + slope(1));
                    double c = 0.0;
                    if (has_i) c += 0.5 * cell(i, k, 1);
                    if (has_im) c += 0.5 * cell(i - 1, k, 1);
                    out.F2(p) = f + c;
                }
            }
        }
    }
    return out;
}

void apply_dirichlet(const SpMat& L, const std::vector<char>& fixed, const Vec& g, const Vec& rhs, SpMat& A,
                     Vec& b) {
    const Index n = L.rows();
    std::vector<Triplet> trip;
    trip.reserve(L.nonZeros());
    b = rhs;
    for (Index r = 0; r < n; ++r) {
        if (fixed[r]) {
            trip.emplace_back(r, r, 1.0);
            b(r) = g(r);
            continue;
        }
        for (SpMat::InnerIterator it(L, r); it; ++it) {
            if (fixed[it.col()])
                b(r) -= it.value() * g(it.col());
            else
                trip.emplace_back(r, it.col(), it.value());
        }
    }
    A.resize(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
}

std::vector<char> cylinder_ends(const Grid3& g) {
    std::vector<char> fixed(g.size(), 0);
    const int last = g.ax[0].n - 1;
    for (int k = 0; k < g.ax[1].n; ++k)
        for (int m = 0; m < g.ax[2].n; ++m) {
            fixed[g.idx(0, k, m)] = 1;
            fixed[g.idx(last, k, m)] = 1;
        }
    return fixed;
}

Vec row_sums(const SpMat& L) { return L * Vec::Ones(L.cols()); }

}  // namespace homog

namespace homog {

Vec flux_divergence(const Grid3& g, const FaceFlux& F) {
    const Axis &a0 = g.ax[0], &a1 = g.ax[1];
    Vec d(g.size());
    for (int i = 0; i < a0.n; ++i)
        for (int k = 0; k < a1.n; ++k)
            for (int m = 0; m < g.ax[2].n; ++m) {
                const Index p = g.idx(i, k, m);
                const double l1 = (a0.periodic || i > 0) ? F.F1(g.idx(a0.wrap(i - 1), k, m)) : 0.0;
                const double l2 = (a1.periodic || k > 0) ? F.F2(g.idx(i, a1.wrap(k - 1), m)) : 0.0;
                d(p) = (F.F1(p) - l1) / a0.h + (F.F2(p) - l2) / a1.h;
            }
    return d;
}

}  // namespace homog
