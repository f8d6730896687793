#include "homog/smoothing.hpp"

#include "homog/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace homog {

double bump(double r) {
    const double q = 1.0 - 4.0 * r * r;
    return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

double bump_derivative(double r) {
    const double q = 1.0 - 4.0 * r * r;
    return q > 0.0 ? std::exp(-1.0 / q) * (-8.0 * r / (q * q)) : 0.0;
}

Mollifier make_mollifier(double eps, double h, double tau) {
    if (!(eps >= 2.0 * h * (1.0 - 1e-12)))
        throw std::invalid_argument("smoothing scale eps must be at least 2h to resolve the spatial kernel");
    if (!(eps * eps >= 2.0 * tau * (1.0 - 1e-12)))
        throw std::invalid_argument("smoothing scale eps^2 must be at least 2 tau to resolve the temporal kernel");
    Mollifier m;
    m.eps = eps;
    m.h = h;
    m.tau = tau;
    const int rs = int(std::ceil(0.5 * eps / h));
    double mass = 0.0, mom1 = 0.0, mom2 = 0.0;
    for (int a = -rs; a <= rs; ++a)
        for (int b = -rs; b <= rs; ++b) {
            const double r = std::hypot(a * h, b * h) / eps;
            const double w = bump(r);
            if (w <= 0.0) continue;
            const double dr = r > 0.0 ? bump_derivative(r) / r : 0.0;  // radial derivative over r
            m.space.push_back({a, b, w, dr * a, dr * b});
            mass += w;
            mom1 += dr * a * a;
            mom2 += dr * b * b;
        }
    for (auto& t : m.space) {
        t.w /= mass;
        // d/dx_i sum d_o u(x - o) = 1 for u = x_i requires -h sum d_o o_i = 1
        t.d1 = mom1 != 0.0 ? -t.d1 / (h * mom1) : 0.0;
        t.d2 = mom2 != 0.0 ? -t.d2 / (h * mom2) : 0.0;
    }
    const int rt = int(std::ceil(0.5 * eps * eps / tau));
    double tmass = 0.0;
    for (int k = -rt; k <= rt; ++k) {
        const double w = bump(std::abs(k) * tau / (eps * eps));
        if (w <= 0.0) continue;
        m.time_offset.push_back(k);
        m.time_weight.push_back(w);
        tmass += w;
    }
    for (double& w : m.time_weight) w /= tmass;
    return m;
}

Vec smooth_x(const BoxGrid& g, const Mollifier& m, const Vec& u, int deriv) {
    return smooth_x(g, m, u, deriv, whole(g));
}

Vec smooth_x(const BoxGrid& g, const Mollifier& m, const Vec& u, int deriv, const SubBox& window) {
    if (deriv > 1) throw std::invalid_argument("derivative axis must be 0 or 1");
    if (deriv >= 0 && m.space.size() < 2) throw std::invalid_argument("derivative kernel is not resolved");
    Vec out = Vec::Zero(g.size());
    const int n = g.n;
    for (const auto& t : m.space) {
        const double w = deriv < 0 ? t.w : deriv == 0 ? t.d1 : t.d2;
        if (w == 0.0) continue;
        const int i0 = std::max({0, t.di, window.i0}), i1 = std::min({n, n + t.di, window.i1 + 1});
        const int k0 = std::max({0, t.dk, window.k0}), k1 = std::min({n, n + t.dk, window.k1 + 1});
        if (k1 <= k0) continue;
        for (int i = i0; i < i1; ++i)
            out.segment(g.idx(i, k0), k1 - k0) += w * u.segment(g.idx(i - t.di, k0 - t.dk), k1 - k0);
    }
    return out;
}

namespace {

int reflect(int m, int nt) {
    if (m < 0) m = -m;
    if (m > nt) m = 2 * nt - m;
    if (m < 0 || m > nt) throw std::invalid_argument("temporal kernel wider than the time interval");
    return m;
}

}  // namespace

Vec smooth_t(const BoxGrid& g, const Mollifier& m, const SpaceTimeField& u, int n) {
    Vec out = Vec::Zero(g.size());
    for (size_t j = 0; j < m.time_offset.size(); ++j) out += m.time_weight[j] * u[reflect(n + m.time_offset[j], g.nt)];
    return out;
}

SpaceTimeField smooth_x(const BoxGrid& g, const Mollifier& m, const SpaceTimeField& u, int deriv) {
    SpaceTimeField out(u.size());
    for (size_t n = 0; n < u.size(); ++n) out[n] = smooth_x(g, m, u[n], deriv);
    return out;
}

SpaceTimeField smooth_t(const BoxGrid& g, const Mollifier& m, const SpaceTimeField& u) {
    if (int(u.size()) != g.nt + 1) throw std::invalid_argument("field must hold nt + 1 time levels");
    SpaceTimeField out(u.size());
    for (int n = 0; n <= g.nt; ++n) out[n] = smooth_t(g, m, u, n);
    return out;
}

SpaceTimeField smooth(const BoxGrid& g, const Mollifier& m, const SpaceTimeField& u, int deriv) {
    return smooth_t(g, m, smooth_x(g, m, u, deriv));
}

double derivative_bound_ratio(const BoxGrid& g, const Mollifier& m, const SpaceTimeField& u) {
    const double d1 = space_time_norm(smooth(g, m, u, 0), g, 2.0), d2 = space_time_norm(smooth(g, m, u, 1), g, 2.0);
    return m.eps * std::hypot(d1, d2) / space_time_norm(u, g, 2.0);
}

OscillatoryRatios verify_oscillatory_bound(const BoxGrid& g, const Mollifier& m, const SpaceTimeField& gfield,
                                           const std::function<double(double, double, double)>& f) {
    const int q = 32;
    double cell = 0.0;
    for (int a = 0; a < q; ++a)
        for (int b = 0; b < q; ++b)
            for (int c = 0; c < q; ++c) {
                const double v = f((a + 0.5) / q, (b + 0.5) / q, (c + 0.5) / q);
                cell += v * v;
            }
    cell = std::sqrt(cell / (q * q * q));
    const double gnorm = space_time_norm(gfield, g, 2.0);
    OscillatoryRatios r;
    if (cell == 0.0 || gnorm == 0.0) return r;

    std::array<SpaceTimeField, 3> S{smooth(g, m, gfield), smooth(g, m, gfield, 0), smooth(g, m, gfield, 1)};
    const double e = m.eps;
    for (int n = 0; n <= g.nt; ++n) {
        const double s = n * g.tau / (e * e);
        for (int i = 0; i < g.n; ++i)
            for (int k = 0; k < g.n; ++k) {
                const double fe = f(g.x(i) / e, g.x(k) / e, s);
                for (auto& field : S) field[n](g.idx(i, k)) *= fe;
            }
    }
    r.value = space_time_norm(S[0], g, 2.0) / (cell * gnorm);
    r.gradient = e * std::hypot(space_time_norm(S[1], g, 2.0), space_time_norm(S[2], g, 2.0)) / (cell * gnorm);
    return r;
}

ManufacturedField gaussian_field(double width) {
    const double s2 = width * width;
    ManufacturedField F;
    F.G = [s2](double x, double y) { return std::exp(-(x * x + y * y) / s2); };
    F.gradG = [s2](double x, double y) { return Vec2(x, y) * (-2.0 / s2 * std::exp(-(x * x + y * y) / s2)); };
    F.hessG_norm = [s2](double x, double y) {
        const double G = std::exp(-(x * x + y * y) / s2);
        Mat2 H;
        H << 4 * x * x / (s2 * s2) - 2 / s2, 4 * x * y / (s2 * s2), 4 * x * y / (s2 * s2), 4 * y * y / (s2 * s2) - 2 / s2;
        return G * H.norm();
    };
    constexpr double w = 2 * std::numbers::pi;
    F.q = [](double t) { return 1.5 + std::cos(w * t); };
    F.dq = [](double t) { return -w * std::sin(w * t); };
    return F;
}

SmoothingError smoothing_error(const ManufacturedField& F, double eps, double half_width, double t0,
                               double duration) {
    const double h = eps / 8.0, tau = eps * eps / 8.0;
    const Mollifier m = make_mollifier(eps, h, tau);
    // local box wide enough that the kernel never reaches its edge from the window
    const int win = int(std::lround(half_width / h)), pad = int(std::ceil(0.5 * eps / h)) + 1;
    BoxGrid g;
    g.n = 2 * (win + pad) + 1;
    g.h = h;
    g.lo = -(win + pad) * h;
    g.tau = tau;
    const int nt = int(std::lround(duration / tau));
    g.nt = nt;

    std::array<Vec, 2> dG{Vec(g.size()), Vec(g.size())};
    for (int i = 0; i < g.n; ++i)
        for (int k = 0; k < g.n; ++k) {
            const Vec2 d = F.gradG(g.x(i), g.x(k));
            dG[0](g.idx(i, k)) = d(0);
            dG[1](g.idx(i, k)) = d(1);
        }
    // the manufactured field is a product, so S(grad F) = S^x(grad G) S^t(q)
    const std::array<Vec, 2> SdG{smooth_x(g, m, dG[0]), smooth_x(g, m, dG[1])};
    double err2 = 0.0, hess2 = 0.0, dt2 = 0.0;
    for (int n = 0; n <= nt; ++n) {
        const double t = t0 + n * tau;
        double sq = 0.0;
        for (size_t j = 0; j < m.time_offset.size(); ++j) sq += m.time_weight[j] * F.q(t + m.time_offset[j] * tau);
        const double q = F.q(t), dq = F.dq(t);
        for (int i = pad; i < g.n - pad; ++i)
            for (int k = pad; k < g.n - pad; ++k) {
                const Index p = g.idx(i, k);
                for (int a = 0; a < 2; ++a) err2 += std::pow(SdG[a](p) * sq - dG[a](p) * q, 2);
                hess2 += std::pow(F.hessG_norm(g.x(i), g.x(k)) * q, 2);
                dt2 += std::pow(F.G(g.x(i), g.x(k)) * dq, 2);
            }
    }
    const double vol = h * h * tau;
    return {std::sqrt(err2 * vol), std::sqrt(hess2 * vol) + std::sqrt(dt2 * vol)};
}

}  // namespace homog
