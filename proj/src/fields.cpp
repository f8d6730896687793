#include "homog/fields.hpp"

#include <cmath>
#include <stdexcept>

namespace homog {

namespace {

// Index of the neighbour shifted by `d` along `axis`, or -1 if it falls off a non-periodic end.
Index shifted(const Grid3& g, int i, int k, int m, int axis, int d) {
    int j[3] = {i, k, m};
    const Axis& a = g.ax[axis];
    j[axis] += d;
    if (!a.periodic && (j[axis] < 0 || j[axis] >= a.n)) return -1;
    j[axis] = a.wrap(j[axis]);
    return g.idx(j[0], j[1], j[2]);
}

template <typename Fn>
void for_nodes(const Grid3& g, Fn fn) {
    for (int i = 0; i < g.ax[0].n; ++i)
        for (int k = 0; k < g.ax[1].n; ++k)
            for (int m = 0; m < g.ax[2].n; ++m) fn(i, k, m, g.idx(i, k, m));
}

}  // namespace

Vec diff_forward(const Grid3& g, const Vec& v, int axis) {
    Vec d(v.size());
    const double ih = 1.0 / g.ax[axis].h;
    for_nodes(g, [&](int i, int k, int m, Index p) {
        const Index q = shifted(g, i, k, m, axis, 1);
        d(p) = q < 0 ? 0.0 : (v(q) - v(p)) * ih;
    });
    return d;
}

Vec diff_backward(const Grid3& g, const Vec& v, int axis) {
    Vec d(v.size());
    const double ih = 1.0 / g.ax[axis].h;
    for_nodes(g, [&](int i, int k, int m, Index p) {
        const Index q = shifted(g, i, k, m, axis, -1);
        d(p) = q < 0 ? 0.0 : (v(p) - v(q)) * ih;
    });
    return d;
}

Vec faces_to_nodes(const Grid3& g, const Vec& F, int axis) {
    Vec out(F.size());
    const Axis& a = g.ax[axis];
    for_nodes(g, [&](int i, int k, int m, Index p) {
        const int j = axis == 0 ? i : k;
        const Index q = shifted(g, i, k, m, axis, -1);
        const bool has_right = a.periodic || j + 1 < a.n;
        if (q < 0)
            out(p) = F(p);
        else if (!has_right)
            out(p) = F(q);
        else
            out(p) = 0.5 * (F(p) + F(q));
    });
    return out;
}

Vec periodic_to_cylinder(const Grid3& torus, const Vec& v, const Grid3& cyl) {
    if (torus.ax[1].n != cyl.ax[1].n || torus.ax[2].n != cyl.ax[2].n || torus.ax[0].n != cyl.ax[1].n)
        throw std::invalid_argument("torus and cylinder resolutions differ");
    Vec out(cyl.size());
    const Axis& a = torus.ax[0];
    for_nodes(cyl, [&](int i, int k, int m, Index p) { out(p) = v(torus.idx(a.wrap(i - cyl.ax[0].zero), k, m)); });
    return out;
}

Vec slice_means(const Grid3& g, const Vec& v) {
    const Index slice = Index(g.ax[1].n) * g.ax[2].n;
    Vec out(g.ax[0].n);
    for (int i = 0; i < g.ax[0].n; ++i) out(i) = v.segment(i * slice, slice).mean();
    return out;
}

Vec axial_field(const Grid3& g, const std::function<double(double)>& f) {
    Vec out(g.size());
    const Index slice = Index(g.ax[1].n) * g.ax[2].n;
    for (int i = 0; i < g.ax[0].n; ++i) out.segment(i * slice, slice).setConstant(f(g.ax[0].coord(i)));
    return out;
}

double mean_over_unit_block(const Grid3& g, const Vec& v) {
    const Index slice = Index(g.ax[1].n) * g.ax[2].n;
    double s = 0.0;
    Index n = 0;
    for (int i = 0; i < g.ax[0].n; ++i)
        if (std::abs(g.ax[0].coord(i)) <= 1.0 + 1e-12) {
            s += v.segment(i * slice, slice).sum();
            n += slice;
        }
    return n ? s / n : 0.0;
}

double max_abs_within(const Grid3& g, const Vec& v, double r) {
    const Index slice = Index(g.ax[1].n) * g.ax[2].n;
    double s = 0.0;
    for (int i = 0; i < g.ax[0].n; ++i)
        if (r < 0 || std::abs(g.ax[0].coord(i)) <= r + 1e-12)
            s = std::max(s, v.segment(i * slice, slice).cwiseAbs().maxCoeff());
    return s;
}

}  // namespace homog
