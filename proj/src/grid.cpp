#include "homog/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace homog {

namespace {

int count_from_ratio(double x, const char* what) {
    const double r = std::round(x);
    if (std::abs(x - r) > 1e-9 * std::max(1.0, std::abs(x)))
        throw std::invalid_argument(std::string(what) + " must be an integer multiple of the spacing");
    return static_cast<int>(r);
}

}  // namespace

Grid3 torus_grid(int ny, int ns) {
    if (ny < 4 || ns < 4 || ny % 2 || ns % 2)
        throw std::invalid_argument("torus counts must be even and at least 4");
    Grid3 g;
    g.ax[0] = {ny, 1.0 / ny, 0, true};
    g.ax[1] = {ny, 1.0 / ny, 0, true};
    g.ax[2] = {ns, 1.0 / ns, 0, true};
    return g;
}

Grid3 cylinder_grid(double R, int ny, int ns) {
    if (!(R > 1.0)) throw std::invalid_argument("cylinder half-length must exceed 1");
    Grid3 g = torus_grid(ny, ns);
    const int half = count_from_ratio(R * ny, "cylinder half-length");
    g.ax[0] = {2 * half + 1, 1.0 / ny, half, false};
    return g;
}

BoxGrid centred_box(double L, double h, double T, double tau) {
    if (!(L > 0) || !(h > 0) || !(T > 0) || !(tau > 0))
        throw std::invalid_argument("box sizes must be positive");
    BoxGrid b;
    const int half = count_from_ratio(L / h, "box half-width");
    b.n = 2 * half + 1;
    b.h = h;
    b.lo = -half * h;
    b.nt = count_from_ratio(T / tau, "final time");
    b.tau = tau;
    if (b.nt < 16) throw std::invalid_argument("time step must be at most T/16");
    return b;
}

}  // namespace homog
