#include "homog/norms.hpp"

#include <cmath>
#include <stdexcept>

namespace homog {

double spatial_power_integral(const Vec& u, const BoxGrid& g, const SubBox& b, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("norm exponent must be at least 1");
    double sum = 0.0;
    for (int i = b.i0; i <= b.i1; ++i) {
        const double wi = (i == b.i0 || i == b.i1) ? 0.5 : 1.0;
        for (int k = b.k0; k <= b.k1; ++k) {
            const double wk = (k == b.k0 || k == b.k1) ? 0.5 : 1.0;
            const double a = std::abs(u(g.idx(i, k)));
            sum += wi * wk * (p == 2.0 ? a * a : p == 4.0 ? (a * a) * (a * a) : std::pow(a, p));
        }
    }
    return sum * g.h * g.h;
}

double space_time_norm(const std::vector<Vec>& u, const BoxGrid& g, double p) {
    if (u.size() < 2) throw std::invalid_argument("space_time_norm needs at least two time levels");
    SpaceTimeNorm acc(g, whole(g), p);
    for (size_t n = 0; n < u.size(); ++n) acc.add_level(u[n], n == 0 || n + 1 == u.size());
    return acc.value();
}

void SpaceTimeNorm::add_level(const Vec& u, bool endpoint) {
    sum_ += (endpoint ? 0.5 : 1.0) * g_.tau * spatial_power_integral(u, g_, b_, p_);
}

double SpaceTimeNorm::value() const { return std::pow(sum_, 1.0 / p_); }

}  // namespace homog
