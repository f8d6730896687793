#pragma once

#include "homog/grid.hpp"

#include <vector>

namespace homog {

// Node range [i0, i1] x [k0, k1] of a box, used for interior measurements.
struct SubBox {
    int i0, i1, k0, k1;
};
inline SubBox whole(const BoxGrid& g) { return {0, g.n - 1, 0, g.n - 1}; }

// Trapezoidal integral of |u|^p over a sub-box (no root taken).
double spatial_power_integral(const Vec& u, const BoxGrid& g, const SubBox& b, double p);

// (int_0^T int |u|^p)^(1/p), trapezoidal in space and time; u holds the nt + 1 time levels.
double space_time_norm(const std::vector<Vec>& u, const BoxGrid& g, double p);

// Streaming version: feed time levels in order, read the norm at the end.
class SpaceTimeNorm {
public:
    SpaceTimeNorm(const BoxGrid& g, SubBox b, double p) : g_(g), b_(b), p_(p) {}
    void add_level(const Vec& u, bool endpoint);
    double value() const;

private:
    BoxGrid g_;
    SubBox b_;
    double p_;
    double sum_ = 0.0;
};

}  // namespace homog
