#pragma once

#include "homog/stencil.hpp"

#include <functional>

namespace homog {

// Forward / backward differences along an axis; zero where the neighbour is missing on a
// non-periodic axis.
Vec diff_forward(const Grid3& g, const Vec& v, int axis);
Vec diff_backward(const Grid3& g, const Vec& v, int axis);

// Nodal value of a face field: average of the two faces adjacent along `axis` (0 or 1). A missing
// face on a non-periodic end contributes its neighbour's value.
Vec faces_to_nodes(const Grid3& g, const Vec& F, int axis);

// Samples a torus field on a cylinder with the same transverse/time counts and spacing.
Vec periodic_to_cylinder(const Grid3& torus, const Vec& v, const Grid3& cyl);

// Transverse mean over (y2, s) of each y1 slice.
Vec slice_means(const Grid3& g, const Vec& v);

// Field f(y1) broadcast to every node.
Vec axial_field(const Grid3& g, const std::function<double(double)>& f);

// Mean over the nodes with |y1| <= 1 (the unit block around the interface).
double mean_over_unit_block(const Grid3& g, const Vec& v);

// Max |v| over nodes satisfying |y1| <= r (r < 0 means all nodes).
double max_abs_within(const Grid3& g, const Vec& v, double r);

}  // namespace homog
