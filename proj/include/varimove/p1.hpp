#pragma once

#include <span>
#include <vector>

#include "varimove/linalg.hpp"

namespace varimove {

/// Interior edge shared by triangles `left` and `right`.
struct InteriorEdge {
  int a = 0, b = 0;
  int left = 0, right = 0;
  double length = 0.0;
  double patch = 0.0;  // (|left| + |right|) / 3
};

/// Cached P1 geometry of a triangulation: areas, shape-function gradients,
/// interior edges and lumped vertex areas.
struct P1Geometry {
  std::vector<double> area;
  std::vector<std::array<Vec2, 3>> grad;
  std::vector<InteriorEdge> edges;
  std::vector<double> lumped;
  double total_area = 0.0;

  std::size_t num_elements() const { return area.size(); }
};

/// Edge connectivity depends only on the triangle list, so it can be reused
/// while node positions change.
std::vector<InteriorEdge> interior_edges(std::span<const Tri> tris);

P1Geometry build_p1_geometry(std::span<const Vec2> nodes, std::span<const Tri> tris);
P1Geometry build_p1_geometry(std::span<const Vec2> nodes, std::span<const Tri> tris,
                             const std::vector<InteriorEdge>& edge_topology);

/// Elementwise gradient F_ij = d f_i / d x_j of a nodal vector field.
inline Mat2 element_gradient(const P1Geometry& g, std::span<const Tri> tris, std::span<const Vec2> f,
                             std::size_t e) {
  Mat2 F = Mat2::Zero();
  for (int a = 0; a < 3; ++a) F += f[tris[e][a]] * g.grad[e][a].transpose();
  return F;
}

/// Scatter dW/dF (times a weight) of element e onto nodal gradient slots.
inline void scatter_element_gradient(const P1Geometry& g, std::span<const Tri> tris, std::size_t e,
                                     const Mat2& dWdF, std::span<Vec2> out) {
  for (int a = 0; a < 3; ++a) out[tris[e][a]] += dWdF * g.grad[e][a];
}

/// Interior-penalty surrogate for (1/q) * weight * int |D^2 f|^q: the per-edge
/// Hessian is the gradient jump scaled by |e| / patch. Adds the gradient to `grad`
/// when non-empty.
double edge_hessian_power(const P1Geometry& g, std::span<const Tri> tris, std::span<const Vec2> f,
                          double q, double weight, std::span<Vec2> grad = {});

/// Smallest interior angle in radians.
double triangle_min_angle(const Vec2& a, const Vec2& b, const Vec2& c);

}  // namespace varimove
