#pragma once

#include <array>
#include <cmath>

#include <Eigen/Core>
#include <Eigen/LU>

namespace varimove {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Tri = std::array<int, 3>;

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Signed area, positive for counter-clockwise vertex order.
inline double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * cross(b - a, c - a);
}

/// d(signed_area)/d(vertex i) for the triangle (p0, p1, p2).
inline std::array<Vec2, 3> signed_area_gradient(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
  return {Vec2(0.5 * (p1.y() - p2.y()), 0.5 * (p2.x() - p1.x())),
          Vec2(0.5 * (p2.y() - p0.y()), 0.5 * (p0.x() - p2.x())),
          Vec2(0.5 * (p0.y() - p1.y()), 0.5 * (p1.x() - p0.x()))};
}

inline double frob2(const Mat2& m) { return m.squaredNorm(); }
inline double ddot(const Mat2& a, const Mat2& b) { return (a.array() * b.array()).sum(); }

}  // namespace varimove
