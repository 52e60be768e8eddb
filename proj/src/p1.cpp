#include "varimove/p1.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace varimove {

std::vector<InteriorEdge> interior_edges(std::span<const Tri> tris) {
  std::map<std::pair<int, int>, int> first_owner;
  std::vector<InteriorEdge> edges;
  for (std::size_t e = 0; e < tris.size(); ++e) {
    for (int k = 0; k < 3; ++k) {
      int a = tris[e][k], b = tris[e][(k + 1) % 3];
      auto key = std::minmax(a, b);
      auto it = first_owner.find(key);
      if (it == first_owner.end()) {
        first_owner.emplace(key, static_cast<int>(e));
      } else {
        InteriorEdge edge;
        edge.a = key.first;
        edge.b = key.second;
        edge.left = it->second;
        edge.right = static_cast<int>(e);
        edges.push_back(edge);
        first_owner.erase(it);
      }
    }
  }
  return edges;
}

P1Geometry build_p1_geometry(std::span<const Vec2> nodes, std::span<const Tri> tris) {
  return build_p1_geometry(nodes, tris, interior_edges(tris));
}

P1Geometry build_p1_geometry(std::span<const Vec2> nodes, std::span<const Tri> tris,
                             const std::vector<InteriorEdge>& edge_topology) {
  P1Geometry g;
  g.area.resize(tris.size());
  g.grad.resize(tris.size());
  g.lumped.assign(nodes.size(), 0.0);
  for (std::size_t e = 0; e < tris.size(); ++e) {
    const Vec2& p0 = nodes[tris[e][0]];
    const Vec2& p1 = nodes[tris[e][1]];
    const Vec2& p2 = nodes[tris[e][2]];
    Mat2 D;
    D.col(0) = p1 - p0;
    D.col(1) = p2 - p0;
    const double det = D.determinant();
    g.area[e] = 0.5 * det;
    // rows of D^{-1} are the gradients of the barycentric coordinates 1 and 2
    Mat2 Dinv;
    Dinv << D(1, 1), -D(0, 1), -D(1, 0), D(0, 0);
    Dinv /= det;
    g.grad[e][1] = Dinv.row(0).transpose();
    g.grad[e][2] = Dinv.row(1).transpose();
    g.grad[e][0] = -(g.grad[e][1] + g.grad[e][2]);
    for (int a = 0; a < 3; ++a) g.lumped[tris[e][a]] += g.area[e] / 3.0;
    g.total_area += g.area[e];
  }
  g.edges = edge_topology;
  for (auto& edge : g.edges) {
    edge.length = (nodes[edge.a] - nodes[edge.b]).norm();
    edge.patch = (g.area[edge.left] + g.area[edge.right]) / 3.0;
  }
  return g;
}

double edge_hessian_power(const P1Geometry& g, std::span<const Tri> tris, std::span<const Vec2> f,
                          double q, double weight, std::span<Vec2> grad) {
  if (weight == 0.0) return 0.0;
  double value = 0.0;
  for (const auto& edge : g.edges) {
    const Mat2 jump = element_gradient(g, tris, f, edge.left) - element_gradient(g, tris, f, edge.right);
    const double scale = edge.length / edge.patch;
    const double coeff = edge.patch * std::pow(scale, q);
    const double n2 = frob2(jump);
    if (n2 == 0.0) continue;
    const double nq = std::pow(n2, 0.5 * q);
    value += coeff * nq / q;
    if (!grad.empty()) {
      // d/dJ (|J|^q / q) = |J|^{q-2} J
      const Mat2 dJ = weight * coeff * std::pow(n2, 0.5 * q - 1.0) * jump;
      scatter_element_gradient(g, tris, edge.left, dJ, grad);
      scatter_element_gradient(g, tris, edge.right, -dJ, grad);
    }
  }
  return weight * value;
}

double triangle_min_angle(const Vec2& a, const Vec2& b, const Vec2& c) {
  auto angle = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    const Vec2 u = q - p, v = r - p;
    return std::atan2(std::abs(cross(u, v)), u.dot(v));
  };
  return std::min({angle(a, b, c), angle(b, c, a), angle(c, a, b)});
}

}  // namespace varimove
