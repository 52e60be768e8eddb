#include "varimove/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include <fmt/format.h>

#include "varimove/errors.hpp"

namespace varimove {

namespace {

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * d)).norm();
}

// Edges that belong to exactly one triangle.
std::map<std::pair<int, int>, int> boundary_edge_count(const std::vector<Tri>& tris) {
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : tris)
    for (int k = 0; k < 3; ++k) ++count[std::minmax(t[k], t[(k + 1) % 3])];
  std::erase_if(count, [](const auto& kv) { return kv.second != 1; });
  return count;
}

}  // namespace

void ReferenceSolidMesh::validate() const {
  if (nodes.empty() || elements.empty()) throw Error(ErrorKind::MeshFormat, "solid mesh is empty");
  for (std::size_t e = 0; e < elements.size(); ++e) {
    for (int idx : elements[e])
      if (idx < 0 || static_cast<std::size_t>(idx) >= nodes.size())
        throw Error(ErrorKind::MeshFormat, fmt::format("solid element {} references missing node", e));
    const auto& t = elements[e];
    if (signed_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]) <= 0.0)
      throw Error(ErrorKind::MeshFormat, fmt::format("solid element {} is not positively oriented", e));
  }
  auto topo = boundary_edge_count(elements);
  std::map<std::pair<int, int>, int> tagged;
  bool has_p = false;
  for (const auto& be : boundary) {
    auto key = std::minmax(be.a, be.b);
    if (!topo.contains(key))
      throw Error(ErrorKind::MeshFormat, fmt::format("tagged edge {}-{} is not a boundary edge", be.a, be.b));
    if (be.tag == BoundaryTag::Wall)
      throw Error(ErrorKind::MeshFormat, "solid boundary edges must be tagged M or P");
    if (++tagged[key] > 1)
      throw Error(ErrorKind::MeshFormat, fmt::format("boundary edge {}-{} tagged twice", be.a, be.b));
    has_p |= be.tag == BoundaryTag::P;
  }
  if (tagged.size() != topo.size())
    throw Error(ErrorKind::MeshFormat,
                fmt::format("{} of {} boundary edges carry no tag", topo.size() - tagged.size(), topo.size()));
  if (!has_p) throw Error(ErrorKind::MeshFormat, "Dirichlet part P is empty");
  if (dirichlet_values.size() != nodes.size() || is_dirichlet.size() != nodes.size())
    throw Error(ErrorKind::MeshFormat, "Dirichlet data not index-aligned with nodes");
}

std::vector<int> ReferenceSolidMesh::interface_nodes() const {
  std::vector<int> out;
  for (const auto& be : boundary)
    if (be.tag == BoundaryTag::M) {
      out.push_back(be.a);
      out.push_back(be.b);
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double ReferenceSolidMesh::area() const {
  double a = 0.0;
  for (const auto& t : elements) a += signed_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]);
  return a;
}

double Container::area() const {
  double a = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) a += 0.5 * cross(polygon[i], polygon[(i + 1) % polygon.size()]);
  return a;
}

bool Container::on_boundary(const Vec2& p, double tol) const {
  for (std::size_t i = 0; i < polygon.size(); ++i)
    if (point_segment_distance(p, polygon[i], polygon[(i + 1) % polygon.size()]) <= tol) return true;
  return false;
}

void FluidMesh::validate(const Container& container, const std::vector<Vec2>& eta, double tol) const {
  if (interface_node_map.size() != nodes.size() || on_outer_boundary.size() != nodes.size())
    throw Error(ErrorKind::MeshFormat, "fluid node flags not index-aligned with nodes");
  for (std::size_t e = 0; e < triangles.size(); ++e) {
    const auto& t = triangles[e];
    if (signed_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]) <= 0.0)
      throw Error(ErrorKind::MeshFormat, fmt::format("fluid triangle {} is not positively oriented", e));
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (on_outer_boundary[i] && !container.on_boundary(nodes[i], tol))
      throw Error(ErrorKind::MeshFormat, fmt::format("outer boundary node {} is not on the container", i));
    const int y = interface_node_map[i];
    if (y >= 0 && (nodes[i] - eta.at(y)).norm() > tol)
      throw Error(ErrorKind::MeshFormat, fmt::format("interface node {} does not coincide with eta({})", i, y));
  }
}

double FluidMesh::min_angle() const {
  double m = std::numbers::pi;
  for (const auto& t : triangles) m = std::min(m, triangle_min_angle(nodes[t[0]], nodes[t[1]], nodes[t[2]]));
  return m;
}

double max_edge_length(const std::vector<Vec2>& nodes, const std::vector<Tri>& tris) {
  double h = 0.0;
  for (const auto& t : tris)
    for (int k = 0; k < 3; ++k) h = std::max(h, (nodes[t[k]] - nodes[t[(k + 1) % 3]]).norm());
  return h;
}

}  // namespace varimove
