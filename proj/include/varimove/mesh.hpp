#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "varimove/linalg.hpp"
#include "varimove/p1.hpp"

namespace varimove {

enum class BoundaryTag : char { M = 'M', P = 'P', Wall = 'W' };

struct BoundaryEdge {
  int a = 0, b = 0;
  BoundaryTag tag = BoundaryTag::M;
};

/// Reference configuration Q of the solid.
struct ReferenceSolidMesh {
  std::vector<Vec2> nodes;
  std::vector<Tri> elements;
  std::vector<BoundaryEdge> boundary;
  /// Prescribed positions gamma for every P-node (index-aligned with nodes,
  /// meaningful only where is_dirichlet is set).
  std::vector<Vec2> dirichlet_values;
  std::vector<char> is_dirichlet;

  std::size_t num_nodes() const { return nodes.size(); }
  /// Throws MeshFormat when an invariant is violated.
  void validate() const;
  std::vector<int> interface_nodes() const;
  double area() const;
};

/// Fixed container Omega, given as a closed counter-clockwise polygon.
struct Container {
  std::vector<Vec2> polygon;

  double area() const;
  bool on_boundary(const Vec2& p, double tol = 1e-12) const;
};

/// Lagrangian triangulation of the current fluid domain.
struct FluidMesh {
  std::vector<Vec2> nodes;
  std::vector<Tri> triangles;
  /// Solid node whose image this fluid node is, or -1.
  std::vector<int> interface_node_map;
  std::vector<char> on_outer_boundary;

  std::size_t num_nodes() const { return nodes.size(); }
  bool is_interface(int i) const { return interface_node_map[i] >= 0; }
  bool is_interior(int i) const { return interface_node_map[i] < 0 && !on_outer_boundary[i]; }
  /// Throws MeshFormat when an invariant is violated; `eta` are the solid node
  /// images used to check interface coincidence.
  void validate(const Container& container, const std::vector<Vec2>& eta, double tol = 1e-9) const;
  double min_angle() const;
};

/// Mesh size estimate: longest edge.
double max_edge_length(const std::vector<Vec2>& nodes, const std::vector<Tri>& tris);

// Plain-text mesh format:
//   # comment
//   id x y              (node)
//   id n1 n2 n3         (triangle)
//   n1 n2 TAG           (boundary edge, TAG in {M, P, W})
// Node and element ids are 0-based and must be dense and in order.
struct TextMesh {
  std::vector<Vec2> nodes;
  std::vector<Tri> elements;
  std::vector<BoundaryEdge> boundary;
};

TextMesh read_text_mesh(std::istream& in);
TextMesh read_text_mesh(const std::filesystem::path& path);
void write_text_mesh(std::ostream& out, const TextMesh& mesh);

/// Solid from a text mesh; Dirichlet values default to the reference positions.
ReferenceSolidMesh solid_from_text(const TextMesh& mesh);
/// Fluid mesh from a text mesh: W-tagged edge nodes are outer boundary nodes,
/// M-tagged edge nodes are matched to solid interface nodes by position.
FluidMesh fluid_from_text(const TextMesh& mesh, const ReferenceSolidMesh& solid, double tol = 1e-9);
TextMesh to_text(const ReferenceSolidMesh& solid);
TextMesh to_text(const FluidMesh& fluid, const ReferenceSolidMesh& solid);

}  // namespace varimove
