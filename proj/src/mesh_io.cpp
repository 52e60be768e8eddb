#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "varimove/errors.hpp"
#include "varimove/mesh.hpp"

namespace varimove {

namespace {

bool is_number(const std::string& s) {
  if (s.empty()) return false;
  std::istringstream in(s);
  double d;
  in >> d;
  return !in.fail() && in.eof();
}

BoundaryTag parse_tag(const std::string& s, int line) {
  if (s == "M") return BoundaryTag::M;
  if (s == "P") return BoundaryTag::P;
  if (s == "W") return BoundaryTag::Wall;
  throw Error(ErrorKind::MeshFormat, fmt::format("line {}: unknown boundary tag '{}'", line, s));
}

}  // namespace

TextMesh read_text_mesh(std::istream& in) {
  TextMesh mesh;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() == 3 && !is_number(tok[2])) {
      mesh.boundary.push_back({std::stoi(tok[0]), std::stoi(tok[1]), parse_tag(tok[2], line)});
    } else if (tok.size() == 3) {
      const int id = std::stoi(tok[0]);
      if (id != static_cast<int>(mesh.nodes.size()))
        throw Error(ErrorKind::MeshFormat, fmt::format("line {}: node ids must be dense, expected {}", line, mesh.nodes.size()));
      mesh.nodes.emplace_back(std::stod(tok[1]), std::stod(tok[2]));
    } else if (tok.size() == 4) {
      const int id = std::stoi(tok[0]);
      if (id != static_cast<int>(mesh.elements.size()))
        throw Error(ErrorKind::MeshFormat, fmt::format("line {}: element ids must be dense, expected {}", line, mesh.elements.size()));
      mesh.elements.push_back({std::stoi(tok[1]), std::stoi(tok[2]), std::stoi(tok[3])});
    } else {
      throw Error(ErrorKind::MeshFormat, fmt::format("line {}: cannot parse '{}'", line, raw));
    }
  }
  return mesh;
}

TextMesh read_text_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open mesh file {}", path.string()));
  return read_text_mesh(in);
}

void write_text_mesh(std::ostream& out, const TextMesh& mesh) {
  out << "# nodes: id x y\n";
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
    out << fmt::format("{} {:.17g} {:.17g}\n", i, mesh.nodes[i].x(), mesh.nodes[i].y());
  out << "# elements: id n1 n2 n3\n";
  for (std::size_t e = 0; e < mesh.elements.size(); ++e)
    out << fmt::format("{} {} {} {}\n", e, mesh.elements[e][0], mesh.elements[e][1], mesh.elements[e][2]);
  out << "# boundary edges: n1 n2 TAG\n";
  for (const auto& be : mesh.boundary) out << fmt::format("{} {} {}\n", be.a, be.b, static_cast<char>(be.tag));
}

ReferenceSolidMesh solid_from_text(const TextMesh& mesh) {
  ReferenceSolidMesh s;
  s.nodes = mesh.nodes;
  s.elements = mesh.elements;
  s.boundary = mesh.boundary;
  s.dirichlet_values = mesh.nodes;
  s.is_dirichlet.assign(mesh.nodes.size(), 0);
  for (const auto& be : mesh.boundary)
    if (be.tag == BoundaryTag::P) s.is_dirichlet.at(be.a) = s.is_dirichlet.at(be.b) = 1;
  return s;
}

FluidMesh fluid_from_text(const TextMesh& mesh, const ReferenceSolidMesh& solid, double tol) {
  FluidMesh f;
  f.nodes = mesh.nodes;
  f.triangles = mesh.elements;
  f.interface_node_map.assign(mesh.nodes.size(), -1);
  f.on_outer_boundary.assign(mesh.nodes.size(), 0);
  for (const auto& be : mesh.boundary)
    if (be.tag == BoundaryTag::Wall) f.on_outer_boundary.at(be.a) = f.on_outer_boundary.at(be.b) = 1;
  const auto solid_iface = solid.interface_nodes();
  for (const auto& be : mesh.boundary) {
    if (be.tag != BoundaryTag::M) continue;
    for (int i : {be.a, be.b}) {
      if (f.on_outer_boundary.at(i) || f.interface_node_map[i] >= 0) continue;
      for (int y : solid_iface) {
        if ((solid.nodes[y] - f.nodes[i]).norm() <= tol) {
          f.interface_node_map[i] = y;
          break;
        }
      }
      if (f.interface_node_map[i] < 0)
        throw Error(ErrorKind::MeshFormat, fmt::format("fluid interface node {} matches no solid M-node", i));
    }
  }
  return f;
}

TextMesh to_text(const ReferenceSolidMesh& solid) {
  return {solid.nodes, solid.elements, solid.boundary};
}

TextMesh to_text(const FluidMesh& fluid, const ReferenceSolidMesh& solid) {
  TextMesh t{fluid.nodes, fluid.triangles, {}};
  (void)solid;
  std::map<std::pair<int, int>, int> count;
  for (const auto& tri : fluid.triangles)
    for (int k = 0; k < 3; ++k) ++count[std::minmax(tri[k], tri[(k + 1) % 3])];
  for (const auto& tri : fluid.triangles)
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      if (count[std::minmax(a, b)] != 1) continue;
      const bool wall = fluid.on_outer_boundary[a] && fluid.on_outer_boundary[b];
      t.boundary.push_back({a, b, wall ? BoundaryTag::Wall : BoundaryTag::M});
    }
  return t;
}

}  // namespace varimove
