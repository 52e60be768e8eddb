#include "varimove/scenarios.hpp"

#include <cmath>
#include <map>

#include "varimove/errors.hpp"

namespace varimove {

namespace {

using Edge = std::pair<int, int>;
Edge key(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

}  // namespace

void build_tethered_disk(const GridSpec& grid, ReferenceSolidMesh& solid, FluidMesh& fluid, Container& container) {
  const int n = grid.n;
  if (n < 4 || grid.stem_cells < 1 || grid.stem_cells >= n) throw Error(ErrorKind::MeshFormat, "bad grid size");
  const double dx = 1.0 / n;
  auto node_id = [n](int i, int j) { return j * (n + 1) + i; };

  // Cell selection.
  std::vector<char> in_solid(n * n, 0);
  const int stem_lo = n / 2 - grid.stem_cells / 2;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2 c((i + 0.5) * dx, (j + 0.5) * dx);
      const bool disk = (c - grid.center).norm() < grid.radius;
      const bool stem = i >= stem_lo && i < stem_lo + grid.stem_cells && c.y() > grid.center.y();
      in_solid[j * n + i] = disk || stem;
    }

  // Split each cell into two triangles along the diagonal alternating by cell parity.
  std::vector<Tri> solid_tris, fluid_tris;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int a = node_id(i, j), b = node_id(i + 1, j), c = node_id(i + 1, j + 1), d = node_id(i, j + 1);
      std::array<Tri, 2> t;
      if ((i + j) % 2 == 0)
        t = {Tri{a, b, c}, Tri{a, c, d}};
      else
        t = {Tri{a, b, d}, Tri{b, c, d}};
      auto& dst = in_solid[j * n + i] ? solid_tris : fluid_tris;
      dst.push_back(t[0]);
      dst.push_back(t[1]);
    }

  auto grid_pos = [&](int id) { return Vec2((id % (n + 1)) * dx, (id / (n + 1)) * dx); };
  auto on_wall = [&](int id) {
    const int i = id % (n + 1), j = id / (n + 1);
    return i == 0 || j == 0 || i == n || j == n;
  };

  // Solid: renumber and tag the boundary.
  std::map<int, int> smap;
  for (const auto& t : solid_tris)
    for (int v : t) smap.emplace(v, 0);
  int next = 0;
  for (auto& [g, l] : smap) l = next++;
  solid = ReferenceSolidMesh{};
  solid.nodes.resize(smap.size());
  for (const auto& [g, l] : smap) solid.nodes[l] = grid_pos(g);
  std::map<Edge, int> edge_count;
  for (const auto& t : solid_tris) {
    solid.elements.push_back({smap[t[0]], smap[t[1]], smap[t[2]]});
    for (int k = 0; k < 3; ++k) ++edge_count[key(t[k], t[(k + 1) % 3])];
  }
  std::vector<int> boundary_degree(smap.size(), 0);
  for (const auto& [e, cnt] : edge_count) {
    if (cnt != 1) continue;
    const bool top = (e.first / (n + 1)) == n && (e.second / (n + 1)) == n;
    solid.boundary.push_back({smap[e.first], smap[e.second], top ? BoundaryTag::P : BoundaryTag::M});
    ++boundary_degree[smap[e.first]];
    ++boundary_degree[smap[e.second]];
  }
  for (int d : boundary_degree)
    if (d != 0 && d != 2) throw Error(ErrorKind::MeshFormat, "solid cell selection is not a manifold region");
  solid.is_dirichlet.assign(solid.nodes.size(), 0);
  solid.dirichlet_values = solid.nodes;
  for (const auto& be : solid.boundary)
    if (be.tag == BoundaryTag::P) solid.is_dirichlet[be.a] = solid.is_dirichlet[be.b] = 1;
  solid.validate();

  // Fluid: renumber, flag wall nodes, map interface nodes to solid ids.
  std::map<int, int> fmap;
  for (const auto& t : fluid_tris)
    for (int v : t) fmap.emplace(v, 0);
  next = 0;
  for (auto& [g, l] : fmap) l = next++;
  fluid = FluidMesh{};
  fluid.nodes.resize(fmap.size());
  fluid.interface_node_map.assign(fmap.size(), -1);
  fluid.on_outer_boundary.assign(fmap.size(), 0);
  for (const auto& [g, l] : fmap) {
    fluid.nodes[l] = grid_pos(g);
    if (on_wall(g)) {
      fluid.on_outer_boundary[l] = 1;
    } else if (auto it = smap.find(g); it != smap.end()) {
      fluid.interface_node_map[l] = it->second;
    }
  }
  for (const auto& t : fluid_tris) fluid.triangles.push_back({fmap[t[0]], fmap[t[1]], fmap[t[2]]});

  container.polygon = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
  fluid.validate(container, solid.nodes);
}

double rest_density(const ElasticParams& e, const FluidParams& f) {
  const double target = e.a / 8.0;
  double lo = 1e-8, hi = 1.0;
  while (pressure_delta(f, hi) < target) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (pressure_delta(f, mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Scenario falling_disk(const GridSpec& grid, double g, double ramp) {
  Scenario s;
  s.name = "falling-disk";
  build_tethered_disk(grid, s.solid, s.fluid, s.container);
  s.rho0.resize(s.fluid.num_nodes());
  for (std::size_t i = 0; i < s.rho0.size(); ++i) s.rho0[i] = 1.0 + 0.5 * (1.0 - s.fluid.nodes[i].y());
  s.momentum0.assign(s.fluid.num_nodes(), Vec2::Zero());
  s.eta1.assign(s.solid.num_nodes(), Vec2::Zero());
  s.gravity = Vec2(0.0, -g);
  s.gravity_ramp = ramp;
  return s;
}

Scenario rest_state(const GridSpec& grid, const ElasticParams& e, const FluidParams& f) {
  Scenario s;
  s.name = "rest";
  build_tethered_disk(grid, s.solid, s.fluid, s.container);
  s.rho0.assign(s.fluid.num_nodes(), rest_density(e, f));
  s.momentum0.assign(s.fluid.num_nodes(), Vec2::Zero());
  s.eta1.assign(s.solid.num_nodes(), Vec2::Zero());
  return s;
}

Scenario make_scenario(const std::string& name, const GridSpec& grid, const ElasticParams& e, const FluidParams& f) {
  if (name == "falling-disk") return falling_disk(grid);
  if (name == "rest") return rest_state(grid, e, f);
  throw Error(ErrorKind::ConfigInvalid, "unknown scenario '" + name + "'");
}

std::vector<std::string> scenario_names() { return {"falling-disk", "rest"}; }

}  // namespace varimove
