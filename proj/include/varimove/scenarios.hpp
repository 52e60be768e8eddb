#pragma once

#include <string>
#include <vector>

#include "varimove/constitutive.hpp"
#include "varimove/mesh.hpp"

namespace varimove {

/// Geometry plus initial data for a run.
struct Scenario {
  std::string name;
  ReferenceSolidMesh solid;
  FluidMesh fluid;
  Container container;
  std::vector<double> rho0;       // nodal on the fluid mesh
  std::vector<Vec2> momentum0;    // q0, nodal on the fluid mesh
  std::vector<Vec2> eta1;         // initial solid velocity, nodal on Q
  Vec2 gravity = Vec2::Zero();
  double gravity_ramp = 0.0;      // ramp time for the gravity preset, 0 means constant
};

struct GridSpec {
  int n = 20;                      // cells per side of the unit square
  Vec2 center = Vec2(0.5, 0.6);    // disk center
  double radius = 0.2;
  int stem_cells = 2;              // stem width in cells
};

/// Disk hanging from the lid by a thin stem inside the unit square, both
/// meshes taken from one structured grid. The stem top edge is the Dirichlet
/// part P. Throws MeshFormat if the cell selection is not a manifold region.
void build_tethered_disk(const GridSpec& grid, ReferenceSolidMesh& solid, FluidMesh& fluid, Container& container);

/// Uniform density whose regularized pressure balances the determinant
/// penalty traction at the identity, p_delta(rho) = a/8.
double rest_density(const ElasticParams& e, const FluidParams& f);

/// "falling-disk": rho0 = 1 + 0.5(1 - y), gravity (0, -g), bodies at rest.
Scenario falling_disk(const GridSpec& grid, double g = 1.0, double ramp = 0.0);
/// "rest": same geometry, no forces, uniform rest density, zero velocities.
Scenario rest_state(const GridSpec& grid, const ElasticParams& e, const FluidParams& f);

/// Known names: falling-disk, rest.
Scenario make_scenario(const std::string& name, const GridSpec& grid, const ElasticParams& e, const FluidParams& f);
std::vector<std::string> scenario_names();

}  // namespace varimove
