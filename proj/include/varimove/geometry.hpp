#pragma once

#include <span>
#include <vector>

#include "varimove/mesh.hpp"

namespace varimove {

struct PushForwardResult {
  FluidMesh mesh;
  /// det(I + tau grad v) per triangle, equal to the area ratio of the pushed triangle.
  std::vector<double> det_factors;
  /// Nodal displacement tau * v.
  std::vector<Vec2> displacement;
};

/// Moves every fluid node by tau * v. Throws NonPositiveJacobian if a triangle's
/// determinant factor drops to `jacobian_floor` or below.
PushForwardResult push_forward_fluid_mesh(const FluidMesh& mesh, std::span<const Vec2> v, double tau,
                                          double jacobian_floor = 1e-6);

/// Composed Lagrangian flow map Phi_k : Omega_0 -> Omega_k. The fluid mesh is
/// Lagrangian, so Phi_k is represented by the node positions of the current mesh.
class FlowMapLedger {
 public:
  FlowMapLedger() = default;
  FlowMapLedger(const FluidMesh& origin, double c_lo, double c_hi);

  /// Phi_{k+1} = (id + tau v_{k+1}) o Phi_k. Throws DeterminantBoundViolation when the
  /// running determinant leaves [c_lo, c_hi].
  void compose(const PushForwardResult& step);
  /// Starts a new window: the current front becomes the new origin.
  void anchor();

  int step() const { return step_; }
  const std::vector<Vec2>& origin() const { return origin_; }
  const std::vector<Vec2>& front() const { return front_; }
  const std::vector<double>& running_det() const { return running_det_; }
  const std::vector<Tri>& triangles() const { return tris_; }
  /// det grad Phi recomputed directly from the composed node positions.
  std::vector<double> direct_det() const;
  double c_lo() const { return c_lo_; }
  double c_hi() const { return c_hi_; }

  /// Raw state access for checkpoints.
  void restore(std::vector<Vec2> origin, std::vector<Vec2> front, std::vector<double> running, int step);

 private:
  std::vector<Tri> tris_;
  std::vector<Vec2> origin_;
  std::vector<Vec2> front_;
  std::vector<double> running_det_;
  int step_ = 0;
  double c_lo_ = 1e-3, c_hi_ = 1e3;
};

/// Minimum over elements of det grad eta (P1: constant per element).
double min_det(const ReferenceSolidMesh& solid, std::span<const Vec2> eta);

/// | area(eta(Q)) - int_Q det grad eta |, with the image area from an exact slab sweep.
double ciarlet_necas_defect(const ReferenceSolidMesh& solid, std::span<const Vec2> eta);

/// Area of the union of the deformed triangles.
double image_area(const ReferenceSolidMesh& solid, std::span<const Vec2> eta);

/// True when the image of every boundary loop is a simple polygon and no two
/// loops intersect. Together with positive element determinants this
/// certifies injectivity.
bool boundary_image_is_simple(const ReferenceSolidMesh& solid, std::span<const Vec2> eta);

double segment_distance(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1);

/// Minimum distance from the image of M to the container wall and to itself.
/// Wall distance skips M edges within reference distance `self_contact_gap`
/// of the clamped part P; self distance only pairs M edges whose reference
/// distance is at least `self_contact_gap`.
double collision_distance(const ReferenceSolidMesh& solid, std::span<const Vec2> eta,
                          const Container& container, double self_contact_gap);

}  // namespace varimove
