#pragma once

#include <span>
#include <vector>

#include "varimove/mesh.hpp"
#include "varimove/p1.hpp"

namespace varimove {

/// Solid material. The elasticity tensor is isotropic: C M = 2 mu_s M + lambda_s tr(M) I.
struct ElasticParams {
  double mu_s = 10.0;
  double lambda_s = 10.0;
  double a = 5.0;   // determinant penalty exponent
  double q = 4.0;   // second-gradient exponent
  double kappa = 1e-4;
  bool second_gradient = true;  // include (1/q)|D^2 eta|^q

  Mat2 apply_C(const Mat2& M) const { return 2.0 * mu_s * M + lambda_s * M.trace() * Mat2::Identity(); }
};

struct FluidParams {
  double mu = 0.05;
  double lambda = 0.05;
  double a_p = 1.0;
  double gamma = 2.0;
  double delta = 1e-3;
  double beta = 5.0;
  double rho_s = 1.0;
  double epsilon = 1e-2;
};

struct ValueAndGradient {
  double value = 0.0;
  std::vector<Vec2> gradient;
};

/// Solid functionals on a fixed reference mesh with cached P1 geometry.
class SolidModel {
 public:
  SolidModel(const ReferenceSolidMesh& mesh, ElasticParams params);

  /// E(eta) without the kappa term. Throws InadmissibleDeformation if any
  /// det grad eta <= 0.
  ValueAndGradient elastic_energy(std::span<const Vec2> eta, bool with_gradient = true) const;
  /// E(eta) or +inf when inadmissible, no gradient.
  double elastic_energy_value(std::span<const Vec2> eta) const;
  /// kappa-regularized energy E_kappa = E + kappa |eta|_{H2,h}^2.
  ValueAndGradient elastic_energy_kappa(std::span<const Vec2> eta, bool with_gradient = true) const;

  /// R(eta, b) = int |grad b^T grad eta + grad eta^T grad b|^2 and D_2 R(eta, b).
  ValueAndGradient dissipation(std::span<const Vec2> eta, std::span<const Vec2> b, bool with_gradient = true) const;
  /// R_kappa = R + kappa |b|_{H2,h}^2.
  ValueAndGradient dissipation_kappa(std::span<const Vec2> eta, std::span<const Vec2> b,
                                     bool with_gradient = true) const;

  const ReferenceSolidMesh& mesh() const { return mesh_; }
  const P1Geometry& geometry() const { return geom_; }
  const ElasticParams& params() const { return params_; }

 private:
  ReferenceSolidMesh mesh_;
  ElasticParams params_;
  P1Geometry geom_;
};

/// kappa * discrete H^2 seminorm (interior-penalty jumps of the gradient).
ValueAndGradient kappa_regularizer(std::span<const Vec2> field, const P1Geometry& geom, std::span<const Tri> tris,
                                   double kappa, bool with_gradient = true);

// Barotropic pressure and potentials. All throw NegativeDensity for rho < 0.
double pressure(const FluidParams& f, double rho);
double pressure_potential(const FluidParams& f, double rho);
double pressure_delta(const FluidParams& f, double rho);
double pressure_delta_prime(const FluidParams& f, double rho);
double pressure_delta_second(const FluidParams& f, double rho);
double potential_delta(const FluidParams& f, double rho);
double potential_delta_prime(const FluidParams& f, double rho);
double potential_delta_second(const FluidParams& f, double rho);

/// Newtonian stress 2 mu (sym L - tr(L)/3 I) + lambda tr(L) I (the 1/3 is kept for n = 2).
Mat2 viscous_stress(const FluidParams& f, const Mat2& grad_v);
/// S(grad v) : grad v.
double viscous_dissipation(const FluidParams& f, const Mat2& grad_v);

}  // namespace varimove
