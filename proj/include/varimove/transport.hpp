#pragma once

#include <functional>
#include <span>
#include <vector>

#include "varimove/constitutive.hpp"
#include "varimove/p1.hpp"

namespace varimove {

enum class MassMode { Lumped, Consistent };

/// (M + tau*eps K) rho~ = M rho with natural boundary conditions on the P1 mesh.
/// Lumped mode replaces M by the diagonal of vertex areas. Throws SolverFailure.
std::vector<double> neumann_resolvent(const P1Geometry& geom, std::span<const Tri> tris, std::span<const double> rho,
                                      double tau_eps, MassMode mode = MassMode::Lumped);

/// Area-weighted average of the adjacent element factors, equal to A_new / A_old.
std::vector<double> nodal_det_factors(std::span<const double> lumped_old, std::span<const double> lumped_new);

/// rho_{k+1} at the pushed nodes: rho~ divided by the nodal det factor.
/// Throws NonPositiveJacobian if a nodal factor is not positive.
std::vector<double> transport_density(std::span<const double> rho_tilde, std::span<const double> lumped_old,
                                      std::span<const double> lumped_new);

/// int rho dx with the lumped (equivalently: consistent) P1 quadrature.
double total_mass(std::span<const double> lumped, std::span<const double> rho);

/// sum_i A_i H_delta(rho_i).
double potential_energy(const FluidParams& f, std::span<const double> lumped, std::span<const double> rho);

/// Discrete eps-dissipation H_delta'(rho~)^T M_L (rho - rho~); equals
/// tau*eps*H'(rho~)^T K rho~ for the lumped resolvent.
double eps_dissipation(const FluidParams& f, std::span<const double> lumped, std::span<const double> rho,
                       std::span<const double> rho_tilde);

/// Stiffness matrix product K x (used by diagnostics).
std::vector<double> stiffness_apply(const P1Geometry& geom, std::span<const Tri> tris, std::span<const double> x);

struct MinMaxSample {
  double tau = 0.0;
  double rho_min = 0.0;
  double rho_max = 0.0;
  double div_sup = 0.0;  // ||div v||_inf over the step
};

struct MinMaxReport {
  double rho_min = 0.0, rho_max = 0.0;
  double lower_bound = 0.0, upper_bound = 0.0;
  double integrated_div = 0.0;
  /// max(lower_bound / rho_min, rho_max / upper_bound); <= 1 means the envelope holds exactly.
  double slack = 0.0;
  bool violated = false;
};

/// Checks inf rho0 exp(-int ||div w||) <= rho <= sup rho0 exp(int ||div w||)
/// over a run segment, allowing a multiplicative slack of 1 + allowed_slack.
MinMaxReport minmax_certificate(double rho0_min, double rho0_max, std::span<const MinMaxSample> samples,
                                double allowed_slack);

/// Data of one transport step needed to evaluate the renormalized identity.
struct TransportStepRecord {
  double tau = 0.0;
  double epsilon = 0.0;
  std::vector<Tri> tris;
  P1Geometry geom_k;               // geometry of Omega_k
  std::vector<double> lumped_next; // vertex areas on Omega_{k+1}
  std::vector<double> rho_k, rho_tilde, rho_next;
  std::vector<double> div_v;       // per element on Omega_k
};

struct Renormalizer {
  std::function<double(double)> theta, theta_prime;
};

/// Residual of d/dt int theta(rho) + int (rho theta' - theta) div v + eps int theta'' |grad rho|^2 = 0
/// for one step (test function psi = 1).
double renormalization_step_residual(const TransportStepRecord& rec, const Renormalizer& theta);
/// Max over a trajectory slice.
double renormalization_residual(std::span<const TransportStepRecord> slice, const Renormalizer& theta);

}  // namespace varimove
