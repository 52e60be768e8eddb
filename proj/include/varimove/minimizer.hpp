#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "varimove/constitutive.hpp"
#include "varimove/geometry.hpp"
#include "varimove/mesh.hpp"
#include "varimove/transport.hpp"

namespace varimove {

/// Everything known at the start of a tau-step.
struct StepState {
  std::vector<Vec2> eta;         // eta_k on reference nodes
  FluidMesh fluid;               // Omega_k (Lagrangian node positions)
  std::vector<double> rho;       // rho_k, nodal
  std::vector<Vec2> zeta;        // zeta_k, solid nodal
  std::vector<Vec2> w;           // w_k, fluid nodal on Omega_0
  std::vector<double> lumped0;   // vertex areas of the window origin Omega_0
  Vec2 f_solid = Vec2::Zero();   // f_s(tau k), force density on Q
  Vec2 f_fluid = Vec2::Zero();   // f_f(tau k), acceleration field on Omega
};

struct StepParams {
  double tau = 1.0 / 800.0;
  double h = 1.0 / 50.0;
  FluidParams fluid;
  MassMode mass_mode = MassMode::Lumped;
  double jacobian_floor = 1e-6;
};

struct MinimizerOptions {
  double grad_tol = 1e-8;
  int max_iterations = 500;
  int memory = 10;
  double armijo = 1e-4;
  int max_backtracks = 60;
  double noise_tol = 1e-13;  // relative round-off band of J for gradient-based acceptance
  bool injectivity_guard = true;
};

/// Decomposition of the step functional; `total()` is the minimized value.
struct ObjectiveTerms {
  double elastic = 0.0;          // E_kappa(eta)
  double potential = 0.0;        // U~(v) = U(rho_{k+1}) on Omega_{k+1}
  double dissipation_solid = 0.0;  // tau R_kappa(eta_k, (eta - eta_k)/tau)
  double viscous = 0.0;          // tau/2 int S(grad v):grad v
  double kappa_fluid = 0.0;      // tau kappa/2 |v|_{H2,h}^2
  double inertial_solid = 0.0;   // tau/2h rho_s int |(eta-eta_k)/tau - zeta_k|^2
  double inertial_fluid = 0.0;   // tau/2h int |sqrt(rho_k) v - sqrt(det grad Phi_k^-1) w_k o Phi_k^-1|^2
  double work_solid = 0.0;       // tau int (eta-eta_k)/tau . f_s
  double work_fluid = 0.0;       // tau int rho_k v . f_f

  double total() const {
    return elastic + potential + dissipation_solid + viscous + kappa_fluid + inertial_solid + inertial_fluid -
           work_solid - work_fluid;
  }
};

/// The incremental problem for one tau-step, with density eliminated and the
/// interface fluid velocities eliminated through the coupling. Decision
/// variables are displacements: solid u = eta - eta_k on non-Dirichlet nodes and
/// tau*v on interior fluid nodes.
class StepProblem {
 public:
  StepProblem(const SolidModel& solid, const StepState& state, const StepParams& params);

  Eigen::Index size() const { return n_; }

  /// Solid nodal eta and fluid nodal displacement tau*v for all nodes.
  void reconstruct(const Eigen::VectorXd& x, std::vector<Vec2>& eta, std::vector<Vec2>& disp) const;
  /// Inverse of reconstruct for admissible (eta, v) pairs.
  Eigen::VectorXd pack(std::span<const Vec2> eta, std::span<const Vec2> disp) const;

  /// Objective value, +inf outside the admissible set. Writes the gradient when requested.
  double evaluate(const Eigen::VectorXd& x, Eigen::VectorXd* grad = nullptr) const;
  ObjectiveTerms terms(const Eigen::VectorXd& x) const;
  /// Gradient in the nodal (eta, tau*v) coordinates before the coupling reduction.
  void nodal_gradient(const Eigen::VectorXd& x, std::vector<Vec2>& g_solid, std::vector<Vec2>& g_fluid) const;

  /// True when the deformation passes det and boundary-simplicity guards.
  bool admissible(const Eigen::VectorXd& x) const;

  /// Sparse SPD Hessian of the 1/tau-scaled quadratic terms.
  Eigen::SparseMatrix<double> quadratic_hessian() const;

  const StepState& state() const { return state_; }
  const StepParams& params() const { return params_; }
  const SolidModel& solid() const { return solid_; }
  const P1Geometry& fluid_geometry() const { return geom_k_; }
  const std::vector<double>& rho_tilde() const { return rho_tilde_; }
  /// Free-variable index of a solid node (first of two), or -1 for Dirichlet nodes.
  int solid_dof(int a) const { return solid_dof_[a]; }
  /// Free-variable index of a fluid node (interface nodes map to their solid dof), or -1.
  int fluid_dof(int i) const { return fluid_dof_[i]; }
  /// sqrt(A^0_i / A^k_i), the nodal sqrt(det grad Phi_k^{-1}).
  const std::vector<double>& inverse_jacobian_sqrt() const { return cphi_; }
  const std::vector<double>& solid_lumped() const { return solid_.geometry().lumped; }

 private:
  void accumulate(const Eigen::VectorXd& x, ObjectiveTerms* terms, std::vector<Vec2>* g_solid,
                  std::vector<Vec2>* g_fluid, bool* ok) const;

  const SolidModel& solid_;
  const StepState& state_;
  StepParams params_;
  P1Geometry geom_k_;
  std::vector<double> rho_tilde_;
  std::vector<double> node_mass_;  // rho~_i A^k_i
  std::vector<double> cphi_;
  std::vector<int> solid_dof_;
  std::vector<int> fluid_dof_;
  Eigen::Index n_ = 0;
};

struct StepResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  double objective_start = 0.0;
  double grad_norm = 0.0;  // ||g||_inf / (1 + |J|)
  int iterations = 0;
  int backtracks = 0;
};

/// Preconditioned L-BFGS with Armijo backtracking started from the candidate
/// (eta_k, 0). Trial points outside the admissible set count as +inf.
/// Throws LineSearchStall or MaxIterations.
StepResult minimize_step(const StepProblem& problem, const MinimizerOptions& options);

/// Max over the nodal test bank of the discrete Euler-Lagrange pairing, each
/// pairing assembled term by term (pressure on the pushed mesh), normalized by
/// (1 + |J|). Test functions have unit nodal amplitude.
double el_residual(const StepProblem& problem, const Eigen::VectorXd& x);

/// Nodal residual vectors of the discrete Euler-Lagrange equation.
struct ElResidualVectors {
  std::vector<Vec2> solid;  // per solid node (phi = e_a)
  std::vector<Vec2> fluid;  // per fluid node (b = e_i)
};
ElResidualVectors el_residual_vectors(const StepProblem& problem, const Eigen::VectorXd& x);
/// Reduces nodal residuals over the coupled test bank and normalizes.
double reduce_el_residual(const StepProblem& problem, const ElResidualVectors& r, double objective);

}  // namespace varimove
