#pragma once

#include <span>
#include <vector>

#include "varimove/minimizer.hpp"

namespace varimove {

/// Energy ledger of one tau-step. Quantities with a tau in front are already
/// integrated over the step.
struct EnergyReport {
  double elastic_old = 0.0;      // E_kappa(eta_k)
  double potential_old = 0.0;    // U_delta(rho_k) on Omega_k
  double elastic = 0.0;          // E_kappa(eta_{k+1})
  double potential = 0.0;        // U_delta(rho_{k+1}) on Omega_{k+1}
  double kinetic_solid = 0.0;    // rho_s/2 int |(eta_{k+1}-eta_k)/tau|^2
  double kinetic_fluid = 0.0;    // 1/2 int rho_k |v_{k+1}|^2 on Omega_k
  double dissipation_solid = 0.0;  // tau R_kappa(eta_k, (eta_{k+1}-eta_k)/tau)
  double viscous = 0.0;          // tau/2 int S(grad v):grad v
  double kappa_fluid = 0.0;      // tau kappa/2 |v|^2_{H2,h}
  double eps_dissipation = 0.0;  // H'(rho~)^T M_L (rho_k - rho~), the discrete eps-term
  double inertial_solid = 0.0;   // tau/2h rho_s int |(eta_{k+1}-eta_k)/tau - zeta_k|^2
  double inertial_fluid = 0.0;   // tau/2h int |sqrt(rho_k) v - sqrt(det grad Phi_k^-1) w_k|^2
  double supply_solid = 0.0;     // tau/2h rho_s int |zeta_k|^2
  double supply_fluid = 0.0;     // tau/2h int_{Omega_0} |w_k|^2
  double work_solid = 0.0;       // tau int (eta_{k+1}-eta_k)/tau . f_s
  double work_fluid = 0.0;       // tau int rho_k v . f_f

  double dissipation() const { return dissipation_solid + viscous + kappa_fluid + eps_dissipation; }
  double lhs() const { return elastic + potential + dissipation() + inertial_solid + inertial_fluid; }
  double rhs() const { return elastic_old + potential_old + supply_solid + supply_fluid + work_solid + work_fluid; }
};

struct EnergyCheck {
  std::size_t steps = 0;
  std::size_t violations = 0;            // per-step or cumulative inequality failures
  std::size_t negative_dissipation = 0;  // steps with a negative dissipation entry
  long first_violation = -1;
  double worst_margin = 0.0;             // min over steps of (RHS - LHS)/(1 + |RHS|)
  double worst_cumulative_margin = 0.0;  // same for the telescoped window-concatenated form

  bool ok() const { return violations == 0 && negative_dissipation == 0; }
};

/// Checks LHS <= RHS + slack*(1+|RHS|) at every step and for the telescoped
/// sums at every grid time, plus nonnegativity of all dissipation entries.
EnergyCheck check_energy_inequality(std::span<const EnergyReport> reports, double slack = 1e-10);

/// Previous-window data at the same substep, used for the long-time inertia form.
struct HistoryFrame {
  std::vector<Vec2> zeta;      // solid velocity (eta_{k+1} - eta_k)/tau of the previous window
  std::vector<double> rho;     // rho_k of the previous window
  std::vector<double> lumped;  // vertex areas of Omega_k of the previous window
  std::vector<Vec2> v;         // v_{k+1} of the previous window
};

/// Solid and fluid nodal inertia terms of the long-time momentum form:
/// (rho_s/h)(d_t eta(t) - d_t eta(t-h)) and
/// (1/h)(rho v - sqrt(rho(t) rho(t-h) det grad Phi_{-h}) v(t-h)), lumped against nodal tests.
void discrete_inertia_terms(const StepProblem& problem, const Eigen::VectorXd& x, const HistoryFrame& frame,
                            std::vector<Vec2>& solid, std::vector<Vec2>& fluid);

/// Max normalized residual of the long-time momentum form over the coupled nodal
/// test bank. Uses the history frame for the inertia instead of the handoff field.
double momentum_residual(const StepProblem& problem, const Eigen::VectorXd& x, const HistoryFrame& frame);

}  // namespace varimove
