#include "varimove/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace varimove {

EnergyCheck check_energy_inequality(std::span<const EnergyReport> reports, double slack) {
  EnergyCheck c;
  c.steps = reports.size();
  c.worst_margin = std::numeric_limits<double>::infinity();
  c.worst_cumulative_margin = std::numeric_limits<double>::infinity();
  if (reports.empty()) {
    c.worst_margin = c.worst_cumulative_margin = 0.0;
    return c;
  }
  double cum_lhs = 0.0, cum_rhs = reports.front().elastic_old + reports.front().potential_old;
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const EnergyReport& r = reports[k];
    bool bad = false;
    for (double d : {r.dissipation_solid, r.viscous, r.kappa_fluid, r.eps_dissipation, r.inertial_solid,
                     r.inertial_fluid, r.supply_solid, r.supply_fluid}) {
      if (!(d >= 0.0)) {
        ++c.negative_dissipation;
        bad = true;
        break;
      }
    }
    const double lhs = r.lhs(), rhs = r.rhs();
    const double margin = (rhs - lhs) / (1.0 + std::abs(rhs));
    c.worst_margin = std::min(c.worst_margin, margin);
    if (!(margin >= -slack)) {
      ++c.violations;
      bad = true;
    }

    cum_lhs += r.dissipation() + r.inertial_solid + r.inertial_fluid;
    cum_rhs += r.supply_solid + r.supply_fluid + r.work_solid + r.work_fluid;
    const double total_lhs = cum_lhs + r.elastic + r.potential;
    const double cmargin = (cum_rhs - total_lhs) / (1.0 + std::abs(cum_rhs));
    c.worst_cumulative_margin = std::min(c.worst_cumulative_margin, cmargin);
    if (!(cmargin >= -slack)) {
      ++c.violations;
      bad = true;
    }
    if (bad && c.first_violation < 0) c.first_violation = static_cast<long>(k);
  }
  return c;
}

void discrete_inertia_terms(const StepProblem& problem, const Eigen::VectorXd& x, const HistoryFrame& frame,
                            std::vector<Vec2>& solid, std::vector<Vec2>& fluid) {
  const StepState& st = problem.state();
  const StepParams& pr = problem.params();
  std::vector<Vec2> eta, disp;
  problem.reconstruct(x, eta, disp);
  const auto& ms = problem.solid_lumped();
  solid.resize(eta.size());
  for (std::size_t a = 0; a < eta.size(); ++a)
    solid[a] = (pr.fluid.rho_s * ms[a] / pr.h) * ((eta[a] - st.eta[a]) / pr.tau - frame.zeta[a]);
  const auto& A = problem.fluid_geometry().lumped;
  fluid.resize(disp.size());
  for (std::size_t i = 0; i < disp.size(); ++i) {
    const double back_det = frame.lumped[i] / A[i];
    const double amp = std::sqrt(st.rho[i] * frame.rho[i] * back_det);
    fluid[i] = (A[i] / pr.h) * (st.rho[i] * disp[i] / pr.tau - amp * frame.v[i]);
  }
}

double momentum_residual(const StepProblem& problem, const Eigen::VectorXd& x, const HistoryFrame& frame) {
  ElResidualVectors r = el_residual_vectors(problem, x);
  // Swap the handoff-field inertia for the history form.
  const StepState& st = problem.state();
  const StepParams& pr = problem.params();
  std::vector<Vec2> eta, disp;
  problem.reconstruct(x, eta, disp);
  const auto& ms = problem.solid_lumped();
  const auto& A = problem.fluid_geometry().lumped;
  const auto& c = problem.inverse_jacobian_sqrt();
  std::vector<Vec2> hs, hf;
  discrete_inertia_terms(problem, x, frame, hs, hf);
  for (std::size_t a = 0; a < eta.size(); ++a)
    r.solid[a] += hs[a] - (pr.fluid.rho_s * ms[a] / pr.h) * ((eta[a] - st.eta[a]) / pr.tau - st.zeta[a]);
  for (std::size_t i = 0; i < disp.size(); ++i) {
    const Vec2 handoff = (A[i] / pr.h) * (st.rho[i] * disp[i] / pr.tau - std::sqrt(st.rho[i]) * c[i] * st.w[i]);
    r.fluid[i] += hf[i] - handoff;
  }
  return reduce_el_residual(problem, r, problem.evaluate(x));
}

}  // namespace varimove
