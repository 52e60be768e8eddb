#include "varimove/invariants.hpp"

#include <algorithm>
#include <limits>

namespace varimove {

InvariantLimits invariant_limits(const RunParams& params, const Scenario& scenario) {
  InvariantLimits l;
  l.el_tol = 10.0 * params.minimizer.grad_tol;
  l.mass_step = params.mass_tol;
  const double mesh = max_edge_length(scenario.fluid.nodes, scenario.fluid.triangles);
  l.minmax_slack = 5.0 * (params.step.tau + mesh);
  l.cn_tol = params.cn_tol * scenario.solid.area();
  return l;
}

std::vector<InvariantResult> check_invariants(std::span<const StepRecord> records,
                                              std::span<const WindowRecord> windows, const InvariantLimits& limits) {
  std::vector<InvariantResult> out;
  auto max_of = [&](auto field) {
    double m = 0.0;
    for (const auto& r : records) m = std::max(m, field(r));
    return m;
  };
  auto upper = [&](std::string name, double worst, double limit) {
    out.push_back({std::move(name), worst <= limit, worst, limit});
  };

  std::vector<EnergyReport> energy;
  energy.reserve(records.size());
  for (const auto& r : records) energy.push_back(r.energy);
  const EnergyCheck ec = check_energy_inequality(energy, limits.energy_slack);
  out.push_back({"energy inequality margin", ec.violations == 0, ec.worst_margin, -limits.energy_slack});
  out.push_back({"energy cumulative margin", ec.violations == 0, ec.worst_cumulative_margin, -limits.energy_slack});
  out.push_back({"dissipation nonnegative", ec.negative_dissipation == 0, static_cast<double>(ec.negative_dissipation), 0.0});

  upper("mass drift per step", max_of([](const StepRecord& r) { return r.mass_drift_step; }), limits.mass_step);
  upper("mass drift total", max_of([](const StepRecord& r) { return r.mass_drift_total; }), limits.mass_total);

  double rho_min = std::numeric_limits<double>::infinity();
  for (const auto& r : records) rho_min = std::min(rho_min, r.rho_min);
  if (records.empty()) rho_min = 1.0;
  out.push_back({"density positive", rho_min > 0.0, rho_min, 0.0});
  upper("min/max envelope slack", max_of([](const StepRecord& r) { return r.minmax_slack; }), 1.0 + limits.minmax_slack);

  upper("EL residual", max_of([](const StepRecord& r) { return r.el_residual; }), limits.el_tol);
  upper("momentum residual", max_of([](const StepRecord& r) { return r.momentum_residual; }), limits.el_tol);
  upper("Ciarlet-Necas defect", max_of([](const StepRecord& r) { return r.cn_defect; }), limits.cn_tol);

  double env_excess = 0.0;
  for (const auto& r : records)
    env_excess = std::max({env_excess, r.flow_env_lo - r.flow_det_min, r.flow_det_max - r.flow_env_hi});
  upper("flow-map envelope excess", env_excess, 0.0);
  upper("flow-map det consistency", max_of([](const StepRecord& r) { return r.flow_det_consistency; }),
        limits.flow_consistency);

  double handoff = 0.0;
  for (const auto& w : windows) handoff = std::max(handoff, w.max_rel_error);
  upper("handoff norm identity", handoff, limits.handoff_tol);
  return out;
}

}  // namespace varimove
