#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "varimove/diagnostics.hpp"
#include "varimove/geometry.hpp"
#include "varimove/minimizer.hpp"
#include "varimove/scenarios.hpp"
#include "varimove/transport.hpp"

namespace varimove {

struct RunParams {
  StepParams step;
  ElasticParams elastic;
  MinimizerOptions minimizer;
  double final_time = 0.32;
  double det_lo = 1e-3;          // flow-map determinant bounds
  double det_hi = 1e3;
  double min_angle_deg = 5.0;    // fluid mesh quality floor
  double collision_tol = 0.0;    // <= 0 selects twice the fluid boundary mesh size
  double self_contact_gap = 0.0; // <= 0 selects four solid mesh sizes
  double mass_tol = 1e-8;        // per-step relative drift flagged in the summary
  double cn_tol = 1e-10;         // Ciarlet-Necas defect, relative to area(Q)

  /// Number of tau-steps per window, h / tau rounded; validated by the config loader.
  int substeps() const;
  long total_steps() const;
};

/// Diagnostics of one accepted tau-step; one CSV row.
struct StepRecord {
  long step = 0;       // global step index k (the step maps t_k to t_{k+1})
  int window = 0;
  int substep = 0;
  double time = 0.0;   // t_{k+1}
  double objective = 0.0, objective_start = 0.0, grad_norm = 0.0;
  int iterations = 0, backtracks = 0;
  double el_residual = 0.0;
  double momentum_residual = 0.0;
  EnergyReport energy;
  double mass = 0.0, mass_drift_step = 0.0, mass_drift_total = 0.0;
  double rho_min = 0.0, rho_max = 0.0, div_sup = 0.0;
  double minmax_lower = 0.0, minmax_upper = 0.0, minmax_slack = 0.0;
  double renormalization = 0.0;  // theta(s) = s^2
  double min_det_solid = 0.0, cn_defect = 0.0, collision_distance = 0.0, fluid_min_angle = 0.0;
  double flow_det_min = 0.0, flow_det_max = 0.0;
  double flow_env_lo = 0.0, flow_env_hi = 0.0;
  double flow_det_consistency = 0.0;  // max |running - direct| / running
  double flow_ode_residual = 0.0;
};

/// Handoff bookkeeping at the start of a window.
struct WindowRecord {
  int window = 0;
  long first_step = 0;
  double w_norm2 = 0.0;       // sum_k int_{Omega_0} |w_k|^2
  double rho_v_norm2 = 0.0;   // sum_k int_{Omega_k^prev} rho_k |v_{k+1}|^2
  double max_rel_error = 0.0; // worst substep relative mismatch
};

/// Grid-time snapshots plus the piecewise interpolants of the solid deformation.
struct Snapshot {
  double time = 0.0;
  std::vector<Vec2> eta;
  std::vector<Vec2> fluid_nodes;
  std::vector<double> rho;
  std::vector<Vec2> v;  // velocity of the step starting here (empty at the last snapshot)
};

class Trajectory {
 public:
  double tau = 0.0;
  std::vector<Snapshot> snapshots;

  /// eta_{k+1} on [t_k, t_{k+1}).
  std::vector<Vec2> eta_bar(double t) const;
  /// eta_k on [t_k, t_{k+1}).
  std::vector<Vec2> eta_lower(double t) const;
  /// Affine interpolation between eta_k and eta_{k+1}.
  std::vector<Vec2> eta_tilde(double t) const;

 private:
  std::size_t index(double t) const;
};

class Simulation {
 public:
  Simulation(Scenario scenario, RunParams params);

  /// One tau-step. Opens a window (handoff and anchoring) when needed.
  /// Throws on minimizer failure, mesh degeneration or collision; the step
  /// that triggered a collision is still recorded.
  const StepRecord& advance();
  bool finished() const { return step_ >= params_.total_steps(); }

  long step() const { return step_; }
  int window() const { return window_; }
  int substep() const { return substep_; }
  double time() const { return static_cast<double>(step_) * params_.step.tau; }

  const Scenario& scenario() const { return scenario_; }
  const RunParams& params() const { return params_; }
  const SolidModel& solid() const { return solid_; }
  const std::vector<Vec2>& eta() const { return eta_; }
  const FluidMesh& fluid() const { return fluid_; }
  const std::vector<double>& rho() const { return rho_; }
  const std::vector<Vec2>& velocity() const { return last_v_; }
  const FlowMapLedger& flow_map() const { return ledger_; }
  const std::vector<StepRecord>& records() const { return records_; }
  const std::vector<WindowRecord>& windows() const { return windows_; }
  const Trajectory& trajectory() const { return trajectory_; }
  double initial_mass() const { return mass0_; }
  double collision_tol() const { return collision_tol_; }
  /// Set when the run ended because of contact.
  const std::optional<std::string>& termination() const { return termination_; }

  void save_checkpoint(std::ostream& out) const;
  void load_checkpoint(std::istream& in);

  /// When false, only the latest snapshot is kept.
  void keep_history(bool on) { keep_history_ = on; }

 private:
  void open_window();
  WindowRecord compute_handoff();
  Vec2 gravity_at(double t) const;

  Scenario scenario_;
  RunParams params_;
  SolidModel solid_;
  double collision_tol_ = 0.0;
  double self_gap_ = 0.0;

  long step_ = 0;
  int window_ = 0;
  int substep_ = 0;
  std::vector<Vec2> eta_;
  FluidMesh fluid_;
  std::vector<double> rho_;
  std::vector<Vec2> last_v_;

  std::vector<HistoryFrame> history_;       // previous window, one frame per substep
  std::vector<HistoryFrame> next_history_;  // being built for the next window
  std::vector<std::vector<Vec2>> w_;        // handoff fields of the current window
  std::vector<double> lumped0_;
  FlowMapLedger ledger_;
  double flow_integral_ = 0.0;

  double mass0_ = 0.0, mass_prev_ = 0.0;
  double rho0_min_ = 0.0, rho0_max_ = 0.0;
  double integrated_div_ = 0.0;
  double mesh_size_ = 0.0;

  std::vector<StepRecord> records_;
  std::vector<WindowRecord> windows_;
  Trajectory trajectory_;
  bool keep_history_ = true;
  std::optional<std::string> termination_;
};

}  // namespace varimove
