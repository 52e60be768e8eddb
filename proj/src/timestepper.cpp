#include "varimove/timestepper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "varimove/errors.hpp"

namespace varimove {

int RunParams::substeps() const { return static_cast<int>(std::lround(step.h / step.tau)); }

long RunParams::total_steps() const { return std::lround(final_time / step.tau); }

std::size_t Trajectory::index(double t) const {
  if (snapshots.size() < 2) throw Error(ErrorKind::Io, "trajectory has fewer than two snapshots");
  const double t0 = snapshots.front().time;
  const double s = (t - t0) / tau;
  const long k = static_cast<long>(std::floor(s + 1e-9));
  return static_cast<std::size_t>(std::clamp<long>(k, 0, static_cast<long>(snapshots.size()) - 2));
}

std::vector<Vec2> Trajectory::eta_bar(double t) const { return snapshots[index(t) + 1].eta; }

std::vector<Vec2> Trajectory::eta_lower(double t) const { return snapshots[index(t)].eta; }

std::vector<Vec2> Trajectory::eta_tilde(double t) const {
  const std::size_t k = index(t);
  const double s = std::clamp((t - snapshots[k].time) / tau, 0.0, 1.0);
  std::vector<Vec2> out(snapshots[k].eta.size());
  for (std::size_t a = 0; a < out.size(); ++a) out[a] = (1.0 - s) * snapshots[k].eta[a] + s * snapshots[k + 1].eta[a];
  return out;
}

namespace {

double fluid_boundary_mesh_size(const FluidMesh& fm) {
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : fm.triangles)
    for (int k = 0; k < 3; ++k) ++count[std::minmax(t[k], t[(k + 1) % 3])];
  double m = 0.0;
  for (const auto& [e, c] : count)
    if (c == 1) m = std::max(m, (fm.nodes[e.first] - fm.nodes[e.second]).norm());
  return m;
}

}  // namespace

Simulation::Simulation(Scenario scenario, RunParams params)
    : scenario_(std::move(scenario)), params_(params), solid_(scenario_.solid, params.elastic) {
  const int N = params_.substeps();
  if (N < 1 || std::abs(N * params_.step.tau - params_.step.h) > 1e-9 * params_.step.h)
    throw Error(ErrorKind::ConfigInvalid, "h / tau must be a positive integer");
  eta_ = scenario_.solid.nodes;
  fluid_ = scenario_.fluid;
  rho_ = scenario_.rho0;
  for (double r : rho_)
    if (!(r > 0.0)) throw Error(ErrorKind::NegativeDensity, "initial density must be positive");

  collision_tol_ = params_.collision_tol > 0.0 ? params_.collision_tol : 2.0 * fluid_boundary_mesh_size(fluid_);
  self_gap_ = params_.self_contact_gap > 0.0 ? params_.self_contact_gap
                                             : 4.0 * max_edge_length(scenario_.solid.nodes, scenario_.solid.elements);
  mesh_size_ = max_edge_length(fluid_.nodes, fluid_.triangles);

  const P1Geometry g0 = build_p1_geometry(fluid_.nodes, fluid_.triangles);
  mass0_ = mass_prev_ = total_mass(g0.lumped, rho_);
  rho0_min_ = *std::min_element(rho_.begin(), rho_.end());
  rho0_max_ = *std::max_element(rho_.begin(), rho_.end());

  // First window: zeta = eta_1, w = q0 / sqrt(rho0), written as history frames
  // with rho = rho0, areas of Omega_0 and v = q0 / rho0.
  HistoryFrame first;
  first.zeta = scenario_.eta1;
  first.rho = rho_;
  first.lumped = g0.lumped;
  first.v.resize(fluid_.num_nodes());
  for (std::size_t i = 0; i < first.v.size(); ++i) first.v[i] = scenario_.momentum0[i] / rho_[i];
  history_.assign(N, first);
  ledger_ = FlowMapLedger(fluid_, params_.det_lo, params_.det_hi);
  last_v_.assign(fluid_.num_nodes(), Vec2::Zero());

  trajectory_.tau = params_.step.tau;
  trajectory_.snapshots.push_back({0.0, eta_, fluid_.nodes, rho_, {}});
}

Vec2 Simulation::gravity_at(double t) const {
  const double ramp = scenario_.gravity_ramp;
  return ramp > 0.0 ? std::min(1.0, t / ramp) * scenario_.gravity : scenario_.gravity;
}

WindowRecord Simulation::compute_handoff() {
  const int N = params_.substeps();
  w_.assign(N, std::vector<Vec2>(fluid_.num_nodes()));
  WindowRecord rec;
  rec.window = window_;
  rec.first_step = step_;
  for (int k = 0; k < N; ++k) {
    const HistoryFrame& f = history_[k];
    double wn = 0.0, rv = 0.0;
    for (std::size_t i = 0; i < fluid_.num_nodes(); ++i) {
      // Transport along the ledger: Lagrangian node i at t_k of the previous window
      // is node i of Omega_0, and det grad(Phi(t) o Phi(h)^-1) is A^prev_k / A^0 nodally.
      w_[k][i] = std::sqrt(f.rho[i] * f.lumped[i] / lumped0_[i]) * f.v[i];
      wn += lumped0_[i] * w_[k][i].squaredNorm();
      rv += f.lumped[i] * f.rho[i] * f.v[i].squaredNorm();
    }
    rec.w_norm2 += wn;
    rec.rho_v_norm2 += rv;
    const double scale = std::max(wn, rv);
    if (scale > 0.0) rec.max_rel_error = std::max(rec.max_rel_error, std::abs(wn - rv) / scale);
  }
  return rec;
}

void Simulation::open_window() {
  ledger_.anchor();
  flow_integral_ = 0.0;
  const P1Geometry g0 = build_p1_geometry(fluid_.nodes, fluid_.triangles);
  lumped0_ = g0.lumped;
  WindowRecord rec = compute_handoff();
  windows_.push_back(rec);
  next_history_.clear();
  spdlog::info("window {} opens at step {} (t = {:.6g}), handoff mismatch {:.3e}", window_, step_, time(),
               rec.max_rel_error);
}

const StepRecord& Simulation::advance() {
  if (finished()) throw Error(ErrorKind::Io, "simulation already reached the final time");
  if (substep_ == 0) open_window();

  const double tau = params_.step.tau, h = params_.step.h;
  const FluidParams& fp = params_.step.fluid;
  const int k = substep_;

  StepState st;
  st.eta = eta_;
  st.fluid = fluid_;
  st.rho = rho_;
  st.zeta = history_[k].zeta;
  st.w = w_[k];
  st.lumped0 = lumped0_;
  const Vec2 g = gravity_at(time());
  st.f_solid = fp.rho_s * g;
  st.f_fluid = g;

  StepProblem problem(solid_, st, params_.step);
  const StepResult res = minimize_step(problem, params_.minimizer);

  StepRecord rec;
  rec.step = step_;
  rec.window = window_;
  rec.substep = k;
  rec.time = static_cast<double>(step_ + 1) * tau;
  rec.objective = res.objective;
  rec.objective_start = res.objective_start;
  rec.grad_norm = res.grad_norm;
  rec.iterations = res.iterations;
  rec.backtracks = res.backtracks;
  rec.el_residual = el_residual(problem, res.x);
  rec.momentum_residual = momentum_residual(problem, res.x, history_[k]);

  std::vector<Vec2> eta_new, disp;
  problem.reconstruct(res.x, eta_new, disp);
  std::vector<Vec2> v(disp.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = disp[i] / tau;

  const P1Geometry& gk = problem.fluid_geometry();
  const PushForwardResult push = push_forward_fluid_mesh(fluid_, v, tau, params_.step.jacobian_floor);
  const P1Geometry gnew = build_p1_geometry(push.mesh.nodes, push.mesh.triangles, gk.edges);
  const std::vector<double> rho_new = transport_density(problem.rho_tilde(), gk.lumped, gnew.lumped);

  // Energy ledger.
  const ObjectiveTerms t = problem.terms(res.x);
  EnergyReport& en = rec.energy;
  en.elastic_old = solid_.elastic_energy_kappa(eta_, false).value;
  en.potential_old = potential_energy(fp, gk.lumped, rho_);
  en.elastic = t.elastic;
  en.potential = t.potential;
  en.dissipation_solid = t.dissipation_solid;
  en.viscous = t.viscous;
  en.kappa_fluid = t.kappa_fluid;
  en.eps_dissipation = eps_dissipation(fp, gk.lumped, rho_, problem.rho_tilde());
  en.inertial_solid = t.inertial_solid;
  en.inertial_fluid = t.inertial_fluid;
  en.work_solid = t.work_solid;
  en.work_fluid = t.work_fluid;
  const auto& ms = solid_.geometry().lumped;
  for (std::size_t a = 0; a < eta_.size(); ++a) {
    en.supply_solid += ms[a] * st.zeta[a].squaredNorm();
    en.kinetic_solid += ms[a] * ((eta_new[a] - eta_[a]) / tau).squaredNorm();
  }
  en.supply_solid *= tau / (2.0 * h) * fp.rho_s;
  en.kinetic_solid *= 0.5 * fp.rho_s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    en.supply_fluid += lumped0_[i] * st.w[i].squaredNorm();
    en.kinetic_fluid += gk.lumped[i] * rho_[i] * v[i].squaredNorm();
  }
  en.supply_fluid *= tau / (2.0 * h);
  en.kinetic_fluid *= 0.5;

  // Mass and density certificates.
  rec.mass = total_mass(gnew.lumped, rho_new);
  rec.mass_drift_step = std::abs(rec.mass - mass_prev_) / mass0_;
  rec.mass_drift_total = std::abs(rec.mass - mass0_) / mass0_;
  rec.rho_min = *std::min_element(rho_new.begin(), rho_new.end());
  rec.rho_max = *std::max_element(rho_new.begin(), rho_new.end());
  const auto& tris = fluid_.triangles;
  std::vector<double> div(tris.size());
  double flow_rate = 0.0;
  for (std::size_t e = 0; e < tris.size(); ++e) {
    const Mat2 L = element_gradient(gk, tris, v, e);
    div[e] = L.trace();
    rec.div_sup = std::max(rec.div_sup, std::abs(div[e]));
    flow_rate = std::max(flow_rate, std::abs(L.trace()) + tau * std::abs(L.determinant()));
  }
  integrated_div_ += tau * rec.div_sup;
  rec.minmax_lower = rho0_min_ * std::exp(-integrated_div_);
  rec.minmax_upper = rho0_max_ * std::exp(integrated_div_);
  rec.minmax_slack = std::max(rec.minmax_lower / rec.rho_min, rec.rho_max / rec.minmax_upper);

  TransportStepRecord tr{tau, fp.epsilon, tris, gk, gnew.lumped, rho_, problem.rho_tilde(), rho_new, div};
  rec.renormalization =
      renormalization_step_residual(tr, Renormalizer{[](double s) { return s * s; }, [](double s) { return 2.0 * s; }});

  // Flow map.
  const std::vector<double> running_before = ledger_.running_det();
  ledger_.compose(push);
  flow_integral_ += tau * flow_rate;
  rec.flow_env_lo = std::exp(-2.0 * flow_integral_);
  rec.flow_env_hi = std::exp(2.0 * flow_integral_);
  const auto& running = ledger_.running_det();
  const std::vector<double> direct = ledger_.direct_det();
  rec.flow_det_min = *std::min_element(running.begin(), running.end());
  rec.flow_det_max = *std::max_element(running.begin(), running.end());
  for (std::size_t e = 0; e < running.size(); ++e) {
    rec.flow_det_consistency = std::max(rec.flow_det_consistency, std::abs(running[e] - direct[e]) / running[e]);
    rec.flow_ode_residual =
        std::max(rec.flow_ode_residual, std::abs((running[e] - running_before[e]) / tau - div[e] * running_before[e]));
  }

  // Solid admissibility and contact.
  rec.min_det_solid = min_det(scenario_.solid, eta_new);
  rec.cn_defect = ciarlet_necas_defect(scenario_.solid, eta_new);
  rec.collision_distance = collision_distance(scenario_.solid, eta_new, scenario_.container, self_gap_);
  rec.fluid_min_angle = push.mesh.min_angle();

  // Commit.
  {
    HistoryFrame frame;
    frame.zeta.resize(eta_.size());
    for (std::size_t a = 0; a < eta_.size(); ++a) frame.zeta[a] = (eta_new[a] - eta_[a]) / tau;
    frame.rho = rho_;
    frame.lumped = gk.lumped;
    frame.v = v;
    next_history_.push_back(std::move(frame));
  }
  eta_ = std::move(eta_new);
  fluid_ = push.mesh;
  rho_ = rho_new;
  last_v_ = v;
  mass_prev_ = rec.mass;
  ++step_;
  if (++substep_ == params_.substeps()) {
    history_ = std::move(next_history_);
    next_history_.clear();
    substep_ = 0;
    ++window_;
  }
  trajectory_.snapshots.back().v = v;
  if (!keep_history_) trajectory_.snapshots.erase(trajectory_.snapshots.begin(), trajectory_.snapshots.end() - 1);
  trajectory_.snapshots.push_back({rec.time, eta_, fluid_.nodes, rho_, {}});
  records_.push_back(rec);

  spdlog::debug("step {} t={:.6g} J={:.10g} it={} |g|={:.2e} el={:.2e} mass drift {:.2e}", rec.step, rec.time,
                rec.objective, rec.iterations, rec.grad_norm, rec.el_residual, rec.mass_drift_total);

  if (rec.collision_distance < collision_tol_) {
    termination_ = fmt::format("contact at t = {:.6g}: distance {:.6g} below tolerance {:.6g}", rec.time,
                               rec.collision_distance, collision_tol_);
    throw Error(ErrorKind::CollisionDetected, *termination_);
  }
  if (rec.fluid_min_angle < params_.min_angle_deg * std::numbers::pi / 180.0)
    throw Error(ErrorKind::MeshQualityExhausted,
                fmt::format("fluid mesh minimum angle {:.3g} deg below the floor",
                            rec.fluid_min_angle * 180.0 / std::numbers::pi));
  return records_.back();
}

}  // namespace varimove
