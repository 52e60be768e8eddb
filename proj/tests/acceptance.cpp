// Acceptance harness: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "test_support.hpp"
#include "varimove/diagnostics.hpp"
#include "varimove/geometry.hpp"
#include "varimove/log.hpp"
#include "varimove/minimizer.hpp"
#include "varimove/timestepper.hpp"

using namespace varimove;
namespace vt = varimove::testing;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  fmt::print("{} {:>2} {:<30} {}\n", pass ? "PASS" : "FAIL", id, name, detail);
  std::fflush(stdout);
}

template <class F>
double max_over(const std::vector<StepRecord>& recs, F&& f) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& r : recs) m = std::max(m, f(r));
  return m;
}

template <class F>
double min_over(const std::vector<StepRecord>& recs, F&& f) {
  return -max_over(recs, [&](const StepRecord& r) { return -f(r); });
}

struct RunData {
  std::vector<StepRecord> records;
  std::vector<WindowRecord> windows;
  std::vector<Vec2> eta;
  std::vector<double> rho;
  double tau = 0.0;
  double mesh_size = 0.0;
  double solid_area = 0.0;
  std::string error;
};

RunData simulate(Scenario sc, RunParams p) {
  RunData d;
  d.tau = p.step.tau;
  d.mesh_size = max_edge_length(sc.fluid.nodes, sc.fluid.triangles);
  d.solid_area = sc.solid.area();
  Simulation sim(std::move(sc), p);
  sim.keep_history(false);
  try {
    while (!sim.finished()) sim.advance();
  } catch (const std::exception& e) {
    d.error = e.what();
  }
  d.records = sim.records();
  d.windows = sim.windows();
  d.eta = sim.eta();
  d.rho = sim.rho();
  return d;
}

std::vector<EnergyReport> energies(const RunData& d) {
  std::vector<EnergyReport> e;
  for (const auto& r : d.records) e.push_back(r.energy);
  return e;
}

double order(double coarse, double fine) { return std::log2(coarse / fine); }

// ---------------------------------------------------------------------------

void energy_criterion(const RunData& fall, const RunData& rest) {
  const EnergyCheck a = check_energy_inequality(energies(fall), 1e-10);
  const EnergyCheck b = check_energy_inequality(energies(rest), 1e-10);
  auto faulty = energies(fall);
  for (auto& e : faulty) {
    e.dissipation_solid = -e.dissipation_solid;
    e.viscous = -e.viscous;
    e.kappa_fluid = -e.kappa_fluid;
    e.eps_dissipation = -e.eps_dissipation;
  }
  const EnergyCheck f = check_energy_inequality(faulty, 1e-10);
  const bool pass = fall.error.empty() && rest.error.empty() && a.steps >= 500 && b.steps >= 500 && a.ok() &&
                    b.ok() && !f.ok();
  report(1, "energy inequality", pass,
         fmt::format("falling-disk {} steps worst margin {:.3e} (cumulative {:.3e}); rest {} steps worst margin "
                     "{:.3e}; negated dissipation flagged at {} steps",
                     a.steps, a.worst_margin, a.worst_cumulative_margin, b.steps, b.worst_margin,
                     f.negative_dissipation));
}

void mass_criterion(const RunData& fall) {
  const double step = max_over(fall.records, [](const StepRecord& r) { return r.mass_drift_step; });
  const double total = max_over(fall.records, [](const StepRecord& r) { return r.mass_drift_total; });
  const bool pass = fall.records.size() >= 1000 && step <= 1e-8 && total <= 1e-6;
  report(2, "mass conservation", pass,
         fmt::format("{} steps, max per-step drift {:.3e} (<= 1e-8), total drift {:.3e} (<= 1e-6)",
                     fall.records.size(), step, total));
}

void minmax_criterion(const RunData& fall, const std::vector<RunData>& refined) {
  auto limit = [](const RunData& d) { return 1.0 + 5.0 * (d.tau + d.mesh_size); };
  auto slack = [](const RunData& d) { return max_over(d.records, [](const StepRecord& r) { return r.minmax_slack; }); };
  const double rho_min = min_over(fall.records, [](const StepRecord& r) { return r.rho_min; });
  bool pass = rho_min > 0.0 && slack(fall) <= limit(fall);
  std::string tight;
  for (std::size_t l = 0; l < refined.size(); ++l) {
    const RunData& d = refined[l];
    pass = pass && min_over(d.records, [](const StepRecord& r) { return r.rho_min; }) > 0.0 && slack(d) <= limit(d);
    if (l > 0) pass = pass && limit(d) < limit(refined[l - 1]);
    tight += fmt::format("{}{:.4f}/{:.4f}", l ? ", " : "", slack(d), limit(d));
  }
  report(3, "positivity and min/max", pass,
         fmt::format("min rho {:.4f}; slack {:.4f} <= {:.4f}; refined slack/limit {}", rho_min, slack(fall),
                     limit(fall), tight));
}

void stationarity_criterion(const RunData& fall, const RunData& rest) {
  const double a = max_over(fall.records, [](const StepRecord& r) { return r.el_residual; });
  const double b = max_over(rest.records, [](const StepRecord& r) { return r.el_residual; });
  report(4, "stationarity", a <= 1e-7 && b <= 1e-7,
         fmt::format("max EL residual falling-disk {:.3e}, rest {:.3e} (<= 1e-7)", a, b));
}

void gradient_criterion() {
  constexpr int kStates = 20;
  Scenario sc = falling_disk(vt::small_grid(20));
  SolidModel model(sc.solid, ElasticParams{});
  const P1Geometry g = build_p1_geometry(sc.solid.nodes, sc.solid.elements);
  std::mt19937 rng(2024);
  double e_err = 0.0, r_err = 0.0, k_err = 0.0, j_err = 0.0;
  for (int s = 0; s < kStates; ++s) {
    const auto eta = vt::jitter(sc.solid.nodes, 0.005, rng);
    const auto b = vt::random_field(sc.solid.num_nodes(), 1.0, rng);
    e_err = std::max(e_err, vt::fd_gradient_error([&](const std::vector<Vec2>& x) {
      return model.elastic_energy_kappa(x, false).value;
    }, eta, model.elastic_energy_kappa(eta).gradient));
    r_err = std::max(r_err, vt::fd_gradient_error([&](const std::vector<Vec2>& x) {
      return model.dissipation_kappa(eta, x, false).value;
    }, b, model.dissipation_kappa(eta, b).gradient));
    k_err = std::max(k_err, vt::fd_gradient_error([&](const std::vector<Vec2>& x) {
      return kappa_regularizer(x, g, sc.solid.elements, 1.0, false).value;
    }, b, kappa_regularizer(b, g, sc.solid.elements, 1.0).gradient));
  }
  for (int s = 0; s < kStates; ++s) {
    vt::Fixture f = vt::step_fixture(12);
    vt::randomize(f, rng);
    SolidModel m(f.sc.solid, f.elastic);
    StepProblem prob(m, f.state, f.params);
    std::uniform_real_distribution<double> u(-2e-4, 2e-4);
    Eigen::VectorXd x(prob.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = u(rng);
    Eigen::VectorXd grad;
    prob.evaluate(x, &grad);
    Eigen::VectorXd xp = x;
    double worst = 0.0;
    const double step = 1e-7;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      xp[i] = x[i] + step;
      const double jp = prob.evaluate(xp);
      xp[i] = x[i] - step;
      const double jm = prob.evaluate(xp);
      xp[i] = x[i];
      worst = std::max(worst, std::abs((jp - jm) / (2 * step) - grad[i]));
    }
    j_err = std::max(j_err, worst / grad.lpNorm<Eigen::Infinity>());
  }
  const bool pass = std::max({e_err, r_err, k_err, j_err}) <= 1e-6;
  report(5, "gradient oracles", pass,
         fmt::format("{} states each, max rel error: E {:.2e}, R {:.2e}, kappa {:.2e}, step objective {:.2e}",
                     kStates, e_err, r_err, k_err, j_err));
}

void constitutive_criterion() {
  const FluidParams fp;
  double p_err = 0.0;
  for (int i = -60; i <= 60; ++i) {
    const double rho = std::pow(10.0, i / 20.0);
    const double p = pressure_delta(fp, rho);
    p_err = std::max(p_err, std::abs(p - (potential_delta_prime(fp, rho) * rho - potential_delta(fp, rho))) / p);
  }
  Scenario sc = falling_disk(vt::small_grid(20));
  SolidModel model(sc.solid, ElasticParams{});
  std::mt19937 rng(77);
  double hom = 0.0, euler = 0.0;
  for (int s = 0; s < 20; ++s) {
    const auto eta = vt::jitter(sc.solid.nodes, 0.005, rng);
    const auto b = vt::random_field(sc.solid.num_nodes(), 1.0, rng);
    const auto r = model.dissipation(eta, b);
    for (double lambda : {-3.0, 0.25, 2.0}) {
      std::vector<Vec2> lb(b);
      for (auto& x : lb) x *= lambda;
      hom = std::max(hom, std::abs(model.dissipation(eta, lb, false).value - lambda * lambda * r.value) /
                              (lambda * lambda * r.value));
    }
    double pairing = 0.0;
    for (std::size_t a = 0; a < b.size(); ++a) pairing += r.gradient[a].dot(b[a]);
    euler = std::max(euler, std::abs(pairing - 2.0 * r.value) / (2.0 * r.value));
  }
  report(6, "constitutive identities", std::max({p_err, hom, euler}) <= 1e-12,
         fmt::format("pressure identity {:.2e} on [1e-3, 1e3]; R homogeneity {:.2e}; <D2 R, b> = 2R {:.2e}", p_err,
                     hom, euler));
}

void flow_map_criterion(const RunData& fall, const std::vector<RunData>& refined) {
  auto excess = [](const RunData& d) {
    return max_over(d.records, [](const StepRecord& r) {
      return std::max(r.flow_env_lo - r.flow_det_min, r.flow_det_max - r.flow_env_hi);
    });
  };
  std::vector<double> ode;
  double env = excess(fall);
  for (const auto& d : refined) {
    env = std::max(env, excess(d));
    ode.push_back(max_over(d.records, [](const StepRecord& r) { return r.flow_ode_residual; }));
  }
  double worst_order = std::numeric_limits<double>::infinity();
  std::string orders;
  for (std::size_t l = 1; l < ode.size(); ++l) {
    worst_order = std::min(worst_order, order(ode[l - 1], ode[l]));
    orders += fmt::format("{}{:.3f}", l > 1 ? ", " : "", order(ode[l - 1], ode[l]));
  }
  report(7, "flow-map bounds", env <= 0.0 && worst_order >= 0.8,
         fmt::format("max envelope excess {:.3e} (<= 0); ODE residual {:.3e} -> {:.3e} -> {:.3e}, order {}", env,
                     ode[0], ode[1], ode[2], orders));
}

void injectivity_criterion(const RunData& fall, const RunData& rest) {
  const double cn = std::max(max_over(fall.records, [](const StepRecord& r) { return r.cn_defect; }),
                             max_over(rest.records, [](const StepRecord& r) { return r.cn_defect; }));
  const double limit = 1e-10 * fall.solid_area;
  const ReferenceSolidMesh strip = oracles::strip(3);
  std::vector<Vec2> eta = strip.nodes;
  for (auto& p : eta)
    if (p.x() > 2.5) p.x() = 4.0 - p.x() - 0.3;
  double integral = 0.0;
  for (const auto& t : strip.elements) integral += signed_area(eta[t[0]], eta[t[1]], eta[t[2]]);
  const double oracle = std::abs(oracles::union_area_oracle(strip, eta) - integral);
  const double measured = ciarlet_necas_defect(strip, eta);
  const bool pass = cn <= limit && oracle > 0.1 && std::abs(measured - oracle) <= 1e-10;
  report(8, "injectivity", pass,
         fmt::format("max defect {:.3e} (<= {:.3e}); folded strip defect {:.6f} vs oracle {:.6f}, error {:.2e}", cn,
                     limit, measured, oracle, std::abs(measured - oracle)));
}

void handoff_criterion(const RunData& fall) {
  double worst = 0.0;
  std::size_t nontrivial = 0;
  for (const auto& w : fall.windows) {
    worst = std::max(worst, w.max_rel_error);
    if (w.rho_v_norm2 > 0.0) {
      ++nontrivial;
      worst = std::max(worst, std::abs(w.w_norm2 - w.rho_v_norm2) / w.rho_v_norm2);
    }
  }
  report(9, "handoff identity", nontrivial >= 4 && worst <= 1e-6,
         fmt::format("{} windows with motion, max relative mismatch {:.3e} (<= 1e-6)", nontrivial, worst));
}

void refinement_criterion(const std::vector<RunData>& refined) {
  Scenario sc = falling_disk(GridSpec{});
  const auto fluid_mass = build_p1_geometry(sc.fluid.nodes, sc.fluid.triangles).lumped;
  const auto solid_mass = SolidModel(sc.solid, ElasticParams{}).geometry().lumped;
  double de[2], dr[2];
  for (int l = 0; l < 2; ++l) {
    double e = 0.0, r = 0.0;
    for (std::size_t a = 0; a < solid_mass.size(); ++a)
      e += solid_mass[a] * (refined[l].eta[a] - refined[l + 1].eta[a]).squaredNorm();
    for (std::size_t i = 0; i < fluid_mass.size(); ++i)
      r += fluid_mass[i] * std::pow(refined[l].rho[i] - refined[l + 1].rho[i], 2);
    de[l] = std::sqrt(e);
    dr[l] = std::sqrt(r);
  }
  const double oe = order(de[0], de[1]), orho = order(dr[0], dr[1]);
  bool ran = true;
  for (const auto& d : refined) ran = ran && d.error.empty();
  report(10, "refinement order", ran && oe >= 0.8 && orho >= 0.8,
         fmt::format("L2 differences eta {:.3e} -> {:.3e} (order {:.3f}), rho {:.3e} -> {:.3e} (order {:.3f})", de[0],
                     de[1], oe, dr[0], dr[1], orho));
}

}  // namespace

int main() {
  init_logging();
  const auto start = std::chrono::steady_clock::now();

  RunParams fall_params;
  fall_params.final_time = 1000 * fall_params.step.tau;
  const RunData fall = simulate(falling_disk(GridSpec{}), fall_params);
  if (!fall.error.empty()) fmt::print("falling-disk run stopped early: {}\n", fall.error);

  RunParams rest_params;
  rest_params.final_time = 512 * rest_params.step.tau;
  const RunData rest = simulate(rest_state(GridSpec{}, rest_params.elastic, rest_params.step.fluid), rest_params);
  if (!rest.error.empty()) fmt::print("rest run stopped early: {}\n", rest.error);

  // tau = h/16, h/32, h/64 over two windows.
  std::vector<RunData> refined;
  for (int n : {16, 32, 64}) {
    RunParams p;
    p.step.tau = p.step.h / n;
    p.final_time = 2.0 * p.step.h;
    refined.push_back(simulate(falling_disk(GridSpec{}), p));
    if (!refined.back().error.empty()) fmt::print("refinement run tau = h/{} failed: {}\n", n, refined.back().error);
  }

  energy_criterion(fall, rest);
  mass_criterion(fall);
  minmax_criterion(fall, refined);
  stationarity_criterion(fall, rest);
  gradient_criterion();
  constitutive_criterion();
  flow_map_criterion(fall, refined);
  injectivity_criterion(fall, rest);
  handoff_criterion(fall);
  refinement_criterion(refined);

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  fmt::print("{} of 10 criteria passed ({:.1f} s)\n", 10 - failures, secs);
  return failures == 0 ? 0 : 1;
}
