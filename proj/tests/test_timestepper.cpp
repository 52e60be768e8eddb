#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "test_support.hpp"
#include "varimove/diagnostics.hpp"
#include "varimove/errors.hpp"
#include "varimove/timestepper.hpp"

using namespace varimove;

namespace {

RunParams short_run(double windows) {
  RunParams p;
  p.final_time = windows * p.step.h;
  return p;
}

// Two windows of the falling disk, shared by several tests.
const Simulation& falling_run() {
  static const Simulation sim = [] {
    Simulation s(falling_disk(varimove::testing::small_grid(12)), short_run(2));
    while (!s.finished()) s.advance();
    return s;
  }();
  return sim;
}

double max_deviation(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, (a[i] - b[i]).norm());
  return m;
}

}  // namespace

TEST(RunParams, SubstepsAndTotalSteps) {
  RunParams p;
  EXPECT_EQ(p.substeps(), 16);
  EXPECT_EQ(p.total_steps(), 256);
  p.final_time = 0.0;
  EXPECT_EQ(p.total_steps(), 0);
}

TEST(Simulation, RestStateStaysAtRestAcrossWindows) {
  RunParams p = short_run(3);
  Simulation sim(rest_state(varimove::testing::small_grid(12), p.elastic, p.step.fluid), p);
  const auto eta0 = sim.eta();
  const auto rho0 = sim.rho();
  while (!sim.finished()) {
    const StepRecord& r = sim.advance();
    EXPECT_EQ(r.iterations, 0);
    EXPECT_LE(r.el_residual, 1e-12);
  }
  EXPECT_EQ(sim.step(), 48);
  EXPECT_LE(max_deviation(sim.eta(), eta0), 1e-14);
  for (std::size_t i = 0; i < rho0.size(); ++i) EXPECT_NEAR(sim.rho()[i], rho0[i], 1e-13);
  for (const auto& v : sim.velocity()) EXPECT_LE(v.norm(), 1e-12);
  ASSERT_EQ(sim.windows().size(), 3u);
  for (const auto& w : sim.windows()) {
    EXPECT_LE(w.w_norm2, 1e-24);
    EXPECT_LE(w.rho_v_norm2, 1e-24);
  }
}

TEST(Simulation, ZeroInitialVelocityGivesZeroFirstHandoff) {
  const Simulation& sim = falling_run();
  ASSERT_FALSE(sim.windows().empty());
  EXPECT_EQ(sim.windows()[0].w_norm2, 0.0);
  EXPECT_EQ(sim.windows()[0].first_step, 0);
  EXPECT_EQ(sim.windows()[0].rho_v_norm2, 0.0);
}

TEST(Simulation, HandoffCarriesTheKineticEnergyOfThePreviousWindow) {
  const Simulation& sim = falling_run();
  ASSERT_EQ(sim.windows().size(), 2u);
  const WindowRecord& w = sim.windows()[1];
  EXPECT_EQ(w.first_step, 16);
  EXPECT_GT(w.w_norm2, 0.0);
  EXPECT_NEAR(w.w_norm2, w.rho_v_norm2, 1e-12 * w.rho_v_norm2);
  EXPECT_LE(w.max_rel_error, 1e-12);
}

TEST(Simulation, FallingDiskStepsAreStationaryAndConserveMass) {
  const Simulation& sim = falling_run();
  ASSERT_EQ(sim.records().size(), 32u);
  for (const auto& r : sim.records()) {
    EXPECT_LE(r.el_residual, 1e-7) << "step " << r.step;
    EXPECT_LE(std::abs(r.momentum_residual - r.el_residual), 1e-9) << "step " << r.step;
    EXPECT_LE(std::abs(r.mass_drift_total), 1e-13);
    EXPECT_GT(r.rho_min, 0.0);
    EXPECT_GT(r.min_det_solid, 0.0);
    EXPECT_LE(r.flow_det_consistency, 1e-12);
    EXPECT_GE(r.flow_det_min, r.flow_env_lo);
    EXPECT_LE(r.flow_det_max, r.flow_env_hi);
  }
  std::vector<EnergyReport> e;
  for (const auto& r : sim.records()) e.push_back(r.energy);
  EXPECT_TRUE(check_energy_inequality(e).ok());
  // The initial state is out of balance, so the body does move.
  EXPECT_GT(max_deviation(sim.eta(), sim.scenario().solid.nodes), 1e-6);
}

TEST(Trajectory, PiecewiseInterpolants) {
  const Trajectory& tr = falling_run().trajectory();
  ASSERT_EQ(tr.snapshots.size(), 33u);
  for (std::size_t k : {0u, 5u, 16u, 31u}) {
    const double tk = tr.snapshots[k].time;
    EXPECT_NEAR(tk, k * tr.tau, 1e-15);
    const double t = tk + 0.25 * tr.tau;
    EXPECT_EQ(max_deviation(tr.eta_lower(t), tr.snapshots[k].eta), 0.0);
    EXPECT_EQ(max_deviation(tr.eta_bar(t), tr.snapshots[k + 1].eta), 0.0);
    const auto mid = tr.eta_tilde(t);
    for (std::size_t a = 0; a < mid.size(); ++a)
      EXPECT_NEAR((mid[a] - (0.75 * tr.snapshots[k].eta[a] + 0.25 * tr.snapshots[k + 1].eta[a])).norm(), 0.0, 1e-15);
    // At grid times the affine interpolant passes through the snapshot.
    EXPECT_LE(max_deviation(tr.eta_tilde(tk), tr.snapshots[k].eta), 1e-15);
  }
}

TEST(EnergyCheck, NegatedDissipationIsFlagged) {
  const Simulation& sim = falling_run();
  std::vector<EnergyReport> e;
  for (const auto& r : sim.records()) e.push_back(r.energy);
  ASSERT_TRUE(check_energy_inequality(e).ok());
  e[7].viscous = -std::abs(e[7].viscous) - 1e-3;
  const EnergyCheck c = check_energy_inequality(e);
  EXPECT_FALSE(c.ok());
  EXPECT_EQ(c.negative_dissipation, 1u);
}

TEST(EnergyCheck, InflatedEnergyIsAViolation) {
  const Simulation& sim = falling_run();
  std::vector<EnergyReport> e;
  for (const auto& r : sim.records()) e.push_back(r.energy);
  e[20].elastic += 1.0;  // energy created from nothing
  const EnergyCheck c = check_energy_inequality(e);
  EXPECT_GT(c.violations, 0u);
  EXPECT_EQ(c.first_violation, 20);
  EXPECT_LT(c.worst_margin, 0.0);
}

TEST(Checkpoint, ResumeIsBitExact) {
  const RunParams p = short_run(2);
  Simulation a(falling_disk(varimove::testing::small_grid(12)), p);
  for (int k = 0; k < 21; ++k) a.advance();  // stop mid-window
  std::stringstream ckpt;
  a.save_checkpoint(ckpt);
  while (!a.finished()) a.advance();

  Simulation b(falling_disk(varimove::testing::small_grid(12)), p);
  b.load_checkpoint(ckpt);
  EXPECT_EQ(b.step(), 21);
  EXPECT_EQ(b.substep(), 5);
  while (!b.finished()) b.advance();
  EXPECT_EQ(max_deviation(a.eta(), b.eta()), 0.0);
  EXPECT_EQ(max_deviation(a.fluid().nodes, b.fluid().nodes), 0.0);
  EXPECT_EQ(a.rho(), b.rho());
  EXPECT_EQ(a.records().back().energy.lhs(), b.records().back().energy.lhs());
}

TEST(Checkpoint, MismatchedStepSizeIsRejected) {
  RunParams p = short_run(1);
  Simulation a(falling_disk(varimove::testing::small_grid(12)), p);
  a.advance();
  std::stringstream ckpt;
  a.save_checkpoint(ckpt);
  p.step.tau = 1.0 / 400.0;
  Simulation b(falling_disk(varimove::testing::small_grid(12)), p);
  EXPECT_THROW(b.load_checkpoint(ckpt), Error);
}

TEST(Checkpoint, TruncatedFileIsRejected) {
  Simulation a(falling_disk(varimove::testing::small_grid(12)), short_run(1));
  a.advance();
  std::stringstream ckpt;
  a.save_checkpoint(ckpt);
  const std::string text = ckpt.str();
  std::stringstream cut(text.substr(0, text.size() / 2));
  Simulation b(falling_disk(varimove::testing::small_grid(12)), short_run(1));
  EXPECT_THROW(b.load_checkpoint(cut), Error);
}
