#pragma once

#include <span>
#include <string>
#include <vector>

#include "varimove/timestepper.hpp"

namespace varimove {

struct InvariantLimits {
  double energy_slack = 1e-10;
  double el_tol = 1e-7;          // 10 grad_tol
  double mass_step = 1e-8;
  double mass_total = 1e-6;
  double minmax_slack = 0.0;     // allowed excess of the min/max slack factor over 1
  double cn_tol = 0.0;           // absolute Ciarlet-Necas defect bound
  double handoff_tol = 1e-6;
  double flow_consistency = 1e-10;
};

/// Limits for a run: 10 grad_tol, 5(tau + mesh size), cn_tol * area(Q).
InvariantLimits invariant_limits(const RunParams& params, const Scenario& scenario);

struct InvariantResult {
  std::string name;
  bool passed = true;
  double worst = 0.0;
  double limit = 0.0;
};

std::vector<InvariantResult> check_invariants(std::span<const StepRecord> records,
                                              std::span<const WindowRecord> windows, const InvariantLimits& limits);

}  // namespace varimove
