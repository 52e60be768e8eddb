#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "varimove/config.hpp"
#include "varimove/timestepper.hpp"

namespace varimove {

struct RunOutcome {
  std::unique_ptr<Simulation> simulation;
  std::string status;       // "completed", "step limit", "contact" or the error text
  bool error = false;       // true when a step failed (contact is not an error)
};

/// Runs from the initial data or a checkpoint until the final time, the step
/// limit (max_steps counts steps of this invocation, negative means none) or a
/// failure. Ledger, windows, frames, checkpoints and the summary are written to
/// the configured output directory; output up to the failing step is kept.
RunOutcome run_simulation(const SchemeParams& params, long max_steps = -1,
                          const std::optional<std::filesystem::path>& resume = std::nullopt);

}  // namespace varimove
