#include "varimove/driver.hpp"

#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "varimove/errors.hpp"
#include "varimove/output.hpp"

namespace varimove {

RunOutcome run_simulation(const SchemeParams& params, long max_steps,
                          const std::optional<std::filesystem::path>& resume) {
  RunOutcome out;
  out.simulation = std::make_unique<Simulation>(build_scenario(params), params.run);
  Simulation& sim = *out.simulation;
  sim.keep_history(false);
  if (resume) {
    std::ifstream in(*resume);
    if (!in) throw Error(ErrorKind::Io, "cannot open checkpoint " + resume->string());
    sim.load_checkpoint(in);
    spdlog::info("resumed from {} at step {}", resume->string(), sim.step());
  }

  OutputWriter writer(params.io.output_dir, params.io.vtk_stride, params.io.checkpoint_stride,
                      resume ? sim.step() : -1);
  std::ostringstream ini;
  write_config(ini, params);
  writer.write_config(ini.str());
  if (!resume && params.io.vtk_stride > 0) writer.write_frame(sim);

  long done = 0;
  out.status = "completed";
  try {
    while (!sim.finished()) {
      if (max_steps >= 0 && done >= max_steps) {
        out.status = "step limit";
        break;
      }
      sim.advance();
      ++done;
      writer.on_step(sim);
    }
  } catch (const Error& e) {
    writer.on_step(sim);
    if (e.kind() == ErrorKind::CollisionDetected) {
      out.status = "contact: " + std::string(e.what());
    } else {
      out.status = "failed: " + std::string(e.what());
      out.error = true;
    }
    spdlog::error("{}", e.what());
  }
  // Always leave a checkpoint of the last accepted state for resuming.
  writer.write_checkpoint(sim);
  writer.write_summary(run_summary(sim, out.status));
  return out;
}

}  // namespace varimove
