#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "varimove/scenarios.hpp"
#include "varimove/timestepper.hpp"

namespace varimove {

struct ScenarioSpec {
  std::string name = "falling-disk";  // built-in scenario, ignored when mesh files are given
  GridSpec grid;
  std::filesystem::path solid_mesh;   // optional text meshes
  std::filesystem::path fluid_mesh;
  std::vector<Vec2> container = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
  double rho0 = 1.0;                  // uniform initial density for mesh-file runs
  std::string force = "gravity";      // none | gravity | ramped-gravity | constant
  double g = 1.0;
  double ramp_time = 0.0;
  Vec2 force_vector = Vec2::Zero();   // acceleration for the constant preset
};

struct IoParams {
  std::filesystem::path output_dir = "out";
  int vtk_stride = 16;        // 0 disables VTK frames
  int checkpoint_stride = 0;  // 0 disables periodic checkpoints
};

/// Everything a run needs, as read from the INI config.
struct SchemeParams {
  RunParams run;
  ScenarioSpec scenario;
  IoParams io;
};

/// Parses sections [scheme] [solid] [fluid] [io]. Unknown keys, malformed
/// values and every violated parameter constraint are collected into a single
/// ConfigInvalid error.
SchemeParams parse_config(std::istream& in);
SchemeParams load_config(const std::filesystem::path& path);

/// Empty when the parameters are admissible.
std::vector<std::string> validate(const SchemeParams& p);

/// Writes a config that parses back to the same parameters.
void write_config(std::ostream& out, const SchemeParams& p);

/// Builds meshes and initial data, applying the force preset.
Scenario build_scenario(const SchemeParams& p);

}  // namespace varimove
