#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "varimove/config.hpp"
#include "varimove/driver.hpp"
#include "varimove/errors.hpp"
#include "varimove/invariants.hpp"
#include "varimove/log.hpp"
#include "varimove/output.hpp"

namespace fs = std::filesystem;
using namespace varimove;

namespace {

int report_run(const RunOutcome& r, const SchemeParams& p) {
  std::cout << run_summary(*r.simulation, r.status);
  std::cout << "output: " << fs::absolute(p.io.output_dir).string() << "\n";
  return r.error ? 2 : 0;
}

int cmd_run(const std::string& config, long steps, const std::string& resume) {
  SchemeParams p = load_config(config);
  std::optional<fs::path> ckpt;
  if (!resume.empty()) ckpt = resume;
  return report_run(run_simulation(p, steps, ckpt), p);
}

int cmd_check(const fs::path& dir) {
  const SchemeParams p = load_config(dir / "config.ini");
  const Scenario s = build_scenario(p);
  const auto records = read_ledger(dir / "ledger.csv");
  const auto windows = read_windows(dir / "windows.csv");
  const auto limits = invariant_limits(p.run, s);
  bool ok = true;
  std::cout << fmt::format("{} steps, {} windows in {}\n", records.size(), windows.size(), dir.string());
  for (const auto& r : check_invariants(records, windows, limits)) {
    ok = ok && r.passed;
    std::cout << fmt::format("{}  {:<28} worst {:.6e}  limit {:.6e}\n", r.passed ? "PASS" : "FAIL", r.name, r.worst,
                             r.limit);
  }
  return ok ? 0 : 1;
}

int cmd_demo(const std::string& name, long steps, const std::string& output) {
  SchemeParams p;
  p.scenario.name = name;
  if (name == "rest") p.scenario.force = "none";
  p.io.output_dir = output.empty() ? fs::path("out") / name : fs::path(output);
  const auto problems = validate(p);
  if (!problems.empty()) throw Error(ErrorKind::ConfigInvalid, problems.front());
  return report_run(run_simulation(p, steps), p);
}

int cmd_mesh_info(const std::string& config, const std::string& scenario, int grid, const std::string& write_dir) {
  SchemeParams p;
  if (!config.empty()) p = load_config(config);
  if (!scenario.empty()) p.scenario.name = scenario;
  if (grid > 0) p.scenario.grid.n = grid;
  const Scenario s = build_scenario(p);
  std::size_t tags[3] = {0, 0, 0};
  for (const auto& b : s.solid.boundary) ++tags[b.tag == BoundaryTag::M ? 0 : b.tag == BoundaryTag::P ? 1 : 2];
  std::size_t interface = 0, wall = 0;
  for (std::size_t i = 0; i < s.fluid.num_nodes(); ++i) {
    interface += s.fluid.is_interface(static_cast<int>(i));
    wall += s.fluid.on_outer_boundary[i] != 0;
  }
  std::size_t dirichlet = 0;
  for (char c : s.solid.is_dirichlet) dirichlet += c != 0;
  const double deg = 180.0 / std::numbers::pi;
  double solid_angle = 1e9;
  for (const auto& t : s.solid.elements)
    solid_angle = std::min(solid_angle, triangle_min_angle(s.solid.nodes[t[0]], s.solid.nodes[t[1]], s.solid.nodes[t[2]]));
  std::cout << fmt::format("scenario: {}\n", s.name);
  std::cout << fmt::format("solid: {} nodes, {} elements, area {:.6g}, max edge {:.6g}, min angle {:.3g} deg\n",
                           s.solid.num_nodes(), s.solid.elements.size(), s.solid.area(),
                           max_edge_length(s.solid.nodes, s.solid.elements), solid_angle * deg);
  std::cout << fmt::format("solid boundary: {} M edges, {} P edges, {} clamped nodes\n", tags[0], tags[1], dirichlet);
  std::cout << fmt::format("fluid: {} nodes ({} interface, {} wall), {} triangles, max edge {:.6g}, min angle {:.3g} deg\n",
                           s.fluid.num_nodes(), interface, wall, s.fluid.triangles.size(),
                           max_edge_length(s.fluid.nodes, s.fluid.triangles), s.fluid.min_angle() * deg);
  std::cout << fmt::format("container area {:.6g}\n", s.container.area());
  if (!write_dir.empty()) {
    fs::create_directories(write_dir);
    std::ofstream fs_(fs::path(write_dir) / "solid.mesh"), ff(fs::path(write_dir) / "fluid.mesh");
    write_text_mesh(fs_, to_text(s.solid));
    write_text_mesh(ff, to_text(s.fluid, s.solid));
    std::cout << "wrote " << (fs::path(write_dir) / "solid.mesh").string() << " and fluid.mesh\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"Fluid-structure simulator: compressible barotropic gas around a visco-elastic solid"};
  app.require_subcommand(1);

  std::string config, resume;
  long steps = -1;
  auto* run = app.add_subcommand("run", "run a configured simulation");
  run->add_option("--config", config, "INI configuration file")->required()->check(CLI::ExistingFile);
  run->add_option("--steps", steps, "maximum number of tau-steps in this invocation");
  run->add_option("--resume", resume, "checkpoint to resume from")->check(CLI::ExistingFile);

  std::string dir;
  auto* check = app.add_subcommand("check", "run the invariant suite on a saved trajectory directory");
  check->add_option("trajectory-dir", dir, "output directory of a run")->required()->check(CLI::ExistingDirectory);

  std::string demo_name, demo_out;
  long demo_steps = -1;
  auto* demo = app.add_subcommand("demo", "run a shipped scenario with default parameters");
  demo->add_option("name", demo_name, "falling-disk or rest")->required()->check(CLI::IsMember(scenario_names()));
  demo->add_option("--steps", demo_steps, "maximum number of tau-steps");
  demo->add_option("--output", demo_out, "output directory (default out/<name>)");

  std::string mi_config, mi_scenario, mi_write;
  int mi_grid = 0;
  auto* mesh_info = app.add_subcommand("mesh-info", "print mesh statistics, optionally export text meshes");
  mesh_info->add_option("--config", mi_config, "take the scenario from a config file")->check(CLI::ExistingFile);
  mesh_info->add_option("--scenario", mi_scenario, "built-in scenario name");
  mesh_info->add_option("--grid", mi_grid, "cells per side for built-in scenarios");
  mesh_info->add_option("--write", mi_write, "directory for solid.mesh and fluid.mesh");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, steps, resume);
    if (*check) return cmd_check(dir);
    if (*demo) return cmd_demo(demo_name, demo_steps, demo_out);
    if (*mesh_info) return cmd_mesh_info(mi_config, mi_scenario, mi_grid, mi_write);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::ConfigInvalid ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
