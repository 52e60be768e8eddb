#include "varimove/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "varimove/errors.hpp"
#include "varimove/invariants.hpp"

namespace varimove {

namespace {

struct Column {
  std::string name;
  std::function<std::string(const StepRecord&)> write;
  std::function<void(StepRecord&, double)> read;  // empty for derived columns
};

std::string num(double x) { return fmt::format("{:.17g}", x); }

template <class T>
Column integral(std::string name, T StepRecord::*m) {
  return {std::move(name), [m](const StepRecord& r) { return std::to_string(r.*m); },
          [m](StepRecord& r, double v) { r.*m = static_cast<T>(v); }};
}
Column real(std::string name, double StepRecord::*m) {
  return {std::move(name), [m](const StepRecord& r) { return num(r.*m); }, [m](StepRecord& r, double v) { r.*m = v; }};
}
Column energy(std::string name, double EnergyReport::*m) {
  return {std::move(name), [m](const StepRecord& r) { return num(r.energy.*m); },
          [m](StepRecord& r, double v) { r.energy.*m = v; }};
}
Column derived(std::string name, std::function<double(const StepRecord&)> f) {
  return {std::move(name), [f](const StepRecord& r) { return num(f(r)); }, {}};
}

const std::vector<Column>& columns() {
  static const std::vector<Column> cols = {
      integral("step", &StepRecord::step),
      integral("window", &StepRecord::window),
      integral("substep", &StepRecord::substep),
      real("time", &StepRecord::time),
      real("objective", &StepRecord::objective),
      real("objective_start", &StepRecord::objective_start),
      real("grad_norm", &StepRecord::grad_norm),
      integral("iterations", &StepRecord::iterations),
      integral("backtracks", &StepRecord::backtracks),
      real("el_residual", &StepRecord::el_residual),
      real("momentum_residual", &StepRecord::momentum_residual),
      energy("elastic_old", &EnergyReport::elastic_old),
      energy("potential_old", &EnergyReport::potential_old),
      energy("elastic", &EnergyReport::elastic),
      energy("potential", &EnergyReport::potential),
      energy("kinetic_solid", &EnergyReport::kinetic_solid),
      energy("kinetic_fluid", &EnergyReport::kinetic_fluid),
      energy("dissipation_solid", &EnergyReport::dissipation_solid),
      energy("viscous", &EnergyReport::viscous),
      energy("kappa_fluid", &EnergyReport::kappa_fluid),
      energy("eps_dissipation", &EnergyReport::eps_dissipation),
      energy("inertial_solid", &EnergyReport::inertial_solid),
      energy("inertial_fluid", &EnergyReport::inertial_fluid),
      energy("supply_solid", &EnergyReport::supply_solid),
      energy("supply_fluid", &EnergyReport::supply_fluid),
      energy("work_solid", &EnergyReport::work_solid),
      energy("work_fluid", &EnergyReport::work_fluid),
      derived("lhs", [](const StepRecord& r) { return r.energy.lhs(); }),
      derived("rhs", [](const StepRecord& r) { return r.energy.rhs(); }),
      real("mass", &StepRecord::mass),
      real("mass_drift_step", &StepRecord::mass_drift_step),
      real("mass_drift_total", &StepRecord::mass_drift_total),
      real("rho_min", &StepRecord::rho_min),
      real("rho_max", &StepRecord::rho_max),
      real("div_sup", &StepRecord::div_sup),
      real("minmax_lower", &StepRecord::minmax_lower),
      real("minmax_upper", &StepRecord::minmax_upper),
      real("minmax_slack", &StepRecord::minmax_slack),
      real("renormalization", &StepRecord::renormalization),
      real("min_det_solid", &StepRecord::min_det_solid),
      real("cn_defect", &StepRecord::cn_defect),
      real("collision_distance", &StepRecord::collision_distance),
      real("fluid_min_angle", &StepRecord::fluid_min_angle),
      real("flow_det_min", &StepRecord::flow_det_min),
      real("flow_det_max", &StepRecord::flow_det_max),
      real("flow_env_lo", &StepRecord::flow_env_lo),
      real("flow_env_hi", &StepRecord::flow_env_hi),
      real("flow_det_consistency", &StepRecord::flow_det_consistency),
      real("flow_ode_residual", &StepRecord::flow_ode_residual),
  };
  return cols;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_number(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw Error(ErrorKind::Io, "malformed number '" + s + "' in ledger");
  return v;
}

std::ofstream open_out(const std::filesystem::path& p, std::ios::openmode mode = std::ios::out) {
  std::ofstream f(p, mode);
  if (!f) throw Error(ErrorKind::Io, "cannot write " + p.string());
  return f;
}

}  // namespace

const std::vector<std::string>& ledger_columns() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& c : columns()) n.push_back(c.name);
    return n;
  }();
  return names;
}

void write_ledger_header(std::ostream& out) {
  const auto& n = ledger_columns();
  for (std::size_t i = 0; i < n.size(); ++i) out << (i ? "," : "") << n[i];
  out << "\n";
}

void write_ledger_row(std::ostream& out, const StepRecord& r) {
  const auto& cols = columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i].write(r);
  out << "\n";
}

std::vector<StepRecord> read_ledger(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Io, "ledger is empty");
  if (split_csv(line) != ledger_columns()) throw Error(ErrorKind::Io, "ledger header does not match the schema");
  const auto& cols = columns();
  std::vector<StepRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != cols.size())
      throw Error(ErrorKind::Io, fmt::format("ledger row {} has {} cells, expected {}", out.size() + 1, cells.size(),
                                             cols.size()));
    StepRecord r;
    for (std::size_t i = 0; i < cols.size(); ++i)
      if (cols[i].read) cols[i].read(r, parse_number(cells[i]));
    out.push_back(r);
  }
  return out;
}

std::vector<StepRecord> read_ledger(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return read_ledger(in);
}

void write_windows_header(std::ostream& out) { out << "window,first_step,w_norm2,rho_v_norm2,max_rel_error\n"; }

void write_windows_row(std::ostream& out, const WindowRecord& w) {
  out << w.window << "," << w.first_step << "," << num(w.w_norm2) << "," << num(w.rho_v_norm2) << ","
      << num(w.max_rel_error) << "\n";
}

std::vector<WindowRecord> read_windows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<WindowRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split_csv(line);
    if (c.size() != 5) throw Error(ErrorKind::Io, "malformed windows row: " + line);
    out.push_back({static_cast<int>(parse_number(c[0])), static_cast<long>(parse_number(c[1])), parse_number(c[2]),
                   parse_number(c[3]), parse_number(c[4])});
  }
  return out;
}

void write_fluid_vtk(std::ostream& out, const FluidMesh& mesh, const std::vector<Vec2>& v,
                     const std::vector<double>& rho, const std::vector<double>& det_phi) {
  const std::size_t n = mesh.num_nodes(), ne = mesh.triangles.size();
  out << "# vtk DataFile Version 3.0\nfluid\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << n << " double\n";
  for (const auto& p : mesh.nodes) out << num(p.x()) << " " << num(p.y()) << " 0\n";
  out << "CELLS " << ne << " " << 4 * ne << "\n";
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "CELL_TYPES " << ne << "\n";
  for (std::size_t e = 0; e < ne; ++e) out << "5\n";
  out << "POINT_DATA " << n << "\nVECTORS v double\n";
  for (const auto& x : v) out << num(x.x()) << " " << num(x.y()) << " 0\n";
  out << "SCALARS rho double 1\nLOOKUP_TABLE default\n";
  for (double r : rho) out << num(r) << "\n";
  out << "CELL_DATA " << ne << "\nSCALARS detPhi double 1\nLOOKUP_TABLE default\n";
  for (double d : det_phi) out << num(d) << "\n";
}

void write_solid_vtk(std::ostream& out, const ReferenceSolidMesh& solid, const std::vector<Vec2>& eta) {
  const std::size_t n = solid.num_nodes(), ne = solid.elements.size();
  out << "# vtk DataFile Version 3.0\nsolid\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << n << " double\n";
  for (const auto& p : eta) out << num(p.x()) << " " << num(p.y()) << " 0\n";
  out << "CELLS " << ne << " " << 4 * ne << "\n";
  for (const auto& t : solid.elements) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "CELL_TYPES " << ne << "\n";
  for (std::size_t e = 0; e < ne; ++e) out << "5\n";
  out << "POINT_DATA " << n << "\nVECTORS displacement double\n";
  for (std::size_t a = 0; a < n; ++a) {
    const Vec2 d = eta[a] - solid.nodes[a];
    out << num(d.x()) << " " << num(d.y()) << " 0\n";
  }
  out << "CELL_DATA " << ne << "\nSCALARS detF double 1\nLOOKUP_TABLE default\n";
  for (const auto& t : solid.elements)
    out << num(signed_area(eta[t[0]], eta[t[1]], eta[t[2]]) /
               signed_area(solid.nodes[t[0]], solid.nodes[t[1]], solid.nodes[t[2]]))
        << "\n";
}

OutputWriter::OutputWriter(std::filesystem::path dir, int vtk_stride, int checkpoint_stride, long resume_step)
    : dir_(std::move(dir)), vtk_stride_(vtk_stride), checkpoint_stride_(checkpoint_stride) {
  std::filesystem::create_directories(dir_);
  if (vtk_stride_ > 0) std::filesystem::create_directories(dir_ / "vtk");
  if (checkpoint_stride_ > 0) std::filesystem::create_directories(dir_ / "checkpoints");
  const auto ledger = dir_ / "ledger.csv";
  const auto windows = dir_ / "windows.csv";
  std::vector<StepRecord> kept_rows;
  std::vector<WindowRecord> kept_windows;
  if (resume_step >= 0 && std::filesystem::exists(ledger)) {
    for (const auto& r : read_ledger(ledger))
      if (r.step < resume_step) kept_rows.push_back(r);
  }
  if (resume_step >= 0 && std::filesystem::exists(windows)) {
    for (const auto& w : read_windows(windows))
      if (w.first_step < resume_step) kept_windows.push_back(w);
  }
  {
    auto f = open_out(ledger);
    write_ledger_header(f);
    for (const auto& r : kept_rows) write_ledger_row(f, r);
  }
  auto f = open_out(windows);
  write_windows_header(f);
  for (const auto& w : kept_windows) write_windows_row(f, w);
}

void OutputWriter::write_config(const std::string& ini) {
  auto f = open_out(dir_ / "config.ini");
  f << ini;
}

void OutputWriter::on_step(const Simulation& sim) {
  {
    auto f = open_out(dir_ / "windows.csv", std::ios::app);
    for (; windows_written_ < sim.windows().size(); ++windows_written_)
      write_windows_row(f, sim.windows()[windows_written_]);
  }
  {
    auto f = open_out(dir_ / "ledger.csv", std::ios::app);
    for (; records_written_ < sim.records().size(); ++records_written_)
      write_ledger_row(f, sim.records()[records_written_]);
  }
  if (vtk_stride_ > 0 && sim.step() % vtk_stride_ == 0) write_frame(sim);
  if (checkpoint_stride_ > 0 && sim.step() % checkpoint_stride_ == 0) write_checkpoint(sim);
}

void OutputWriter::write_frame(const Simulation& sim) {
  const long frame = vtk_stride_ > 0 ? sim.step() / vtk_stride_ : sim.step();
  {
    auto f = open_out(dir_ / "vtk" / fmt::format("fluid_{:06d}.vtk", frame));
    write_fluid_vtk(f, sim.fluid(), sim.velocity(), sim.rho(), sim.flow_map().running_det());
  }
  auto f = open_out(dir_ / "vtk" / fmt::format("solid_{:06d}.vtk", frame));
  write_solid_vtk(f, sim.scenario().solid, sim.eta());
}

void OutputWriter::write_checkpoint(const Simulation& sim) {
  std::filesystem::create_directories(dir_ / "checkpoints");
  auto f = open_out(dir_ / "checkpoints" / fmt::format("ckpt_{:08d}.txt", sim.step()));
  sim.save_checkpoint(f);
}

void OutputWriter::write_summary(const std::string& text) {
  auto f = open_out(dir_ / "summary.txt");
  f << text;
}

std::string run_summary(const Simulation& sim, const std::string& status) {
  std::string s;
  s += fmt::format("status: {}\n", status);
  s += fmt::format("scenario: {}\n", sim.scenario().name);
  s += fmt::format("steps: {}\nwindows: {}\ntime: {:.17g}\n", sim.step(), sim.window() + (sim.substep() ? 1 : 0),
                   sim.time());
  s += fmt::format("tau: {:.17g}\nh: {:.17g}\n", sim.params().step.tau, sim.params().step.h);
  s += fmt::format("initial mass: {:.17g}\n", sim.initial_mass());
  if (!sim.records().empty()) s += fmt::format("final mass: {:.17g}\n", sim.records().back().mass);
  s += "invariants (steps run in this invocation):\n";
  const auto limits = invariant_limits(sim.params(), sim.scenario());
  for (const auto& r : check_invariants(sim.records(), sim.windows(), limits))
    s += fmt::format("  {:<28} {}  worst {:.6e}  limit {:.6e}\n", r.name, r.passed ? "ok  " : "FAIL", r.worst, r.limit);
  return s;
}

}  // namespace varimove
