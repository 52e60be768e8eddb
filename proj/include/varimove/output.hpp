#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "varimove/timestepper.hpp"

namespace varimove {

/// Column names of the per-step ledger, in file order.
const std::vector<std::string>& ledger_columns();

void write_ledger_header(std::ostream& out);
void write_ledger_row(std::ostream& out, const StepRecord& r);
/// Parses a ledger written by the functions above. Throws Io on schema mismatch.
std::vector<StepRecord> read_ledger(std::istream& in);
std::vector<StepRecord> read_ledger(const std::filesystem::path& path);

void write_windows_header(std::ostream& out);
void write_windows_row(std::ostream& out, const WindowRecord& w);
std::vector<WindowRecord> read_windows(const std::filesystem::path& path);

/// Legacy ASCII VTK: fluid mesh with point data v and rho and cell data detPhi.
void write_fluid_vtk(std::ostream& out, const FluidMesh& mesh, const std::vector<Vec2>& v,
                     const std::vector<double>& rho, const std::vector<double>& det_phi);
/// Deformed solid with point data displacement and cell data det grad eta.
void write_solid_vtk(std::ostream& out, const ReferenceSolidMesh& solid, const std::vector<Vec2>& eta);

/// Opens the output directory and streams ledger rows, VTK frames and checkpoints.
class OutputWriter {
 public:
  /// A nonnegative `resume_step` keeps existing ledger and window rows that
  /// precede it and drops the rest; a negative value starts fresh files.
  OutputWriter(std::filesystem::path dir, int vtk_stride, int checkpoint_stride, long resume_step = -1);

  void write_config(const std::string& ini);
  /// Call after each accepted step.
  void on_step(const Simulation& sim);
  void write_frame(const Simulation& sim);
  void write_checkpoint(const Simulation& sim);
  void write_summary(const std::string& text);
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  int vtk_stride_, checkpoint_stride_;
  std::size_t windows_written_ = 0;
  std::size_t records_written_ = 0;
};

/// Human-readable end-of-run block.
std::string run_summary(const Simulation& sim, const std::string& status);

}  // namespace varimove
