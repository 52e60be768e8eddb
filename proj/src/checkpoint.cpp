#include <istream>
#include <ostream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "varimove/errors.hpp"
#include "varimove/timestepper.hpp"

// Checkpoint text format, one token stream, all reals with 17 significant digits:
//
//   varimove-checkpoint 1
//   params <tau> <h> <substeps>
//   counters <step> <window> <substep>
//   scalars <mass0> <mass_prev> <rho0_min> <rho0_max> <integrated_div> <flow_integral>
//   vec2 eta <n>        followed by n lines "x y"
//   vec2 fluid_nodes <n>
//   real rho <n>        followed by n lines
//   vec2 velocity <n>
//   real lumped0 <n>
//   ledger <step>, then vec2 origin, vec2 front, real running_det
//   frames history <m>, then m frames of (vec2 zeta, real rho, real lumped, vec2 v)
//   frames next_history <m>
//   end

namespace varimove {

namespace {

void put_real(std::ostream& out, const std::string& name, const std::vector<double>& v) {
  out << "real " << name << " " << v.size() << "\n";
  for (double x : v) out << fmt::format("{:.17g}\n", x);
}

void put_vec2(std::ostream& out, const std::string& name, const std::vector<Vec2>& v) {
  out << "vec2 " << name << " " << v.size() << "\n";
  for (const auto& x : v) out << fmt::format("{:.17g} {:.17g}\n", x.x(), x.y());
}

void put_frames(std::ostream& out, const std::string& name, const std::vector<HistoryFrame>& frames) {
  out << "frames " << name << " " << frames.size() << "\n";
  for (const auto& f : frames) {
    put_vec2(out, "zeta", f.zeta);
    put_real(out, "rho", f.rho);
    put_real(out, "lumped", f.lumped);
    put_vec2(out, "v", f.v);
  }
}

class Tokens {
 public:
  explicit Tokens(std::istream& in) : in_(in) {}

  void expect(const std::string& word) {
    std::string w;
    if (!(in_ >> w) || w != word) fail("expected '" + word + "', found '" + w + "'");
  }
  template <class T>
  T read() {
    T x{};
    if (!(in_ >> x)) fail("truncated or malformed value");
    return x;
  }
  std::vector<double> real(const std::string& name, std::size_t n) {
    expect("real");
    expect(name);
    check_size(name, n);
    std::vector<double> v(n);
    for (auto& x : v) x = read<double>();
    return v;
  }
  std::vector<Vec2> vec2(const std::string& name, std::size_t n) {
    expect("vec2");
    expect(name);
    check_size(name, n);
    std::vector<Vec2> v(n);
    for (auto& x : v) {
      x.x() = read<double>();
      x.y() = read<double>();
    }
    return v;
  }
  std::vector<HistoryFrame> frames(const std::string& name, std::size_t ns, std::size_t nf) {
    expect("frames");
    expect(name);
    const auto m = read<std::size_t>();
    std::vector<HistoryFrame> out(m);
    for (auto& f : out) {
      f.zeta = vec2("zeta", ns);
      f.rho = real("rho", nf);
      f.lumped = real("lumped", nf);
      f.v = vec2("v", nf);
    }
    return out;
  }
  [[noreturn]] void fail(const std::string& what) { throw Error(ErrorKind::Io, "checkpoint: " + what); }

 private:
  void check_size(const std::string& name, std::size_t n) {
    const auto got = read<std::size_t>();
    if (got != n) fail(fmt::format("{} has {} entries, the scenario needs {}", name, got, n));
  }
  std::istream& in_;
};

}  // namespace

void Simulation::save_checkpoint(std::ostream& out) const {
  out << "varimove-checkpoint 1\n";
  out << fmt::format("params {:.17g} {:.17g} {}\n", params_.step.tau, params_.step.h, params_.substeps());
  out << fmt::format("counters {} {} {}\n", step_, window_, substep_);
  out << fmt::format("scalars {:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g}\n", mass0_, mass_prev_, rho0_min_,
                     rho0_max_, integrated_div_, flow_integral_);
  put_vec2(out, "eta", eta_);
  put_vec2(out, "fluid_nodes", fluid_.nodes);
  put_real(out, "rho", rho_);
  put_vec2(out, "velocity", last_v_);
  put_real(out, "lumped0", lumped0_);
  out << "ledger " << ledger_.step() << "\n";
  put_vec2(out, "origin", ledger_.origin());
  put_vec2(out, "front", ledger_.front());
  put_real(out, "running_det", ledger_.running_det());
  put_frames(out, "history", history_);
  put_frames(out, "next_history", next_history_);
  out << "end\n";
  if (!out) throw Error(ErrorKind::Io, "checkpoint write failed");
}

void Simulation::load_checkpoint(std::istream& in) {
  Tokens t(in);
  t.expect("varimove-checkpoint");
  if (t.read<int>() != 1) t.fail("unsupported version");
  t.expect("params");
  const double tau = t.read<double>(), h = t.read<double>();
  const int substeps = t.read<int>();
  if (tau != params_.step.tau || h != params_.step.h || substeps != params_.substeps())
    t.fail(fmt::format("time steps (tau = {}, h = {}) differ from the configuration", tau, h));
  t.expect("counters");
  const long step = t.read<long>();
  const int window = t.read<int>();
  const int substep = t.read<int>();
  t.expect("scalars");
  const double mass0 = t.read<double>(), mass_prev = t.read<double>();
  const double rho0_min = t.read<double>(), rho0_max = t.read<double>();
  const double integrated_div = t.read<double>(), flow_integral = t.read<double>();

  const std::size_t ns = scenario_.solid.num_nodes(), nf = scenario_.fluid.num_nodes();
  const std::size_t ne = scenario_.fluid.triangles.size();
  auto eta = t.vec2("eta", ns);
  auto nodes = t.vec2("fluid_nodes", nf);
  auto rho = t.real("rho", nf);
  auto velocity = t.vec2("velocity", nf);
  std::vector<double> lumped0;
  {
    // lumped0 is empty before the first window opens.
    t.expect("real");
    t.expect("lumped0");
    const auto n = t.read<std::size_t>();
    if (n != 0 && n != nf) t.fail("lumped0 has the wrong size");
    lumped0.resize(n);
    for (auto& x : lumped0) x = t.read<double>();
  }
  t.expect("ledger");
  const int ledger_step = t.read<int>();
  auto origin = t.vec2("origin", nf);
  auto front = t.vec2("front", nf);
  auto running = t.real("running_det", ne);
  auto history = t.frames("history", ns, nf);
  auto next_history = t.frames("next_history", ns, nf);
  t.expect("end");
  if (history.size() != static_cast<std::size_t>(substeps) ||
      next_history.size() != static_cast<std::size_t>(substep))
    t.fail("window history does not match the substep counters");

  step_ = step;
  window_ = window;
  substep_ = substep;
  mass0_ = mass0;
  mass_prev_ = mass_prev;
  rho0_min_ = rho0_min;
  rho0_max_ = rho0_max;
  integrated_div_ = integrated_div;
  flow_integral_ = flow_integral;
  eta_ = std::move(eta);
  fluid_.nodes = std::move(nodes);
  rho_ = std::move(rho);
  last_v_ = std::move(velocity);
  lumped0_ = std::move(lumped0);
  ledger_.restore(std::move(origin), std::move(front), std::move(running), ledger_step);
  history_ = std::move(history);
  next_history_ = std::move(next_history);
  if (substep_ > 0) compute_handoff();
  records_.clear();
  windows_.clear();
  termination_.reset();
  trajectory_.snapshots.clear();
  trajectory_.snapshots.push_back({time(), eta_, fluid_.nodes, rho_, {}});
}

}  // namespace varimove
