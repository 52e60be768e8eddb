#include "varimove/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "varimove/errors.hpp"

namespace varimove {

namespace pt = boost::property_tree;

namespace {

constexpr int kDim = 2;

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  template <class T>
  void get(const std::string& section, const std::string& key, T& out) {
    const std::string path = section + "." + key;
    used_.insert(path);
    auto node = tree_.get_child_optional(pt::ptree::path_type(path, '.'));
    if (!node) return;
    try {
      out = node->get_value<T>();
    } catch (const pt::ptree_error&) {
      errors_.push_back(fmt::format("[{}] {} = '{}' is not a valid value", section, key, node->data()));
    }
  }

  void get_points(const std::string& section, const std::string& key, std::vector<Vec2>& out) {
    std::string text;
    get(section, key, text);
    if (text.empty()) return;
    std::istringstream in(text);
    std::vector<double> v;
    double x;
    while (in >> x) v.push_back(x);
    if (!in.eof() || v.size() < 6 || v.size() % 2) {
      errors_.push_back(fmt::format("[{}] {} needs at least three 'x y' pairs", section, key));
      return;
    }
    out.clear();
    for (std::size_t i = 0; i < v.size(); i += 2) out.emplace_back(v[i], v[i + 1]);
  }

  void check_unknown() {
    for (const auto& [section, body] : tree_) {
      if (body.empty() && !body.data().empty()) {
        errors_.push_back(fmt::format("key '{}' outside of a section", section));
        continue;
      }
      for (const auto& [key, value] : body)
        if (!used_.count(section + "." + key)) errors_.push_back(fmt::format("unknown key [{}] {}", section, key));
    }
  }

  std::vector<std::string>& errors() { return errors_; }

 private:
  const pt::ptree& tree_;
  std::set<std::string> used_;
  std::vector<std::string> errors_;
};

}  // namespace

std::vector<std::string> validate(const SchemeParams& p) {
  std::vector<std::string> v;
  const auto& e = p.run.elastic;
  const auto& f = p.run.step.fluid;
  const auto& s = p.run.step;
  const double gamma_min = 2.0 * kDim * (kDim - 1) / (3.0 * kDim - 2.0);
  if (!(f.gamma > gamma_min))
    v.push_back(fmt::format("gamma = {} violates the pressure growth condition gamma > 2n(n-1)/(3n-2) = {}", f.gamma,
                            gamma_min));
  if (!(f.beta > std::max(4.0, f.gamma)))
    v.push_back(fmt::format("beta = {} violates beta > max(4, gamma) = {}", f.beta, std::max(4.0, f.gamma)));
  if (!(e.q > kDim)) v.push_back(fmt::format("q = {} violates q > n = {}", e.q, kDim));
  if (e.q > kDim) {
    const double a_min = kDim * e.q / (e.q - kDim);
    if (!(e.a > a_min)) v.push_back(fmt::format("a = {} violates a > nq/(q-n) = {}", e.a, a_min));
  }
  if (!(f.mu > 0.0)) v.push_back(fmt::format("mu = {} must be positive", f.mu));
  if (!(f.lambda > 0.0)) v.push_back(fmt::format("lambda = {} must be positive", f.lambda));
  if (!(f.rho_s > 0.0)) v.push_back(fmt::format("rho_s = {} must be positive", f.rho_s));
  if (!(e.mu_s > 0.0)) v.push_back(fmt::format("mu_s = {} must be positive", e.mu_s));
  if (!(e.lambda_s > 0.0)) v.push_back(fmt::format("lambda_s = {} must be positive", e.lambda_s));
  if (!(e.kappa > 0.0)) v.push_back(fmt::format("kappa = {} must be positive", e.kappa));
  if (!(f.delta > 0.0)) v.push_back(fmt::format("delta = {} must be positive", f.delta));
  if (!(f.epsilon > 0.0)) v.push_back(fmt::format("epsilon = {} must be positive", f.epsilon));
  if (!(f.a_p > 0.0)) v.push_back(fmt::format("a_p = {} must be positive", f.a_p));
  if (!(s.tau > 0.0) || !(s.h > 0.0)) {
    v.push_back("tau and h must be positive");
  } else {
    const double ratio = s.h / s.tau;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1.0)
      v.push_back(fmt::format("h / tau = {} must be a positive integer", ratio));
  }
  if (!(p.run.final_time > 0.0)) v.push_back("final_time must be positive");
  if (!(p.run.minimizer.grad_tol > 0.0)) v.push_back("grad_tol must be positive");
  if (p.run.minimizer.max_iterations < 1) v.push_back("max_iterations must be at least 1");
  if (p.run.minimizer.memory < 1) v.push_back("lbfgs_memory must be at least 1");
  if (!(p.run.step.jacobian_floor > 0.0 && p.run.step.jacobian_floor < 1.0))
    v.push_back("jacobian_floor must lie in (0, 1)");
  if (!(p.run.det_lo > 0.0 && p.run.det_lo < 1.0 && p.run.det_hi > 1.0))
    v.push_back("flow-map bounds need 0 < det_lo < 1 < det_hi");
  const auto& sc = p.scenario;
  if (sc.solid_mesh.empty() != sc.fluid_mesh.empty())
    v.push_back("solid_mesh and fluid_mesh must be given together");
  if (sc.solid_mesh.empty() && sc.name != "falling-disk" && sc.name != "rest")
    v.push_back(fmt::format("unknown scenario '{}'", sc.name));
  if (sc.grid.n < 4) v.push_back("grid must be at least 4");
  if (!(sc.rho0 > 0.0)) v.push_back("rho0 must be positive");
  if (sc.force != "none" && sc.force != "gravity" && sc.force != "ramped-gravity" && sc.force != "constant")
    v.push_back(fmt::format("force preset '{}' is not one of none, gravity, ramped-gravity, constant", sc.force));
  if (sc.force == "ramped-gravity" && !(sc.ramp_time > 0.0)) v.push_back("ramped-gravity needs ramp_time > 0");
  if (p.io.vtk_stride < 0 || p.io.checkpoint_stride < 0) v.push_back("output strides must be nonnegative");
  return v;
}

SchemeParams parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::ConfigInvalid, e.what());
  }
  SchemeParams p;
  Reader r(tree);
  auto& run = p.run;
  auto& step = run.step;
  auto& f = step.fluid;
  auto& e = run.elastic;
  auto& sc = p.scenario;

  r.get("scheme", "tau", step.tau);
  r.get("scheme", "h", step.h);
  r.get("scheme", "final_time", run.final_time);
  r.get("scheme", "grad_tol", run.minimizer.grad_tol);
  r.get("scheme", "max_iterations", run.minimizer.max_iterations);
  r.get("scheme", "lbfgs_memory", run.minimizer.memory);
  r.get("scheme", "jacobian_floor", step.jacobian_floor);
  r.get("scheme", "det_lo", run.det_lo);
  r.get("scheme", "det_hi", run.det_hi);
  r.get("scheme", "min_angle_deg", run.min_angle_deg);
  r.get("scheme", "collision_tol", run.collision_tol);
  r.get("scheme", "self_contact_gap", run.self_contact_gap);
  r.get("scheme", "mass_tol", run.mass_tol);
  r.get("scheme", "cn_tol", run.cn_tol);
  std::string mass_mode = step.mass_mode == MassMode::Lumped ? "lumped" : "consistent";
  r.get("scheme", "resolvent_mass", mass_mode);
  if (mass_mode == "lumped")
    step.mass_mode = MassMode::Lumped;
  else if (mass_mode == "consistent")
    step.mass_mode = MassMode::Consistent;
  else
    r.errors().push_back(fmt::format("resolvent_mass = '{}' is not lumped or consistent", mass_mode));

  r.get("solid", "mu_s", e.mu_s);
  r.get("solid", "lambda_s", e.lambda_s);
  r.get("solid", "a", e.a);
  r.get("solid", "q", e.q);
  r.get("solid", "kappa", e.kappa);
  r.get("solid", "second_gradient", e.second_gradient);
  r.get("solid", "rho_s", f.rho_s);
  r.get("solid", "scenario", sc.name);
  r.get("solid", "grid", sc.grid.n);
  r.get("solid", "disk_radius", sc.grid.radius);
  r.get("solid", "disk_center_x", sc.grid.center.x());
  r.get("solid", "disk_center_y", sc.grid.center.y());
  r.get("solid", "stem_cells", sc.grid.stem_cells);
  std::string path;
  r.get("solid", "solid_mesh", path);
  sc.solid_mesh = path;
  path.clear();
  r.get("solid", "fluid_mesh", path);
  sc.fluid_mesh = path;
  r.get_points("solid", "container", sc.container);

  r.get("fluid", "mu", f.mu);
  r.get("fluid", "lambda", f.lambda);
  r.get("fluid", "a_p", f.a_p);
  r.get("fluid", "gamma", f.gamma);
  r.get("fluid", "beta", f.beta);
  r.get("fluid", "delta", f.delta);
  r.get("fluid", "epsilon", f.epsilon);
  r.get("fluid", "rho0", sc.rho0);
  r.get("fluid", "force", sc.force);
  r.get("fluid", "g", sc.g);
  r.get("fluid", "ramp_time", sc.ramp_time);
  r.get("fluid", "force_x", sc.force_vector.x());
  r.get("fluid", "force_y", sc.force_vector.y());

  path = p.io.output_dir.string();
  r.get("io", "output_dir", path);
  p.io.output_dir = path;
  r.get("io", "vtk_stride", p.io.vtk_stride);
  r.get("io", "checkpoint_stride", p.io.checkpoint_stride);

  r.check_unknown();
  auto errors = r.errors();
  for (auto& v : validate(p)) errors.push_back(std::move(v));
  if (!errors.empty()) {
    std::string msg = fmt::format("{} problem(s) in configuration:", errors.size());
    for (const auto& m : errors) msg += "\n  - " + m;
    throw Error(ErrorKind::ConfigInvalid, msg);
  }
  return p;
}

SchemeParams load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path.string());
  SchemeParams p = parse_config(in);
  // Relative mesh paths are resolved against the config file location.
  const auto base = path.parent_path();
  if (!p.scenario.solid_mesh.empty() && p.scenario.solid_mesh.is_relative())
    p.scenario.solid_mesh = base / p.scenario.solid_mesh;
  if (!p.scenario.fluid_mesh.empty() && p.scenario.fluid_mesh.is_relative())
    p.scenario.fluid_mesh = base / p.scenario.fluid_mesh;
  return p;
}

void write_config(std::ostream& out, const SchemeParams& p) {
  const auto& run = p.run;
  const auto& step = run.step;
  const auto& f = step.fluid;
  const auto& e = run.elastic;
  const auto& sc = p.scenario;
  auto num = [](double x) { return fmt::format("{:.17g}", x); };
  out << "[scheme]\n"
      << "tau = " << num(step.tau) << "\nh = " << num(step.h) << "\nfinal_time = " << num(run.final_time)
      << "\ngrad_tol = " << num(run.minimizer.grad_tol) << "\nmax_iterations = " << run.minimizer.max_iterations
      << "\nlbfgs_memory = " << run.minimizer.memory << "\njacobian_floor = " << num(step.jacobian_floor)
      << "\ndet_lo = " << num(run.det_lo) << "\ndet_hi = " << num(run.det_hi)
      << "\nmin_angle_deg = " << num(run.min_angle_deg) << "\ncollision_tol = " << num(run.collision_tol)
      << "\nself_contact_gap = " << num(run.self_contact_gap) << "\nmass_tol = " << num(run.mass_tol)
      << "\ncn_tol = " << num(run.cn_tol)
      << "\nresolvent_mass = " << (step.mass_mode == MassMode::Lumped ? "lumped" : "consistent") << "\n\n";
  out << "[solid]\n"
      << "mu_s = " << num(e.mu_s) << "\nlambda_s = " << num(e.lambda_s) << "\na = " << num(e.a)
      << "\nq = " << num(e.q) << "\nkappa = " << num(e.kappa)
      << "\nsecond_gradient = " << (e.second_gradient ? "true" : "false") << "\nrho_s = " << num(f.rho_s)
      << "\nscenario = " << sc.name << "\ngrid = " << sc.grid.n << "\ndisk_radius = " << num(sc.grid.radius)
      << "\ndisk_center_x = " << num(sc.grid.center.x()) << "\ndisk_center_y = " << num(sc.grid.center.y())
      << "\nstem_cells = " << sc.grid.stem_cells << "\n";
  if (!sc.solid_mesh.empty())
    out << "solid_mesh = " << std::filesystem::absolute(sc.solid_mesh).string()
        << "\nfluid_mesh = " << std::filesystem::absolute(sc.fluid_mesh).string() << "\n";
  out << "container =";
  for (const auto& c : sc.container) out << " " << num(c.x()) << " " << num(c.y());
  out << "\n\n[fluid]\n"
      << "mu = " << num(f.mu) << "\nlambda = " << num(f.lambda) << "\na_p = " << num(f.a_p)
      << "\ngamma = " << num(f.gamma) << "\nbeta = " << num(f.beta) << "\ndelta = " << num(f.delta)
      << "\nepsilon = " << num(f.epsilon) << "\nrho0 = " << num(sc.rho0) << "\nforce = " << sc.force
      << "\ng = " << num(sc.g) << "\nramp_time = " << num(sc.ramp_time) << "\nforce_x = " << num(sc.force_vector.x())
      << "\nforce_y = " << num(sc.force_vector.y()) << "\n\n";
  out << "[io]\n"
      << "output_dir = " << p.io.output_dir.string() << "\nvtk_stride = " << p.io.vtk_stride
      << "\ncheckpoint_stride = " << p.io.checkpoint_stride << "\n";
}

Scenario build_scenario(const SchemeParams& p) {
  const auto& sc = p.scenario;
  Scenario s;
  if (!sc.solid_mesh.empty()) {
    s.name = sc.solid_mesh.stem().string();
    s.solid = solid_from_text(read_text_mesh(sc.solid_mesh));
    s.solid.validate();
    s.fluid = fluid_from_text(read_text_mesh(sc.fluid_mesh), s.solid);
    s.container.polygon = sc.container;
    s.fluid.validate(s.container, s.solid.nodes);
    s.rho0.assign(s.fluid.num_nodes(), sc.rho0);
    s.momentum0.assign(s.fluid.num_nodes(), Vec2::Zero());
    s.eta1.assign(s.solid.num_nodes(), Vec2::Zero());
  } else {
    s = make_scenario(sc.name, sc.grid, p.run.elastic, p.run.step.fluid);
  }
  // The rest scenario is force free by construction; elsewhere the preset applies.
  if (s.name == "rest" && sc.solid_mesh.empty()) return s;
  s.gravity_ramp = 0.0;
  if (sc.force == "none") {
    s.gravity = Vec2::Zero();
  } else if (sc.force == "gravity") {
    s.gravity = Vec2(0.0, -sc.g);
  } else if (sc.force == "ramped-gravity") {
    s.gravity = Vec2(0.0, -sc.g);
    s.gravity_ramp = sc.ramp_time;
  } else {
    s.gravity = sc.force_vector;
  }
  return s;
}

}  // namespace varimove
