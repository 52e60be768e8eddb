#include "varimove/minimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/SparseCholesky>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "varimove/errors.hpp"

namespace varimove {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Bilinear form of the viscous stress, B(L1, L2) = S(L1):L2.
double viscous_bilinear(const FluidParams& f, const Mat2& a, const Mat2& b) { return ddot(viscous_stress(f, a), b); }

Mat2 unit_gradient(int comp, const Vec2& grad_n) {
  Mat2 m = Mat2::Zero();
  m.row(comp) = grad_n.transpose();
  return m;
}

}  // namespace

StepProblem::StepProblem(const SolidModel& solid, const StepState& state, const StepParams& params)
    : solid_(solid), state_(state), params_(params) {
  const FluidMesh& fm = state.fluid;
  geom_k_ = build_p1_geometry(fm.nodes, fm.triangles);
  rho_tilde_ = neumann_resolvent(geom_k_, fm.triangles, state.rho, params.tau * params.fluid.epsilon, params.mass_mode);
  node_mass_.resize(fm.num_nodes());
  cphi_.resize(fm.num_nodes());
  for (std::size_t i = 0; i < fm.num_nodes(); ++i) {
    node_mass_[i] = rho_tilde_[i] * geom_k_.lumped[i];
    cphi_[i] = std::sqrt(state.lumped0[i] / geom_k_.lumped[i]);
  }

  const auto& sm = solid.mesh();
  solid_dof_.assign(sm.num_nodes(), -1);
  Eigen::Index next = 0;
  for (std::size_t a = 0; a < sm.num_nodes(); ++a) {
    if (!sm.is_dirichlet[a]) {
      solid_dof_[a] = static_cast<int>(next);
      next += 2;
    }
  }
  fluid_dof_.assign(fm.num_nodes(), -1);
  for (std::size_t i = 0; i < fm.num_nodes(); ++i) {
    if (fm.is_interface(static_cast<int>(i))) {
      fluid_dof_[i] = solid_dof_[fm.interface_node_map[i]];
    } else if (!fm.on_outer_boundary[i]) {
      fluid_dof_[i] = static_cast<int>(next);
      next += 2;
    }
  }
  n_ = next;
}

void StepProblem::reconstruct(const Eigen::VectorXd& x, std::vector<Vec2>& eta, std::vector<Vec2>& disp) const {
  const auto& sm = solid_.mesh();
  eta.resize(sm.num_nodes());
  for (std::size_t a = 0; a < sm.num_nodes(); ++a) {
    const int d = solid_dof_[a];
    eta[a] = d < 0 ? sm.dirichlet_values[a] : Vec2(state_.eta[a] + x.segment<2>(d));
  }
  disp.resize(state_.fluid.num_nodes());
  for (std::size_t i = 0; i < disp.size(); ++i) {
    const int d = fluid_dof_[i];
    disp[i] = d < 0 ? Vec2::Zero() : Vec2(x.segment<2>(d));
  }
}

Eigen::VectorXd StepProblem::pack(std::span<const Vec2> eta, std::span<const Vec2> disp) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
  for (std::size_t a = 0; a < solid_dof_.size(); ++a)
    if (solid_dof_[a] >= 0) x.segment<2>(solid_dof_[a]) = eta[a] - state_.eta[a];
  for (std::size_t i = 0; i < fluid_dof_.size(); ++i)
    if (fluid_dof_[i] >= 0 && !state_.fluid.is_interface(static_cast<int>(i)))
      x.segment<2>(fluid_dof_[i]) = disp[i];
  return x;
}

void StepProblem::accumulate(const Eigen::VectorXd& x, ObjectiveTerms* terms, std::vector<Vec2>* g_solid,
                             std::vector<Vec2>* g_fluid, bool* ok) const {
  *ok = false;
  std::vector<Vec2> eta, disp;
  reconstruct(x, eta, disp);
  const double tau = params_.tau, h = params_.h;
  const FluidParams& fp = params_.fluid;
  const bool want_grad = g_solid != nullptr;

  // Solid part.
  if (min_det(solid_.mesh(), eta) <= params_.jacobian_floor) return;
  ValueAndGradient el;
  try {
    el = solid_.elastic_energy_kappa(eta, want_grad);
  } catch (const Error&) {
    return;
  }
  if (!std::isfinite(el.value)) return;

  const std::size_t ns = eta.size();
  std::vector<Vec2> u(ns);
  for (std::size_t a = 0; a < ns; ++a) u[a] = eta[a] - state_.eta[a];
  ValueAndGradient diss = solid_.dissipation_kappa(state_.eta, u, want_grad);

  const auto& ms = solid_.geometry().lumped;
  const double rho_s = fp.rho_s;
  double inert_s = 0.0, work_s = 0.0;
  for (std::size_t a = 0; a < ns; ++a) {
    const Vec2 r = u[a] / tau - state_.zeta[a];
    inert_s += ms[a] * r.squaredNorm();
    work_s += ms[a] * u[a].dot(state_.f_solid);
  }
  inert_s *= tau / (2.0 * h) * rho_s;

  // Fluid part.
  const FluidMesh& fm = state_.fluid;
  const auto& tris = fm.triangles;
  const std::size_t nf = fm.num_nodes();
  const std::size_t ne = tris.size();
  std::vector<Vec2> y(nf);
  for (std::size_t i = 0; i < nf; ++i) y[i] = fm.nodes[i] + disp[i];
  std::vector<double> area_new(ne);
  std::vector<double> lumped_new(nf, 0.0);
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& t = tris[e];
    area_new[e] = signed_area(y[t[0]], y[t[1]], y[t[2]]);
    if (area_new[e] <= params_.jacobian_floor * geom_k_.area[e]) return;
    for (int k = 0; k < 3; ++k) lumped_new[t[k]] += area_new[e] / 3.0;
  }
  double potential = 0.0;
  std::vector<double> p_new(want_grad ? nf : 0);
  for (std::size_t i = 0; i < nf; ++i) {
    const double rn = node_mass_[i] / lumped_new[i];
    potential += lumped_new[i] * potential_delta(fp, rn);
    if (want_grad) p_new[i] = pressure_delta(fp, rn);
  }

  double viscous = 0.0;
  for (std::size_t e = 0; e < ne; ++e) {
    const Mat2 L = element_gradient(geom_k_, tris, disp, e);
    viscous += geom_k_.area[e] * viscous_dissipation(fp, L);
  }
  viscous /= 2.0 * tau;

  const double kappa = solid_.params().kappa;
  ValueAndGradient kf = kappa_regularizer(disp, geom_k_, tris, kappa / (2.0 * tau), want_grad);

  double inert_f = 0.0, work_f = 0.0;
  for (std::size_t i = 0; i < nf; ++i) {
    const double sr = std::sqrt(state_.rho[i]);
    const Vec2 r = sr * disp[i] / tau - cphi_[i] * state_.w[i];
    inert_f += geom_k_.lumped[i] * r.squaredNorm();
    work_f += geom_k_.lumped[i] * state_.rho[i] * disp[i].dot(state_.f_fluid);
  }
  inert_f *= tau / (2.0 * h);

  if (terms) {
    terms->elastic = el.value;
    terms->potential = potential;
    terms->dissipation_solid = diss.value / tau;
    terms->viscous = viscous;
    terms->kappa_fluid = kf.value;
    terms->inertial_solid = inert_s;
    terms->inertial_fluid = inert_f;
    terms->work_solid = work_s;
    terms->work_fluid = work_f;
  }

  if (want_grad) {
    auto& gs = *g_solid;
    gs.assign(ns, Vec2::Zero());
    for (std::size_t a = 0; a < ns; ++a) {
      gs[a] = el.gradient[a] + diss.gradient[a] / tau +
              (rho_s * ms[a] / h) * (u[a] / tau - state_.zeta[a]) - ms[a] * state_.f_solid;
    }
    auto& gf = *g_fluid;
    gf.assign(nf, Vec2::Zero());
    for (std::size_t e = 0; e < ne; ++e) {
      const auto& t = tris[e];
      const double c = -(p_new[t[0]] + p_new[t[1]] + p_new[t[2]]) / 3.0;
      const auto dA = signed_area_gradient(y[t[0]], y[t[1]], y[t[2]]);
      for (int k = 0; k < 3; ++k) gf[t[k]] += c * dA[k];
      const Mat2 L = element_gradient(geom_k_, tris, disp, e);
      scatter_element_gradient(geom_k_, tris, e, geom_k_.area[e] / tau * viscous_stress(fp, L), gf);
    }
    for (std::size_t i = 0; i < nf; ++i) {
      const double sr = std::sqrt(state_.rho[i]);
      const double A = geom_k_.lumped[i];
      gf[i] += kf.gradient[i] + (A * sr / h) * (sr * disp[i] / tau - cphi_[i] * state_.w[i]) -
               A * state_.rho[i] * state_.f_fluid;
    }
  }
  *ok = true;
}

double StepProblem::evaluate(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
  ObjectiveTerms t;
  std::vector<Vec2> gs, gf;
  bool ok = false;
  accumulate(x, &t, grad ? &gs : nullptr, grad ? &gf : nullptr, &ok);
  if (!ok) return kInf;
  if (grad) {
    grad->setZero(n_);
    for (std::size_t a = 0; a < gs.size(); ++a)
      if (solid_dof_[a] >= 0) grad->segment<2>(solid_dof_[a]) += gs[a];
    for (std::size_t i = 0; i < gf.size(); ++i)
      if (fluid_dof_[i] >= 0) grad->segment<2>(fluid_dof_[i]) += gf[i];
  }
  return t.total();
}

ObjectiveTerms StepProblem::terms(const Eigen::VectorXd& x) const {
  ObjectiveTerms t;
  bool ok = false;
  accumulate(x, &t, nullptr, nullptr, &ok);
  if (!ok) throw Error(ErrorKind::InadmissibleDeformation, "objective terms requested at an inadmissible state");
  return t;
}

void StepProblem::nodal_gradient(const Eigen::VectorXd& x, std::vector<Vec2>& g_solid,
                                 std::vector<Vec2>& g_fluid) const {
  bool ok = false;
  accumulate(x, nullptr, &g_solid, &g_fluid, &ok);
  if (!ok) throw Error(ErrorKind::InadmissibleDeformation, "gradient requested at an inadmissible state");
}

bool StepProblem::admissible(const Eigen::VectorXd& x) const {
  std::vector<Vec2> eta, disp;
  reconstruct(x, eta, disp);
  if (min_det(solid_.mesh(), eta) <= params_.jacobian_floor) return false;
  return boundary_image_is_simple(solid_.mesh(), eta);
}

Eigen::SparseMatrix<double> StepProblem::quadratic_hessian() const {
  using Trip = Eigen::Triplet<double>;
  std::vector<Trip> trips;
  const double tau = params_.tau, h = params_.h;
  const FluidParams& fp = params_.fluid;
  const double kappa = solid_.params().kappa;

  // Local dense block on up to 4 nodes, scattered through a dof lookup.
  auto scatter = [&](std::span<const int> dofs, const Eigen::MatrixXd& H) {
    for (Eigen::Index r = 0; r < H.rows(); ++r) {
      const int dr = dofs[r];
      if (dr < 0) continue;
      for (Eigen::Index c = 0; c < H.cols(); ++c) {
        const int dc = dofs[c];
        if (dc < 0 || H(r, c) == 0.0) continue;
        trips.emplace_back(dr, dc, H(r, c));
      }
    }
  };
  auto node_dofs = [](const std::vector<int>& map, std::span<const int> nodes) {
    std::vector<int> d;
    for (int n : nodes) {
      const int b = map[n];
      d.push_back(b < 0 ? -1 : b);
      d.push_back(b < 0 ? -1 : b + 1);
    }
    return d;
  };
  // Edge jump term c * (|e|^2/omega) |F_l - F_r|^2, Hessian 2c (|e|^2/omega) I (x) (g_l - g_r)(g_l - g_r)^T.
  auto edge_terms = [&](const P1Geometry& g, const std::vector<Tri>& tris, const std::vector<int>& map, double c) {
    for (const auto& ed : g.edges) {
      std::vector<int> nodes;
      std::vector<Vec2> jg;
      auto add = [&](int node, const Vec2& v) {
        auto it = std::find(nodes.begin(), nodes.end(), node);
        if (it == nodes.end()) {
          nodes.push_back(node);
          jg.push_back(v);
        } else {
          jg[it - nodes.begin()] += v;
        }
      };
      for (int k = 0; k < 3; ++k) add(tris[ed.left][k], g.grad[ed.left][k]);
      for (int k = 0; k < 3; ++k) add(tris[ed.right][k], -g.grad[ed.right][k]);
      const double wgt = 2.0 * c * ed.length * ed.length / ed.patch;
      const Eigen::Index m = static_cast<Eigen::Index>(nodes.size());
      Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2 * m, 2 * m);
      for (Eigen::Index p = 0; p < m; ++p)
        for (Eigen::Index q = 0; q < m; ++q) {
          const double v = wgt * jg[p].dot(jg[q]);
          H(2 * p, 2 * q) = v;
          H(2 * p + 1, 2 * q + 1) = v;
        }
      scatter(node_dofs(map, nodes), H);
    }
  };

  // Solid dissipation (1/tau) R(eta_k, u): Hessian (2/tau) area S_ai : S_bj.
  const auto& sm = solid_.mesh();
  const auto& sg = solid_.geometry();
  for (std::size_t e = 0; e < sm.elements.size(); ++e) {
    const Mat2 F = element_gradient(sg, sm.elements, state_.eta, e);
    std::array<Mat2, 6> S;
    for (int a = 0; a < 3; ++a)
      for (int i = 0; i < 2; ++i) {
        const Mat2 dG = unit_gradient(i, sg.grad[e][a]);
        S[2 * a + i] = dG.transpose() * F + F.transpose() * dG;
      }
    Eigen::MatrixXd H(6, 6);
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) H(r, c) = 2.0 * sg.area[e] / tau * ddot(S[r], S[c]);
    const std::array<int, 3> nodes = sm.elements[e];
    scatter(node_dofs(solid_dof_, nodes), H);
  }
  edge_terms(sg, sm.elements, solid_dof_, kappa / tau);

  // Fluid viscous and kappa terms.
  const auto& tris = state_.fluid.triangles;
  for (std::size_t e = 0; e < tris.size(); ++e) {
    std::array<Mat2, 6> L;
    for (int a = 0; a < 3; ++a)
      for (int i = 0; i < 2; ++i) L[2 * a + i] = unit_gradient(i, geom_k_.grad[e][a]);
    Eigen::MatrixXd H(6, 6);
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) H(r, c) = geom_k_.area[e] / tau * viscous_bilinear(fp, L[r], L[c]);
    const std::array<int, 3> nodes = tris[e];
    scatter(node_dofs(fluid_dof_, nodes), H);
  }
  edge_terms(geom_k_, tris, fluid_dof_, kappa / (2.0 * tau));

  // Inertia.
  for (std::size_t a = 0; a < solid_dof_.size(); ++a) {
    if (solid_dof_[a] < 0) continue;
    const double v = fp.rho_s * sg.lumped[a] / (h * tau);
    trips.emplace_back(solid_dof_[a], solid_dof_[a], v);
    trips.emplace_back(solid_dof_[a] + 1, solid_dof_[a] + 1, v);
  }
  for (std::size_t i = 0; i < fluid_dof_.size(); ++i) {
    if (fluid_dof_[i] < 0) continue;
    const double v = geom_k_.lumped[i] * state_.rho[i] / (h * tau);
    trips.emplace_back(fluid_dof_[i], fluid_dof_[i], v);
    trips.emplace_back(fluid_dof_[i] + 1, fluid_dof_[i] + 1, v);
  }

  Eigen::SparseMatrix<double> P(n_, n_);
  P.setFromTriplets(trips.begin(), trips.end());
  return P;
}

StepResult minimize_step(const StepProblem& problem, const MinimizerOptions& options) {
  const Eigen::Index n = problem.size();
  StepResult res;
  res.x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd g;
  double J = problem.evaluate(res.x, &g);
  if (!std::isfinite(J))
    throw Error(ErrorKind::InadmissibleDeformation, "the starting candidate of the step is inadmissible");
  res.objective_start = J;
  auto converged = [&](const Eigen::VectorXd& gr, double val) {
    return inf_norm(gr) <= options.grad_tol * (1.0 + std::abs(val));
  };
  auto finish = [&](double val, const Eigen::VectorXd& gr) {
    res.objective = val;
    res.grad_norm = inf_norm(gr) / (1.0 + std::abs(val));
    return res;
  };
  if (n == 0 || converged(g, J)) return finish(J, g);

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> precond;
  precond.compute(problem.quadratic_hessian());
  if (precond.info() != Eigen::Success)
    throw Error(ErrorKind::SolverFailure, "preconditioner factorization failed");

  struct Pair {
    Eigen::VectorXd s, y;
    double rho;
  };
  std::deque<Pair> memory;
  double gamma = 1.0;

  for (int it = 0; it < options.max_iterations; ++it) {
    // Two-loop recursion with H0 = gamma * P^{-1}.
    Eigen::VectorXd q = g;
    std::vector<double> alpha(memory.size());
    for (std::size_t m = memory.size(); m-- > 0;) {
      alpha[m] = memory[m].rho * memory[m].s.dot(q);
      q -= alpha[m] * memory[m].y;
    }
    Eigen::VectorXd r = gamma * precond.solve(q);
    for (std::size_t m = 0; m < memory.size(); ++m) {
      const double b = memory[m].rho * memory[m].y.dot(r);
      r += (alpha[m] - b) * memory[m].s;
    }
    Eigen::VectorXd d = -r;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      memory.clear();
      gamma = 1.0;
      d = -precond.solve(g);
      slope = g.dot(d);
    }

    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd xt;
    double Jt = kInf;
    double best_J = J;
    double best_step = 0.0;
    Eigen::VectorXd gt;
    bool have_gt = false;
    for (int bt = 0; bt < options.max_backtracks; ++bt, step *= 0.5) {
      xt = res.x + step * d;
      Jt = problem.evaluate(xt);
      const bool admissible = std::isfinite(Jt) && (!options.injectivity_guard || problem.admissible(xt));
      if (admissible && Jt <= J + options.armijo * step * slope) {
        accepted = true;
        break;
      }
      // Predicted decrease below the round-off of J: accept on gradient reduction,
      // allowing an increase of at most noise_tol(1+|J|).
      if (admissible && bt == 0 && Jt <= J + options.noise_tol * (1.0 + std::abs(J))) {
        Jt = problem.evaluate(xt, &gt);
        if (inf_norm(gt) < inf_norm(g)) {
          accepted = have_gt = true;
          break;
        }
      }
      if (admissible && Jt < best_J) {
        best_J = Jt;
        best_step = step;
      }
      ++res.backtracks;
    }
    if (!accepted) {
      if (best_step > 0.0) {
        xt = res.x + best_step * d;
        Jt = best_J;
      } else if (inf_norm(g) <= 10.0 * options.grad_tol * (1.0 + std::abs(J))) {
        spdlog::debug("line search exhausted near stationarity, |g|={:.3e}", inf_norm(g));
        res.iterations = it;
        return finish(J, g);
      } else {
        throw Error(ErrorKind::LineSearchStall,
                    fmt::format("no admissible decrease along the search direction (iteration {}, J = {:.17g}, "
                                "|g|/(1+|J|) = {:.3e}, slope = {:.3e})",
                                it, J, inf_norm(g) / (1.0 + std::abs(J)), slope));
      }
    }
    if (!have_gt) Jt = problem.evaluate(xt, &gt);
    Pair p{xt - res.x, gt - g, 0.0};
    const double sy = p.s.dot(p.y);
    if (sy > 1e-14 * p.s.norm() * p.y.norm()) {
      p.rho = 1.0 / sy;
      const Eigen::VectorXd Py = precond.solve(p.y);
      gamma = sy / p.y.dot(Py);
      memory.push_back(std::move(p));
      if (static_cast<int>(memory.size()) > options.memory) memory.pop_front();
    }
    res.x = std::move(xt);
    g = std::move(gt);
    J = Jt;
    res.iterations = it + 1;
    if (converged(g, J)) return finish(J, g);
  }
  throw Error(ErrorKind::MaxIterations,
              "step minimizer did not reach the gradient tolerance, |g|/(1+|J|)=" +
                  std::to_string(inf_norm(g) / (1.0 + std::abs(J))));
}

ElResidualVectors el_residual_vectors(const StepProblem& problem, const Eigen::VectorXd& x) {
  const StepState& st = problem.state();
  const StepParams& pr = problem.params();
  const FluidParams& fp = pr.fluid;
  const SolidModel& solid = problem.solid();
  const double tau = pr.tau, h = pr.h;

  std::vector<Vec2> eta, disp;
  problem.reconstruct(x, eta, disp);
  ElResidualVectors r;

  // Solid: DE_kappa(eta) + D2 R_kappa(eta_k, (eta - eta_k)/tau) + rho_s/h ((eta-eta_k)/tau - zeta) - f_s.
  const std::size_t ns = eta.size();
  std::vector<Vec2> vel(ns);
  for (std::size_t a = 0; a < ns; ++a) vel[a] = (eta[a] - st.eta[a]) / tau;
  const auto el = solid.elastic_energy_kappa(eta);
  const auto dr = solid.dissipation_kappa(st.eta, vel);
  const auto& ms = solid.geometry().lumped;
  r.solid.resize(ns);
  for (std::size_t a = 0; a < ns; ++a) {
    r.solid[a] = el.gradient[a] + dr.gradient[a] + (fp.rho_s * ms[a] / h) * (vel[a] - st.zeta[a]) -
                 ms[a] * st.f_solid;
  }

  // Fluid: -int p(rho_{k+1}) div b on Omega_{k+1} + int S(grad v):grad b + kappa <v, b>_{H2}
  //        + 1/h int (rho_k v - sqrt(rho_k) c w) b - int rho_k f_f b.
  const FluidMesh& fm = st.fluid;
  const auto& tris = fm.triangles;
  const std::size_t nf = fm.num_nodes();
  std::vector<Vec2> v(nf), y(nf);
  for (std::size_t i = 0; i < nf; ++i) {
    v[i] = disp[i] / tau;
    y[i] = fm.nodes[i] + disp[i];
  }
  const P1Geometry gnew = build_p1_geometry(y, tris, problem.fluid_geometry().edges);
  const auto& rt = problem.rho_tilde();
  const auto& gk = problem.fluid_geometry();
  const auto rho_next = transport_density(rt, gk.lumped, gnew.lumped);
  r.fluid.assign(nf, Vec2::Zero());
  for (std::size_t e = 0; e < tris.size(); ++e) {
    const auto& t = tris[e];
    const double pbar =
        (pressure_delta(fp, rho_next[t[0]]) + pressure_delta(fp, rho_next[t[1]]) + pressure_delta(fp, rho_next[t[2]])) /
        3.0;
    // div of the nodal test field e_{node} (x) unit on the pushed element is grad N_node^new.
    for (int k = 0; k < 3; ++k) r.fluid[t[k]] -= gnew.area[e] * pbar * gnew.grad[e][k];
    const Mat2 S = viscous_stress(fp, element_gradient(gk, tris, v, e));
    scatter_element_gradient(gk, tris, e, gk.area[e] * S, r.fluid);
  }
  const auto kv = kappa_regularizer(v, gk, tris, solid.params().kappa / 2.0);
  const auto& c = problem.inverse_jacobian_sqrt();
  for (std::size_t i = 0; i < nf; ++i) {
    const double sr = std::sqrt(st.rho[i]);
    r.fluid[i] += kv.gradient[i] + (gk.lumped[i] / h) * (st.rho[i] * v[i] - sr * c[i] * st.w[i]) -
                  gk.lumped[i] * st.rho[i] * st.f_fluid;
  }
  return r;
}

double reduce_el_residual(const StepProblem& problem, const ElResidualVectors& r, double objective) {
  const auto& sm = problem.solid().mesh();
  const FluidMesh& fm = problem.state().fluid;
  std::vector<Vec2> coupled(sm.num_nodes(), Vec2::Zero());
  double worst = 0.0;
  for (std::size_t a = 0; a < sm.num_nodes(); ++a)
    if (problem.solid_dof(static_cast<int>(a)) >= 0) coupled[a] = r.solid[a];
  for (std::size_t i = 0; i < fm.num_nodes(); ++i) {
    const int ii = static_cast<int>(i);
    if (fm.is_interface(ii)) {
      const int a = fm.interface_node_map[i];
      if (problem.solid_dof(a) >= 0) coupled[a] += r.fluid[i];
    } else if (fm.is_interior(ii)) {
      worst = std::max(worst, r.fluid[i].cwiseAbs().maxCoeff());
    }
  }
  for (std::size_t a = 0; a < sm.num_nodes(); ++a)
    if (problem.solid_dof(static_cast<int>(a)) >= 0) worst = std::max(worst, coupled[a].cwiseAbs().maxCoeff());
  return worst / (1.0 + std::abs(objective));
}

double el_residual(const StepProblem& problem, const Eigen::VectorXd& x) {
  return reduce_el_residual(problem, el_residual_vectors(problem, x), problem.evaluate(x));
}

}  // namespace varimove
