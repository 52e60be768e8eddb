#include "varimove/transport.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <fmt/format.h>

#include "varimove/errors.hpp"

namespace varimove {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void add_stiffness(const P1Geometry& geom, std::span<const Tri> tris, double scale, Triplets& t) {
  for (std::size_t e = 0; e < tris.size(); ++e)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        t.emplace_back(tris[e][a], tris[e][b], scale * geom.area[e] * geom.grad[e][a].dot(geom.grad[e][b]));
}

void add_mass(const P1Geometry& geom, std::span<const Tri> tris, MassMode mode, Triplets& t) {
  if (mode == MassMode::Lumped) {
    for (std::size_t i = 0; i < geom.lumped.size(); ++i) t.emplace_back(i, i, geom.lumped[i]);
    return;
  }
  for (std::size_t e = 0; e < tris.size(); ++e)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) t.emplace_back(tris[e][a], tris[e][b], geom.area[e] * (a == b ? 2.0 : 1.0) / 12.0);
}

}  // namespace

std::vector<double> neumann_resolvent(const P1Geometry& geom, std::span<const Tri> tris, std::span<const double> rho,
                                      double tau_eps, MassMode mode) {
  if (tau_eps < 0.0) throw Error(ErrorKind::SolverFailure, "negative diffusion parameter");
  const auto n = static_cast<Eigen::Index>(rho.size());
  std::vector<double> out(rho.begin(), rho.end());
  if (tau_eps == 0.0) return out;

  Triplets tm, ta;
  add_mass(geom, tris, mode, tm);
  ta = tm;
  add_stiffness(geom, tris, tau_eps, ta);
  Eigen::SparseMatrix<double> M(n, n), A(n, n);
  M.setFromTriplets(tm.begin(), tm.end());
  A.setFromTriplets(ta.begin(), ta.end());
  const Eigen::Map<const Eigen::VectorXd> r(rho.data(), n);
  const Eigen::VectorXd rhs = M * r;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::SolverFailure, "factorization of M + tau eps K failed");
  Eigen::VectorXd x = solver.solve(rhs);
  if (solver.info() != Eigen::Success || !x.allFinite())
    throw Error(ErrorKind::SolverFailure, "resolvent solve failed");
  // one step of iterative refinement keeps mass conservation at rounding level
  x += solver.solve(rhs - A * x);
  std::copy(x.data(), x.data() + n, out.begin());
  return out;
}

std::vector<double> nodal_det_factors(std::span<const double> lumped_old, std::span<const double> lumped_new) {
  std::vector<double> d(lumped_old.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = lumped_new[i] / lumped_old[i];
  return d;
}

std::vector<double> transport_density(std::span<const double> rho_tilde, std::span<const double> lumped_old,
                                      std::span<const double> lumped_new) {
  std::vector<double> out(rho_tilde.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(lumped_new[i] > 0.0))
      throw Error(ErrorKind::NonPositiveJacobian, fmt::format("nodal det factor at node {} is not positive", i));
    out[i] = rho_tilde[i] * lumped_old[i] / lumped_new[i];
  }
  return out;
}

double total_mass(std::span<const double> lumped, std::span<const double> rho) {
  double m = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) m += lumped[i] * rho[i];
  return m;
}

double potential_energy(const FluidParams& f, std::span<const double> lumped, std::span<const double> rho) {
  double u = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) u += lumped[i] * potential_delta(f, rho[i]);
  return u;
}

double eps_dissipation(const FluidParams& f, std::span<const double> lumped, std::span<const double> rho,
                       std::span<const double> rho_tilde) {
  double d = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i)
    d += potential_delta_prime(f, rho_tilde[i]) * lumped[i] * (rho[i] - rho_tilde[i]);
  return d;
}

std::vector<double> stiffness_apply(const P1Geometry& geom, std::span<const Tri> tris, std::span<const double> x) {
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t e = 0; e < tris.size(); ++e) {
    Vec2 g = Vec2::Zero();
    for (int a = 0; a < 3; ++a) g += x[tris[e][a]] * geom.grad[e][a];
    for (int a = 0; a < 3; ++a) y[tris[e][a]] += geom.area[e] * g.dot(geom.grad[e][a]);
  }
  return y;
}

MinMaxReport minmax_certificate(double rho0_min, double rho0_max, std::span<const MinMaxSample> samples,
                                double allowed_slack) {
  MinMaxReport r;
  r.rho_min = rho0_min;
  r.rho_max = rho0_max;
  for (const auto& s : samples) {
    r.integrated_div += s.tau * s.div_sup;
    r.rho_min = std::min(r.rho_min, s.rho_min);
    r.rho_max = std::max(r.rho_max, s.rho_max);
  }
  r.lower_bound = rho0_min * std::exp(-r.integrated_div);
  r.upper_bound = rho0_max * std::exp(r.integrated_div);
  r.slack = std::max(r.lower_bound / r.rho_min, r.rho_max / r.upper_bound);
  r.violated = !(r.rho_min > 0.0) || r.slack > 1.0 + allowed_slack;
  return r;
}

double renormalization_step_residual(const TransportStepRecord& rec, const Renormalizer& theta) {
  const auto& g = rec.geom_k;
  double before = 0.0, after = 0.0;
  for (std::size_t i = 0; i < rec.rho_k.size(); ++i) {
    before += g.lumped[i] * theta.theta(rec.rho_k[i]);
    after += rec.lumped_next[i] * theta.theta(rec.rho_next[i]);
  }
  double pressure_like = 0.0;
  for (std::size_t e = 0; e < rec.tris.size(); ++e) {
    double mean = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double r = rec.rho_tilde[rec.tris[e][a]];
      mean += (r * theta.theta_prime(r) - theta.theta(r)) / 3.0;
    }
    pressure_like += g.area[e] * rec.div_v[e] * mean;
  }
  std::vector<double> tp(rec.rho_tilde.size());
  for (std::size_t i = 0; i < tp.size(); ++i) tp[i] = theta.theta_prime(rec.rho_tilde[i]);
  const auto Kr = stiffness_apply(g, rec.tris, rec.rho_tilde);
  double diffusion = 0.0;
  for (std::size_t i = 0; i < tp.size(); ++i) diffusion += tp[i] * Kr[i];
  return std::abs((after - before) / rec.tau + pressure_like + rec.epsilon * diffusion);
}

double renormalization_residual(std::span<const TransportStepRecord> slice, const Renormalizer& theta) {
  double m = 0.0;
  for (const auto& rec : slice) m = std::max(m, renormalization_step_residual(rec, theta));
  return m;
}

}  // namespace varimove
