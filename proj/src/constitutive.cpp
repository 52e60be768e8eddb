#include "varimove/constitutive.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "varimove/errors.hpp"

namespace varimove {

SolidModel::SolidModel(const ReferenceSolidMesh& mesh, ElasticParams params)
    : mesh_(mesh), params_(params), geom_(build_p1_geometry(mesh.nodes, mesh.elements)) {}

ValueAndGradient SolidModel::elastic_energy(std::span<const Vec2> eta, bool with_gradient) const {
  ValueAndGradient out;
  if (with_gradient) out.gradient.assign(eta.size(), Vec2::Zero());
  const auto& tris = mesh_.elements;
  const Mat2 I = Mat2::Identity();
  for (std::size_t e = 0; e < tris.size(); ++e) {
    const Mat2 F = element_gradient(geom_, tris, eta, e);
    const double J = F.determinant();
    if (!(J > 0.0))
      throw Error(ErrorKind::InadmissibleDeformation, fmt::format("det grad eta = {:.6g} on element {}", J, e));
    const Mat2 M = F.transpose() * F - I;
    const Mat2 CM = params_.apply_C(M);
    const double Ja = std::pow(J, -params_.a);
    out.value += geom_.area[e] * (ddot(CM, M) + Ja) / 8.0;
    if (with_gradient) {
      const Mat2 FinvT = F.inverse().transpose();
      const Mat2 P = geom_.area[e] * (4.0 * F * CM - params_.a * Ja * FinvT) / 8.0;
      scatter_element_gradient(geom_, tris, e, P, out.gradient);
    }
  }
  if (params_.second_gradient)
    out.value += edge_hessian_power(geom_, tris, eta, params_.q, 1.0 / 8.0,
                                    with_gradient ? std::span<Vec2>(out.gradient) : std::span<Vec2>());
  return out;
}

double SolidModel::elastic_energy_value(std::span<const Vec2> eta) const {
  try {
    return elastic_energy(eta, false).value;
  } catch (const Error& err) {
    if (err.kind() == ErrorKind::InadmissibleDeformation) return std::numeric_limits<double>::infinity();
    throw;
  }
}

ValueAndGradient SolidModel::elastic_energy_kappa(std::span<const Vec2> eta, bool with_gradient) const {
  ValueAndGradient out = elastic_energy(eta, with_gradient);
  out.value += edge_hessian_power(geom_, mesh_.elements, eta, 2.0, 2.0 * params_.kappa,
                                  with_gradient ? std::span<Vec2>(out.gradient) : std::span<Vec2>());
  return out;
}

ValueAndGradient SolidModel::dissipation(std::span<const Vec2> eta, std::span<const Vec2> b, bool with_gradient) const {
  ValueAndGradient out;
  if (with_gradient) out.gradient.assign(b.size(), Vec2::Zero());
  const auto& tris = mesh_.elements;
  for (std::size_t e = 0; e < tris.size(); ++e) {
    const Mat2 F = element_gradient(geom_, tris, eta, e);
    const Mat2 G = element_gradient(geom_, tris, b, e);
    const Mat2 S = G.transpose() * F + F.transpose() * G;
    out.value += geom_.area[e] * frob2(S);
    if (with_gradient) scatter_element_gradient(geom_, tris, e, geom_.area[e] * 4.0 * F * S, out.gradient);
  }
  return out;
}

ValueAndGradient SolidModel::dissipation_kappa(std::span<const Vec2> eta, std::span<const Vec2> b,
                                               bool with_gradient) const {
  ValueAndGradient out = dissipation(eta, b, with_gradient);
  out.value += edge_hessian_power(geom_, mesh_.elements, b, 2.0, 2.0 * params_.kappa,
                                  with_gradient ? std::span<Vec2>(out.gradient) : std::span<Vec2>());
  return out;
}

ValueAndGradient kappa_regularizer(std::span<const Vec2> field, const P1Geometry& geom, std::span<const Tri> tris,
                                   double kappa, bool with_gradient) {
  ValueAndGradient out;
  if (with_gradient) out.gradient.assign(field.size(), Vec2::Zero());
  out.value = edge_hessian_power(geom, tris, field, 2.0, 2.0 * kappa,
                                 with_gradient ? std::span<Vec2>(out.gradient) : std::span<Vec2>());
  return out;
}

namespace {

void require_nonnegative(double rho) {
  if (rho < 0.0 || std::isnan(rho)) throw Error(ErrorKind::NegativeDensity, fmt::format("rho = {:.6g}", rho));
}

}  // namespace

double pressure(const FluidParams& f, double rho) {
  require_nonnegative(rho);
  return f.a_p * std::pow(rho, f.gamma);
}

double pressure_potential(const FluidParams& f, double rho) {
  require_nonnegative(rho);
  return f.a_p * std::pow(rho, f.gamma) / (f.gamma - 1.0);
}

double pressure_delta(const FluidParams& f, double rho) {
  return pressure(f, rho) + f.delta * std::pow(rho, f.beta) + f.delta * rho * rho;
}

double pressure_delta_prime(const FluidParams& f, double rho) {
  require_nonnegative(rho);
  return f.a_p * f.gamma * std::pow(rho, f.gamma - 1.0) + f.delta * f.beta * std::pow(rho, f.beta - 1.0) +
         2.0 * f.delta * rho;
}

double pressure_delta_second(const FluidParams& f, double rho) {
  require_nonnegative(rho);
  return f.a_p * f.gamma * (f.gamma - 1.0) * std::pow(rho, f.gamma - 2.0) +
         f.delta * f.beta * (f.beta - 1.0) * std::pow(rho, f.beta - 2.0) + 2.0 * f.delta;
}

double potential_delta(const FluidParams& f, double rho) {
  return pressure_potential(f, rho) + f.delta * std::pow(rho, f.beta) / (f.beta - 1.0) + f.delta * rho * rho;
}

double potential_delta_prime(const FluidParams& f, double rho) {
  require_nonnegative(rho);
  return f.a_p * f.gamma / (f.gamma - 1.0) * std::pow(rho, f.gamma - 1.0) +
         f.delta * f.beta / (f.beta - 1.0) * std::pow(rho, f.beta - 1.0) + 2.0 * f.delta * rho;
}

double potential_delta_second(const FluidParams& f, double rho) {
  require_nonnegative(rho);
  return f.a_p * f.gamma * std::pow(rho, f.gamma - 2.0) + f.delta * f.beta * std::pow(rho, f.beta - 2.0) +
         2.0 * f.delta;
}

Mat2 viscous_stress(const FluidParams& f, const Mat2& grad_v) {
  const Mat2 sym = 0.5 * (grad_v + grad_v.transpose());
  const double div = grad_v.trace();
  const Mat2 I = Mat2::Identity();
  return 2.0 * f.mu * (sym - div / 3.0 * I) + f.lambda * div * I;
}

double viscous_dissipation(const FluidParams& f, const Mat2& grad_v) { return ddot(viscous_stress(f, grad_v), grad_v); }

}  // namespace varimove
