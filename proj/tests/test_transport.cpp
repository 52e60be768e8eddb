#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "test_support.hpp"
#include "varimove/geometry.hpp"
#include "varimove/transport.hpp"

using namespace varimove;

namespace {

struct Field {
  FluidMesh mesh;
  P1Geometry geom;
  std::vector<double> rho;
  std::vector<Vec2> v;
};

Field smooth_field(int n = 12) {
  Field f;
  ReferenceSolidMesh solid;
  Container box;
  build_tethered_disk(varimove::testing::small_grid(n), solid, f.mesh, box);
  f.geom = build_p1_geometry(f.mesh.nodes, f.mesh.triangles);
  for (const auto& p : f.mesh.nodes) {
    f.rho.push_back(1.0 + 0.5 * std::sin(3 * p.x()) * std::cos(2 * p.y()));
    f.v.emplace_back(std::sin(M_PI * p.x()) * p.y(), 0.3 * std::cos(M_PI * p.y()) + p.x() * p.x());
  }
  return f;
}

TransportStepRecord make_step(const Field& f, double tau, double eps) {
  TransportStepRecord rec;
  rec.tau = tau;
  rec.epsilon = eps;
  rec.tris = f.mesh.triangles;
  rec.geom_k = f.geom;
  const auto pushed = push_forward_fluid_mesh(f.mesh, f.v, tau);
  rec.lumped_next = build_p1_geometry(pushed.mesh.nodes, f.mesh.triangles).lumped;
  rec.rho_k = f.rho;
  rec.rho_tilde = neumann_resolvent(f.geom, f.mesh.triangles, f.rho, tau * eps);
  rec.rho_next = transport_density(rec.rho_tilde, f.geom.lumped, rec.lumped_next);
  for (std::size_t e = 0; e < f.mesh.triangles.size(); ++e)
    rec.div_v.push_back(element_gradient(f.geom, f.mesh.triangles, f.v, e).trace());
  return rec;
}

}  // namespace

TEST(Resolvent, ConservesMassInBothModes) {
  const Field f = smooth_field();
  const double m0 = total_mass(f.geom.lumped, f.rho);
  for (MassMode mode : {MassMode::Lumped, MassMode::Consistent})
    for (double te : {1e-4, 1e-2, 1.0}) {
      const auto r = neumann_resolvent(f.geom, f.mesh.triangles, f.rho, te, mode);
      EXPECT_NEAR(total_mass(f.geom.lumped, r), m0, 1e-13 * m0);
    }
}

TEST(Resolvent, LumpedSatisfiesMaxPrincipleAndSmooths) {
  const Field f = smooth_field();
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  std::vector<double> rough(f.rho.size());
  for (auto& r : rough) r = u(rng);
  const auto [lo, hi] = std::minmax_element(rough.begin(), rough.end());
  for (double te : {1e-4, 1e-2, 1.0}) {
    const auto r = neumann_resolvent(f.geom, f.mesh.triangles, rough, te);
    for (double x : r) {
      EXPECT_GE(x, *lo - 1e-14);
      EXPECT_LE(x, *hi + 1e-14);
    }
  }
  const auto zero = neumann_resolvent(f.geom, f.mesh.triangles, rough, 0.0);
  for (std::size_t i = 0; i < rough.size(); ++i) EXPECT_NEAR(zero[i], rough[i], 1e-14);
  std::vector<double> constant(rough.size(), 2.5);
  for (double x : neumann_resolvent(f.geom, f.mesh.triangles, constant, 0.5)) EXPECT_NEAR(x, 2.5, 1e-13);
}

TEST(Transport, MassIsExactlyCarriedToThePushedMesh) {
  const Field f = smooth_field();
  for (double tau : {1e-3, 1e-2}) {
    const auto rec = make_step(f, tau, 0.01);
    const double before = total_mass(f.geom.lumped, rec.rho_tilde);
    EXPECT_NEAR(total_mass(rec.lumped_next, rec.rho_next), before, 1e-14 * before);
    const auto factors = nodal_det_factors(f.geom.lumped, rec.lumped_next);
    for (std::size_t i = 0; i < factors.size(); ++i)
      EXPECT_NEAR(rec.rho_next[i] * factors[i], rec.rho_tilde[i], 1e-14);
  }
}

TEST(EpsDissipation, NonnegativeAndClosesTheConvexityInequality) {
  FluidParams fp;
  const Field f = smooth_field();
  for (double te : {1e-5, 1e-3, 1e-1}) {
    const auto rt = neumann_resolvent(f.geom, f.mesh.triangles, f.rho, te);
    const double d = eps_dissipation(fp, f.geom.lumped, f.rho, rt);
    EXPECT_GE(d, 0.0);
    const double u_rho = potential_energy(fp, f.geom.lumped, f.rho);
    const double u_rt = potential_energy(fp, f.geom.lumped, rt);
    EXPECT_LE(u_rt + d, u_rho * (1 + 1e-15));
    // Lumped mode: equals tau eps H'(rho~)^T K rho~, up to cancellation in rho - rho~.
    const auto Kr = stiffness_apply(f.geom, f.mesh.triangles, rt);
    double alt = 0.0;
    for (std::size_t i = 0; i < rt.size(); ++i) alt += potential_delta_prime(fp, rt[i]) * Kr[i];
    EXPECT_NEAR(d, te * alt, 1e-9 * d);
  }
}

TEST(Renormalization, LinearRenormalizerIsExact) {
  const Field f = smooth_field();
  const Renormalizer lin{[](double r) { return r; }, [](double) { return 1.0; }};
  const auto rec = make_step(f, 1e-3, 0.05);
  EXPECT_LE(renormalization_step_residual(rec, lin), 1e-10);
}

TEST(Renormalization, QuadraticResidualVanishesWithTheStep) {
  const Field f = smooth_field();
  const Renormalizer quad{[](double r) { return r * r; }, [](double r) { return 2 * r; }};
  double prev = 0.0;
  for (double tau : {4e-3, 2e-3, 1e-3, 5e-4}) {
    const double res = renormalization_step_residual(make_step(f, tau, 0.05), quad);
    if (prev > 0.0) {
      EXPECT_NEAR(prev / res, 2.0, 0.2) << "tau = " << tau;
    }
    prev = res;
  }
}

TEST(MinMax, CertificateEnvelope) {
  std::vector<MinMaxSample> s{{0.1, 0.9, 1.1, 0.5}, {0.1, 0.85, 1.2, 0.5}};
  const auto ok = minmax_certificate(0.9, 1.1, s, 0.0);
  EXPECT_NEAR(ok.integrated_div, 0.1, 1e-15);
  EXPECT_NEAR(ok.upper_bound, 1.1 * std::exp(0.1), 1e-14);
  EXPECT_FALSE(ok.violated);
  EXPECT_LE(ok.slack, 1.0);

  std::vector<MinMaxSample> bad{{0.1, 0.9, 1.5, 0.1}};  // 1.5 > 1.1 e^{0.01}
  const auto r = minmax_certificate(0.9, 1.1, bad, 0.05);
  EXPECT_TRUE(r.violated);
  EXPECT_NEAR(r.slack, 1.5 / (1.1 * std::exp(0.01)), 1e-14);
  EXPECT_FALSE(minmax_certificate(0.9, 1.1, bad, 0.5).violated);
  std::vector<MinMaxSample> neg{{0.1, -0.1, 1.0, 0.1}};
  EXPECT_TRUE(minmax_certificate(0.9, 1.1, neg, 10.0).violated);
}

TEST(Transport, CollapsingNodeIsRejected) {
  const Field f = smooth_field();
  std::vector<double> bad_lumped = f.geom.lumped;
  bad_lumped[0] = -1.0;
  EXPECT_THROW(transport_density(f.rho, f.geom.lumped, bad_lumped), std::exception);
}
