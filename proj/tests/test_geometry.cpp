#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "test_support.hpp"
#include "varimove/errors.hpp"
#include "varimove/geometry.hpp"

using namespace varimove;
using namespace varimove::oracles;

namespace {

ReferenceSolidMesh square_at(double x0, double y0, double s) {
  TextMesh t;
  t.nodes = {{x0, y0}, {x0 + s, y0}, {x0 + s, y0 + s}, {x0, y0 + s}};
  t.elements = {{0, 1, 2}, {0, 2, 3}};
  t.boundary = {{0, 1, BoundaryTag::M}, {1, 2, BoundaryTag::M}, {2, 3, BoundaryTag::M}, {3, 0, BoundaryTag::M}};
  return solid_from_text(t);
}

Container unit_box() { return Container{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}; }

}  // namespace

TEST(Areas, ContainerSplitsIntoSolidAndFluid) {
  FluidMesh fluid;
  Container box;
  ReferenceSolidMesh solid;
  build_tethered_disk(varimove::testing::small_grid(20), solid, fluid, box);
  double fluid_area = 0.0;
  for (const auto& t : fluid.triangles) fluid_area += shoelace({fluid.nodes[t[0]], fluid.nodes[t[1]], fluid.nodes[t[2]]});
  EXPECT_NEAR(box.area(), shoelace(box.polygon), 1e-15);
  EXPECT_NEAR(fluid_area + solid.area(), box.area(), 1e-13);
}

TEST(PushForward, DetFactorsAreAreaRatios) {
  FluidMesh fluid;
  Container box;
  ReferenceSolidMesh solid;
  build_tethered_disk(varimove::testing::small_grid(10), solid, fluid, box);
  std::mt19937 rng(3);
  const auto v = varimove::testing::random_field(fluid.num_nodes(), 1.0, rng);
  const double tau = 0.01;
  const auto r = push_forward_fluid_mesh(fluid, v, tau);
  for (std::size_t e = 0; e < fluid.triangles.size(); ++e) {
    const auto& t = fluid.triangles[e];
    const double before = shoelace({fluid.nodes[t[0]], fluid.nodes[t[1]], fluid.nodes[t[2]]});
    const double after = shoelace({r.mesh.nodes[t[0]], r.mesh.nodes[t[1]], r.mesh.nodes[t[2]]});
    EXPECT_NEAR(r.det_factors[e], after / before, 1e-13);
    // Closed form: det(I + tau L) = 1 + tau tr L + tau^2 det L for the elementwise gradient L.
    const Vec2 e1 = fluid.nodes[t[1]] - fluid.nodes[t[0]], e2 = fluid.nodes[t[2]] - fluid.nodes[t[0]];
    Mat2 X, V;
    X << e1.x(), e2.x(), e1.y(), e2.y();
    const Vec2 d1 = v[t[1]] - v[t[0]], d2 = v[t[2]] - v[t[0]];
    V << d1.x(), d2.x(), d1.y(), d2.y();
    const Mat2 L = V * X.inverse();
    EXPECT_NEAR(r.det_factors[e], 1 + tau * L.trace() + tau * tau * L.determinant(), 1e-12);
  }
}

TEST(PushForward, CollapsedTriangleIsReported) {
  FluidMesh fluid;
  Container box;
  ReferenceSolidMesh solid;
  build_tethered_disk(varimove::testing::small_grid(10), solid, fluid, box);
  std::vector<Vec2> v(fluid.num_nodes(), Vec2::Zero());
  const auto& t = fluid.triangles[0];
  v[t[0]] = 100.0 * (fluid.nodes[t[1]] - fluid.nodes[t[0]]);  // node 0 slides onto node 1 at tau = 0.01
  try {
    push_forward_fluid_mesh(fluid, v, 0.01);
    FAIL() << "expected NonPositiveJacobian";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonPositiveJacobian);
  }
}

TEST(FlowMap, RunningDeterminantMatchesDirectRecomputation) {
  FluidMesh fluid;
  Container box;
  ReferenceSolidMesh solid;
  build_tethered_disk(varimove::testing::small_grid(10), solid, fluid, box);
  FlowMapLedger ledger(fluid, 1e-3, 1e3);
  std::mt19937 rng(8);
  FluidMesh current = fluid;
  for (int k = 0; k < 25; ++k) {
    const auto v = varimove::testing::random_field(current.num_nodes(), 0.5, rng);
    const auto step = push_forward_fluid_mesh(current, v, 0.01);
    ledger.compose(step);
    current = step.mesh;
    const auto direct = ledger.direct_det();
    for (std::size_t e = 0; e < direct.size(); ++e) EXPECT_NEAR(ledger.running_det()[e], direct[e], 1e-12);
  }
  EXPECT_EQ(ledger.step(), 25);
  ledger.anchor();
  EXPECT_EQ(ledger.step(), 0);
  for (double d : ledger.direct_det()) EXPECT_NEAR(d, 1.0, 1e-15);
}

TEST(FlowMap, DeterminantBoundIsEnforced) {
  FluidMesh fluid;
  Container box;
  ReferenceSolidMesh solid;
  build_tethered_disk(varimove::testing::small_grid(10), solid, fluid, box);
  FlowMapLedger ledger(fluid, 0.9, 1.1);
  std::vector<Vec2> v(fluid.num_nodes());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fluid.nodes[i] - Vec2(0.5, 0.5);  // div v = 2
  const auto step = push_forward_fluid_mesh(fluid, v, 0.1);                          // det = 1.21
  EXPECT_THROW(ledger.compose(step), Error);
}

TEST(Injectivity, CiarletNecasDefectMatchesClippingOracleWhenFolded) {
  const ReferenceSolidMesh m = strip(3);
  std::vector<Vec2> eta = m.nodes;
  // Fold the last square back over the middle one across the line x = 2.
  for (auto& p : eta)
    if (p.x() > 2.5) p.x() = 4.0 - p.x() - 0.3;
  EXPECT_LT(min_det(m, eta), 0.0);
  EXPECT_FALSE(boundary_image_is_simple(m, eta));
  double integral = 0.0;
  for (const auto& t : m.elements) integral += signed_area(eta[t[0]], eta[t[1]], eta[t[2]]);
  const double oracle = std::abs(union_area_oracle(m, eta) - integral);
  EXPECT_GT(oracle, 0.1);
  EXPECT_NEAR(ciarlet_necas_defect(m, eta), oracle, 1e-10);
}

TEST(Injectivity, CiarletNecasDefectMatchesOracleOnRandomTangles) {
  const ReferenceSolidMesh m = strip(4);  // 8 triangles, 255 intersection terms
  std::mt19937 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto eta = varimove::testing::jitter(m.nodes, 0.8, rng);
    double integral = 0.0;
    for (const auto& t : m.elements) integral += signed_area(eta[t[0]], eta[t[1]], eta[t[2]]);
    EXPECT_NEAR(ciarlet_necas_defect(m, eta), std::abs(union_area_oracle(m, eta) - integral), 1e-10)
        << "trial " << trial;
  }
}

TEST(Injectivity, SmoothDeformationHasNoDefect) {
  FluidMesh fluid;
  Container box;
  ReferenceSolidMesh solid;
  build_tethered_disk(varimove::testing::small_grid(16), solid, fluid, box);
  std::vector<Vec2> eta = solid.nodes;
  for (auto& p : eta) p += 0.05 * Vec2(std::sin(3 * p.y()), std::cos(2 * p.x()));
  EXPECT_GT(min_det(solid, eta), 0.0);
  EXPECT_TRUE(boundary_image_is_simple(solid, eta));
  EXPECT_LE(ciarlet_necas_defect(solid, eta), 1e-12);
}

TEST(Collision, RigidTranslationReducesWallDistanceByItsLength) {
  const ReferenceSolidMesh sq = square_at(0.4, 0.4, 0.2);
  const Container box = unit_box();
  EXPECT_NEAR(collision_distance(sq, sq.nodes, box, 1.0), 0.4, 1e-15);
  for (double d : {0.05, 0.1, 0.25}) {
    std::vector<Vec2> eta = sq.nodes;
    for (auto& p : eta) p += Vec2(d, 0.0);
    EXPECT_NEAR(collision_distance(sq, eta, box, 1.0), 0.4 - d, 1e-15);
  }
  std::vector<Vec2> hit = sq.nodes;
  for (auto& p : hit) p += Vec2(0.45, 0.0);  // crosses x = 1
  EXPECT_EQ(collision_distance(sq, hit, box, 1.0), 0.0);
}

TEST(Collision, MirrorSymmetric) {
  FluidMesh fluid;
  Container box;
  ReferenceSolidMesh solid;
  build_tethered_disk(varimove::testing::small_grid(16), solid, fluid, box);
  std::mt19937 rng(2);
  const auto eta = varimove::testing::jitter(solid.nodes, 0.01, rng);
  std::vector<Vec2> mirrored = eta;
  for (auto& p : mirrored) p.x() = 1.0 - p.x();
  const double gap = 0.25;
  EXPECT_NEAR(collision_distance(solid, eta, box, gap), collision_distance(solid, mirrored, box, gap), 1e-15);
}

TEST(Collision, SelfContactRespectsReferenceGap) {
  const ReferenceSolidMesh sq = square_at(0.4, 0.4, 0.2);
  const Container box = unit_box();
  // Opposite sides are 0.2 apart in the reference; a gap below that pairs them.
  EXPECT_NEAR(collision_distance(sq, sq.nodes, box, 0.1), 0.2, 1e-15);
  std::vector<Vec2> squeezed = sq.nodes;
  squeezed[1].x() -= 0.15;
  squeezed[2].x() -= 0.15;
  EXPECT_NEAR(collision_distance(sq, squeezed, box, 0.1), 0.05, 1e-15);
}

TEST(Collision, EdgesNearTheClampIgnoreTheWall) {
  const ReferenceSolidMesh m = strip(3);  // P = bottom edge of the first square
  std::vector<Vec2> eta = m.nodes;
  const Container wide{{{-1, 0}, {5, 0}, {5, 5}, {-1, 5}}};
  // The M edges touching P lie on the wall y = 0; with a gap of 1.5 only the far bottom edge counts.
  EXPECT_EQ(collision_distance(m, eta, wide, 0.0), 0.0);
  for (auto& p : eta) p.y() += 0.0;
  const double d = collision_distance(m, eta, wide, 1.5);
  EXPECT_EQ(d, 0.0);  // bottom edges of squares 2 and 3 still lie on y = 0
  for (auto& p : eta)
    if (p.x() > 1.5 && p.y() < 0.5) p.y() = 0.2;
  EXPECT_NEAR(collision_distance(m, eta, wide, 1.5), 0.2, 1e-15);
}
