#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "test_support.hpp"
#include "varimove/errors.hpp"
#include "varimove/mesh.hpp"

using namespace varimove;

namespace {

const char* kSquare = R"(# unit square, clamped along the bottom
0 0 0
1 1 0
2 1 1
3 0 1
0 0 1 2
1 0 2 3
0 1 P
1 2 M
2 3 M
3 0 M
)";

ErrorKind kind_of(const std::string& text) {
  std::istringstream in(text);
  try {
    solid_from_text(read_text_mesh(in)).validate();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Io;  // sentinel: no error
}

}  // namespace

TEST(TextMesh, ParsesNodesElementsAndTags) {
  std::istringstream in(kSquare);
  const TextMesh m = read_text_mesh(in);
  ASSERT_EQ(m.nodes.size(), 4u);
  ASSERT_EQ(m.elements.size(), 2u);
  ASSERT_EQ(m.boundary.size(), 4u);
  EXPECT_EQ(m.boundary[0].tag, BoundaryTag::P);
  const ReferenceSolidMesh s = solid_from_text(m);
  EXPECT_NO_THROW(s.validate());
  EXPECT_DOUBLE_EQ(s.area(), 1.0);
  EXPECT_TRUE(s.is_dirichlet[0] && s.is_dirichlet[1]);
  EXPECT_FALSE(s.is_dirichlet[2] || s.is_dirichlet[3]);
  EXPECT_EQ(s.interface_nodes().size(), 4u);  // every node touches an M edge
}

TEST(TextMesh, RoundTripIsExact) {
  FluidMesh fluid;
  Container box;
  ReferenceSolidMesh solid;
  build_tethered_disk(varimove::testing::small_grid(12), solid, fluid, box);
  std::stringstream buf;
  write_text_mesh(buf, to_text(solid));
  const ReferenceSolidMesh back = solid_from_text(read_text_mesh(buf));
  ASSERT_EQ(back.nodes.size(), solid.nodes.size());
  for (std::size_t i = 0; i < solid.nodes.size(); ++i) EXPECT_EQ(back.nodes[i], solid.nodes[i]);
  EXPECT_EQ(back.elements, solid.elements);

  std::stringstream fbuf;
  write_text_mesh(fbuf, to_text(fluid, solid));
  const FluidMesh fback = fluid_from_text(read_text_mesh(fbuf), solid);
  EXPECT_EQ(fback.triangles, fluid.triangles);
  EXPECT_EQ(fback.interface_node_map, fluid.interface_node_map);
  EXPECT_EQ(fback.on_outer_boundary, fluid.on_outer_boundary);
}

TEST(TextMesh, MalformedInputIsRejected) {
  EXPECT_EQ(kind_of("0 0 0\n2 1 0\n"), ErrorKind::MeshFormat);               // sparse node ids
  EXPECT_EQ(kind_of("0 0 0\n1 1 0\n2 0 1\n0 0 1 7\n0 1 P\n"), ErrorKind::MeshFormat);  // missing node
  EXPECT_EQ(kind_of("0 0 0\n1 1 0\n2 0 1\n0 0 2 1\n"), ErrorKind::MeshFormat);  // clockwise
  EXPECT_EQ(kind_of("0 0 0\n1 1 0\n2 0 1\n0 0 1 2\n0 1 M\n1 2 M\n2 0 M\n"), ErrorKind::MeshFormat);  // P empty
  EXPECT_EQ(kind_of("0 0 0\n1 1 0\n2 0 1\n0 0 1 2\n0 1 P\n1 2 M\n"), ErrorKind::MeshFormat);  // untagged edge
  EXPECT_EQ(kind_of("0 0 0\n1 1 0\n2 0 1\n0 0 1 2\n0 1 P\n1 2 X\n2 0 M\n"), ErrorKind::MeshFormat);
  EXPECT_EQ(kind_of("0 0 0\n1 1 0\n2 0 1\n0 0 1 2\n0 1 P\n1 2 W\n2 0 M\n"), ErrorKind::MeshFormat);
  EXPECT_EQ(kind_of("0 0 0 0 0 0\n"), ErrorKind::MeshFormat);
  EXPECT_EQ(kind_of(kSquare), ErrorKind::Io);
}

TEST(TetheredDisk, SolidBoundaryIsAManifoldCurve) {
  for (int n : {10, 16, 20}) {
    FluidMesh fluid;
    Container box;
    ReferenceSolidMesh solid;
    build_tethered_disk(varimove::testing::small_grid(n), solid, fluid, box);
    std::map<int, int> degree;
    for (const auto& be : solid.boundary) {
      ++degree[be.a];
      ++degree[be.b];
    }
    for (const auto& [node, d] : degree) EXPECT_EQ(d, 2) << "n = " << n << ", node " << node;
    // P lies on the lid of the container.
    for (const auto& be : solid.boundary)
      if (be.tag == BoundaryTag::P) {
        EXPECT_TRUE(box.on_boundary(solid.nodes[be.a]));
        EXPECT_TRUE(box.on_boundary(solid.nodes[be.b]));
      }
  }
}

TEST(TetheredDisk, FluidInterfaceMatchesSolidNodes) {
  FluidMesh fluid;
  Container box;
  ReferenceSolidMesh solid;
  build_tethered_disk(varimove::testing::small_grid(20), solid, fluid, box);
  EXPECT_NO_THROW(fluid.validate(box, solid.nodes));
  const auto iface = solid.interface_nodes();
  int mapped = 0;
  for (std::size_t i = 0; i < fluid.num_nodes(); ++i) {
    if (!fluid.is_interface(static_cast<int>(i))) continue;
    ++mapped;
    const int s = fluid.interface_node_map[i];
    EXPECT_EQ(fluid.nodes[i], solid.nodes[s]);
    EXPECT_FALSE(solid.is_dirichlet[s]) << "clamped nodes are wall nodes of the fluid";
  }
  EXPECT_GT(mapped, 0);
  EXPECT_LE(mapped, static_cast<int>(iface.size()));
  EXPECT_GT(fluid.min_angle(), 0.7);  // right isosceles triangles: 45 degrees
  EXPECT_NEAR(fluid.min_angle(), 0.25 * 3.14159265358979, 1e-9);
}

TEST(TetheredDisk, FluidMovedOffTheInterfaceFailsValidation) {
  FluidMesh fluid;
  Container box;
  ReferenceSolidMesh solid;
  build_tethered_disk(varimove::testing::small_grid(10), solid, fluid, box);
  std::vector<Vec2> eta = solid.nodes;
  for (std::size_t i = 0; i < fluid.num_nodes(); ++i)
    if (fluid.is_interface(static_cast<int>(i))) {
      eta[fluid.interface_node_map[i]] += Vec2(1e-3, 0);
      break;
    }
  EXPECT_THROW(fluid.validate(box, eta), Error);
}
