#include <cmath>
#include <set>

#include "mdn/mesh.hpp"
#include "mdn/mesh_io.hpp"
#include "mdn/shapes.hpp"
#include "support.hpp"

namespace mdn {
namespace {

using test::expect_error;

const char* kCubeOff =
    "OFF\n8 12 0\n"
    "0 0 0\n1 0 0\n1 1 0\n0 1 0\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n"
    "3 0 2 1\n3 0 3 2\n3 4 5 6\n3 4 6 7\n3 0 1 5\n3 0 5 4\n"
    "3 1 2 6\n3 1 6 5\n3 2 3 7\n3 2 7 6\n3 3 0 4\n3 3 4 7\n";

TEST(MeshIo, ObjSingleTriangle) {
  const Mesh m = load_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n", MeshFormat::Obj);
  EXPECT_EQ(m.vertex_count(), 3u);
  EXPECT_EQ(m.face_count(), 1u);
}

TEST(MeshIo, ObjSlashesNegativeIndicesAndComments) {
  const Mesh m = load_mesh("# c\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2/5/1 -1\n", MeshFormat::Obj);
  ASSERT_EQ(m.face_count(), 1u);
  EXPECT_EQ(m.face(0), (Face{0, 1, 2}));
}

TEST(MeshIo, ObjBadIndexIsParseError) {
  expect_error(ErrorKind::ParseError,
               [] { load_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 99\n", MeshFormat::Obj); });
}

TEST(MeshIo, ObjQuadIsNonTriangular) {
  expect_error(ErrorKind::NonTriangular,
               [] { load_mesh("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n", MeshFormat::Obj); });
}

TEST(MeshIo, GarbageIsParseError) {
  expect_error(ErrorKind::ParseError, [] { load_mesh("v 0 zero 0\n", MeshFormat::Obj); });
  expect_error(ErrorKind::ParseError, [] { load_mesh("PLY\n", MeshFormat::Off); });
  expect_error(ErrorKind::ParseError, [] { load_mesh("OFF\n3 1 0\n0 0 0\n1 0 0\n", MeshFormat::Off); });
}

TEST(MeshIo, OffCubeEdgeLength) {
  const Mesh m = load_mesh(kCubeOff, MeshFormat::Off);
  EXPECT_EQ(m.vertex_count(), 8u);
  EXPECT_EQ(m.face_count(), 12u);
  // Enumerated by hand: 12 unit sides and one sqrt(2) diagonal per square.
  const double expected = (12.0 + 6.0 * std::sqrt(2.0)) / 18.0;
  EXPECT_NEAR(average_edge_length(m), expected, 1e-15);
  EXPECT_NEAR(m.mean_edge_length(), expected, 1e-15);
}

TEST(MeshIo, SaveSingleTriangleObj) {
  const Mesh m = test::single_triangle({0, 0, 0}, {1, 0, 0}, {0, 1, 0});
  const std::string text = save_mesh(m, MeshFormat::Obj);
  int v = 0, f = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = text.find('\n', pos);
    const std::string line = text.substr(pos, end - pos);
    if (line.rfind("v ", 0) == 0) ++v;
    if (line.rfind("f ", 0) == 0) ++f;
    pos = end == std::string::npos ? text.size() : end + 1;
  }
  EXPECT_EQ(v, 3);
  EXPECT_EQ(f, 1);
}

TEST(MeshIo, RoundTripIsExact) {
  Rng rng(3);
  const Mesh base = test::transformed(shapes::cube(2), test::random_rotation(rng), {0.1, -2.0, 3.3}, 0.77);
  for (MeshFormat fmt : {MeshFormat::Obj, MeshFormat::Off}) {
    const Mesh back = load_mesh(save_mesh(base, fmt), fmt);
    EXPECT_EQ(back.faces(), base.faces());
    ASSERT_EQ(back.vertex_count(), base.vertex_count());
    for (std::size_t i = 0; i < base.vertex_count(); ++i) EXPECT_EQ(back.vertex(i), base.vertex(i));
  }
}

TEST(MeshIo, EmptyMeshRoundTrips) {
  const Mesh empty({Vec3(1, 2, 3)}, {});
  for (MeshFormat fmt : {MeshFormat::Obj, MeshFormat::Off}) {
    const std::string text = save_mesh(empty, fmt);
    EXPECT_EQ(text.find("\nf "), std::string::npos);
    const Mesh back = load_mesh(text, fmt);
    EXPECT_EQ(back.face_count(), 0u);
    EXPECT_EQ(back.vertex_count(), 1u);
  }
}

TEST(MeshIo, FormatFromPath) {
  EXPECT_EQ(format_from_path("a/b.OBJ"), MeshFormat::Obj);
  EXPECT_EQ(format_from_path("x.off"), MeshFormat::Off);
  expect_error(ErrorKind::InvalidArgument, [] { format_from_path("x.ply"); });
}

TEST(Geometry, Centroid) {
  const Mesh m = test::single_triangle({0, 0, 0}, {1, 0, 0}, {0, 1, 0});
  EXPECT_TRUE(face_centroid(m, 0).isApprox(Vec3(1.0 / 3, 1.0 / 3, 0)));
  const Mesh same = test::single_triangle({1, 1, 1}, {1, 1, 1}, {1, 1, 1});
  EXPECT_EQ(face_centroid(same, 0), Vec3(1, 1, 1));
  const double s = std::sqrt(3.0) / 2;
  const Mesh eq = test::single_triangle({1, 0, 0}, {-0.5, s, 0}, {-0.5, -s, 0});
  EXPECT_LT(face_centroid(eq, 0).norm(), 1e-15);
}

TEST(Geometry, NormalWindingAndDegenerate) {
  const Mesh m = test::single_triangle({0, 0, 0}, {1, 0, 0}, {0, 1, 0});
  EXPECT_EQ(face_normal(m, 0), Vec3(0, 0, 1));
  const Mesh flipped = test::single_triangle({0, 0, 0}, {0, 1, 0}, {1, 0, 0});
  EXPECT_EQ(face_normal(flipped, 0), Vec3(0, 0, -1));
  const Mesh line = test::single_triangle({0, 0, 0}, {1, 1, 1}, {2, 2, 2});
  EXPECT_TRUE(line.is_degenerate(0));
  expect_error(ErrorKind::DegenerateFace, [&] { face_normal(line, 0); });
  EXPECT_EQ(face_area(line, 0), 0.0);
}

TEST(Geometry, AreaScaling) {
  const Mesh m = test::single_triangle({0, 0, 0}, {1, 0, 0}, {0, 1, 0});
  EXPECT_DOUBLE_EQ(face_area(m, 0), 0.5);
  const Mesh big = test::transformed(m, Eigen::Matrix3d::Identity(), Vec3::Zero(), 2.0);
  EXPECT_DOUBLE_EQ(face_area(big, 0), 2.0);
}

TEST(Geometry, VertexNormals) {
  const Mesh grid = shapes::grid(4, 4);
  EXPECT_TRUE(vertex_normal(grid, 12).isApprox(Vec3(0, 0, 1)));  // interior vertex (2,2)

  // Corner of the positive octant: three unit right triangles facing outward.
  const Mesh corner({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}},
                    {Face{0, 2, 1}, Face{0, 1, 3}, Face{0, 3, 2}});
  EXPECT_TRUE(vertex_normal(corner, 0).isApprox(-Vec3(1, 1, 1).normalized(), 1e-14));

  const Mesh isolated({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {5, 5, 5}}, {Face{0, 1, 2}});
  expect_error(ErrorKind::IsolatedVertex, [&] { vertex_normal(isolated, 3); });
}

TEST(Geometry, AverageEdgeLength) {
  const Mesh m = test::single_triangle({0, 0, 0}, {1, 0, 0}, {0, 1, 0});
  EXPECT_NEAR(average_edge_length(m), (2.0 + std::sqrt(2.0)) / 3.0, 1e-15);
  const Mesh scaled = test::transformed(m, Eigen::Matrix3d::Identity(), Vec3::Zero(), 3.5);
  EXPECT_NEAR(average_edge_length(scaled), 3.5 * average_edge_length(m), 1e-14);
  const Mesh cube = shapes::cube(1);
  EXPECT_NEAR(average_edge_length(cube), (12.0 + 6.0 * std::sqrt(2.0)) / 18.0, 1e-15);
  expect_error(ErrorKind::NoEdges, [] { average_edge_length(Mesh({Vec3::Zero()}, {})); });
}

TEST(Geometry, ConstructorRejectsBadFaces) {
  expect_error(ErrorKind::ParseError, [] { Mesh({{0, 0, 0}, {1, 0, 0}}, {Face{0, 1, 2}}); });
  expect_error(ErrorKind::ParseError, [] { Mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {Face{0, 1, 1}}); });
  expect_error(ErrorKind::ParseError, [] { Mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {Face{0, 1, -1}}); });
}

TEST(Geometry, NormalsPerpendicularToEdges) {
  for (const Mesh& m : {shapes::icosphere(2), shapes::torus(12, 8), shapes::cylinder(10, 3), shapes::cube(3)}) {
    for (std::size_t f = 0; f < m.face_count(); ++f) {
      const Face& t = m.face(f);
      const Vec3 n = m.face_normals()[f];
      EXPECT_NEAR(n.dot(m.vertex(t[1]) - m.vertex(t[0])), 0.0, 1e-9);
      EXPECT_NEAR(n.dot(m.vertex(t[2]) - m.vertex(t[0])), 0.0, 1e-9);
    }
  }
}

TEST(Geometry, RigidMotionEquivariance) {
  Rng rng(11);
  const Mesh m = shapes::torus(16, 8);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Matrix3d r = test::random_rotation(rng);
    const Mesh moved = test::transformed(m, r, Vec3(rng.normal(), rng.normal(), rng.normal()));
    for (std::size_t f = 0; f < m.face_count(); ++f) {
      EXPECT_LT((moved.face_normals()[f] - r * m.face_normals()[f]).norm(), 1e-9);
      EXPECT_NEAR(moved.face_areas()[f], m.face_areas()[f], 1e-12);
    }
    EXPECT_NEAR(moved.mean_edge_length(), m.mean_edge_length(), 1e-12);
  }
}

TEST(Shapes, FaceCountsAndOutwardNormals) {
  struct Case {
    Mesh mesh;
    std::size_t faces;
  };
  const std::vector<Case> cases{{shapes::icosphere(3), 1280},
                                {shapes::uv_sphere(6, 10), 2u * 10 * 5},
                                {shapes::cube(3), 12u * 9},
                                {shapes::cylinder(12, 4), 2u * 12 * 5},
                                {shapes::torus(20, 10), 2u * 20 * 10}};
  for (const auto& c : cases) {
    EXPECT_EQ(c.mesh.face_count(), c.faces);
    // Closed, outward-oriented surfaces enclose a positive volume.
    double volume = 0.0;
    for (const Face& f : c.mesh.faces()) {
      volume += c.mesh.vertex(f[0]).dot(c.mesh.vertex(f[1]).cross(c.mesh.vertex(f[2]))) / 6.0;
    }
    EXPECT_GT(volume, 0.0);
  }
  EXPECT_EQ(shapes::grid(3, 2).face_count(), 2u * 3 * 2);
}

TEST(Adjacency, SharedEdgeAndDisconnected) {
  const Mesh pair({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}}, {Face{0, 1, 2}, Face{1, 3, 2}});
  const Adjacency a = build_adjacency(pair);
  ASSERT_EQ(a.face_to_faces[0].size(), 1u);
  EXPECT_EQ(a.face_to_faces[0][0], 1);
  EXPECT_EQ(a.face_to_faces[1][0], 0);

  const Mesh apart({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {5, 0, 0}, {6, 0, 0}, {5, 1, 0}},
                   {Face{0, 1, 2}, Face{3, 4, 5}});
  const Adjacency b = build_adjacency(apart);
  EXPECT_TRUE(b.face_to_faces[0].empty());
  EXPECT_TRUE(b.face_to_faces[1].empty());
}

TEST(Adjacency, FanCentre) {
  const Adjacency a = build_adjacency(test::flat_fan(6));
  EXPECT_EQ(a.vertex_to_faces[0].size(), 6u);
  EXPECT_EQ(a.vertex_to_vertices[0].size(), 6u);
  for (std::size_t f = 0; f < 6; ++f) EXPECT_EQ(a.face_to_faces[f].size(), 5u);
}

TEST(Adjacency, SymmetricSortedUnique) {
  for (const Mesh& m : {shapes::icosphere(3), shapes::torus(24, 12), shapes::cube(4)}) {
    const Adjacency a = build_adjacency(m);
    auto check_rows = [](const IndexLists& rows) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto row = rows[i];
        for (std::size_t k = 1; k < row.size(); ++k) ASSERT_LT(row[k - 1], row[k]);
      }
    };
    check_rows(a.vertex_to_faces);
    check_rows(a.vertex_to_vertices);
    check_rows(a.face_to_faces);
    for (std::size_t f = 0; f < m.face_count(); ++f) {
      for (std::int32_t v : m.face(f)) {
        const auto row = a.vertex_to_faces[static_cast<std::size_t>(v)];
        EXPECT_TRUE(std::binary_search(row.begin(), row.end(), static_cast<std::int32_t>(f)));
      }
      for (std::int32_t g : a.face_to_faces[f]) {
        EXPECT_NE(g, static_cast<std::int32_t>(f));
        const auto back = a.face_to_faces[static_cast<std::size_t>(g)];
        EXPECT_TRUE(std::binary_search(back.begin(), back.end(), static_cast<std::int32_t>(f)));
        std::set<std::int32_t> shared(m.face(f).begin(), m.face(f).end());
        bool any = false;
        for (std::int32_t v : m.face(static_cast<std::size_t>(g))) any = any || shared.count(v) > 0;
        EXPECT_TRUE(any);
      }
    }
    for (std::size_t v = 0; v < m.vertex_count(); ++v) {
      for (std::int32_t w : a.vertex_to_vertices[v]) {
        const auto back = a.vertex_to_vertices[static_cast<std::size_t>(w)];
        EXPECT_TRUE(std::binary_search(back.begin(), back.end(), static_cast<std::int32_t>(v)));
      }
    }
  }
}

}  // namespace
}  // namespace mdn
