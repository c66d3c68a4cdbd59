#include "helpers.hpp"

#include "isospec/errors.hpp"
#include "isospec/mesh.hpp"
#include "isospec/shapes.hpp"

#include <doctest.h>

#include <fstream>

using namespace isospec;

TEST_SUITE("mesh") {
  TEST_CASE("single triangle has three boundary edges") {
    const auto dir = testing::temp_dir("tri");
    testing::write_text(dir / "tri.off", "OFF\n# one face\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
    const Mesh m = load_mesh(dir / "tri.off");
    CHECK(m.topology.n_boundary_edges() == 3);
    CHECK(m.topology.n_interior_edges() == 0);
    CHECK(m.dim() == 3);
  }

  TEST_CASE("tetrahedron is closed") {
    const auto dir = testing::temp_dir("tet");
    testing::write_text(dir / "tet.off",
                        "OFF\n4 4 6\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n");
    const Mesh m = load_mesh(dir / "tet.off");
    CHECK(m.topology.n_interior_edges() == 6);
    CHECK(m.topology.n_boundary_edges() == 0);
    CHECK(boundary_loops(m.topology).empty());
    CHECK(m.topology.euler_characteristic() == 2);
  }

  TEST_CASE("edge shared by three faces is rejected") {
    const auto dir = testing::temp_dir("nonmanifold");
    testing::write_text(dir / "fan.off",
                        "OFF\n5 3 0\n0 0 0\n1 0 0\n0 1 0\n0 -1 0\n0 0 1\n3 0 1 2\n3 1 0 3\n3 0 1 4\n");
    CHECK_THROWS_AS(load_mesh(dir / "fan.off"), MeshError);
  }

  TEST_CASE("polygon faces are rejected") {
    const auto dir = testing::temp_dir("quad");
    testing::write_text(dir / "quad.off", "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n");
    CHECK_THROWS_WITH_AS(load_mesh(dir / "quad.off"), doctest::Contains("triangles"), MeshError);
  }

  TEST_CASE("malformed files raise") {
    const auto dir = testing::temp_dir("bad");
    testing::write_text(dir / "bad.off", "OFF\n3 1 0\n0 0 0\n1 0\n");
    CHECK_THROWS_AS(load_mesh(dir / "bad.off"), MeshError);
    CHECK_THROWS(load_mesh(dir / "missing.off"));
    testing::write_text(dir / "range.off", "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n");
    CHECK_THROWS_AS(load_mesh(dir / "range.off"), MeshError);
  }

  TEST_CASE("obj reader accepts slash records and negative indices") {
    const auto dir = testing::temp_dir("obj");
    testing::write_text(dir / "a.obj", "# comment\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1/1/1 2/2/1 -1//1\n");
    const Mesh m = load_mesh(dir / "a.obj");
    CHECK(m.topology.n_triangles() == 1);
    CHECK(m.topology.triangles()[0] == Triangle{0, 1, 2});
  }

  TEST_CASE("save and load round trip") {
    const auto dir = testing::temp_dir("roundtrip");
    const Mesh tet = shapes::tetrahedron();
    for (const char* name : {"t.off", "t.obj"}) {
      save_mesh(dir / name, tet.topology, tet.vertices);
      const Mesh back = load_mesh(dir / name);
      CHECK(back.topology.triangles() == tet.topology.triangles());
      CHECK((back.vertices - tet.vertices).cwiseAbs().maxCoeff() < 1e-9);
    }
  }

  TEST_CASE("planar meshes reload as 2D under the flat option") {
    const auto dir = testing::temp_dir("flat");
    Mesh sq = shapes::unit_square_grid(2);
    sq.vertices(4, 0) = 1.0 / 3.0;
    save_mesh(dir / "sq.off", sq.topology, sq.vertices);
    LoadOptions flat;
    flat.flat = true;
    const Mesh back = load_mesh(dir / "sq.off", flat);
    CHECK(back.dim() == 2);
    CHECK(std::abs(back.vertices(4, 0) - 1.0 / 3.0) < 1e-8);
    CHECK(load_mesh(dir / "sq.off").dim() == 3);
  }

  TEST_CASE("flat option rejects a nonzero z column") {
    const auto dir = testing::temp_dir("notflat");
    testing::write_text(dir / "t.off", "OFF\n3 1 0\n0 0 0\n1 0 0.5\n0 1 0\n3 0 1 2\n");
    LoadOptions flat;
    flat.flat = true;
    CHECK_THROWS_AS(load_mesh(dir / "t.off", flat), MeshError);
  }

  TEST_CASE("flat load orients triangles counter-clockwise") {
    const auto dir = testing::temp_dir("cw");
    testing::write_text(dir / "cw.off", "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 2 1\n");
    LoadOptions flat;
    flat.flat = true;
    const Mesh m = load_mesh(dir / "cw.off", flat);
    const auto& t = m.topology.triangles()[0];
    const Eigen::Vector2d a = m.vertices.row(t[0]), b = m.vertices.row(t[1]), c = m.vertices.row(t[2]);
    CHECK((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x() > 0.0);
  }

  TEST_CASE("boundary loop counts") {
    CHECK(boundary_loops(shapes::ellipse_mesh(1.0, 1.0, 120).topology).size() == 1);
    CHECK(boundary_loops(shapes::annulus(0.4, 1.0, 200).topology).size() == 2);
    CHECK(boundary_loops(shapes::cube_sphere(3).topology).empty());
  }

  TEST_CASE("boundary loops cover the boundary edges and follow the triangles") {
    const Mesh ring = shapes::annulus(0.4, 1.0, 200);
    const auto loops = boundary_loops(ring.topology);
    std::size_t total = 0;
    for (const auto& loop : loops) {
      total += loop.size();
      for (std::size_t i = 0; i < loop.size(); ++i) {
        const int a = loop[i], b = loop[(i + 1) % loop.size()];
        const int e = ring.topology.find_edge(a, b);
        REQUIRE(e >= 0);
        CHECK(ring.topology.edges()[e].is_boundary());
        // The loop direction agrees with the directed edge of its triangle.
        const auto& t = ring.topology.triangles()[ring.topology.edges()[e].faces[0]];
        bool forward = false;
        for (int c = 0; c < 3; ++c) forward = forward || (t[c] == a && t[(c + 1) % 3] == b);
        CHECK(forward);
      }
    }
    CHECK(total == static_cast<std::size_t>(ring.topology.n_boundary_edges()));
  }

  TEST_CASE("euler characteristic of known fixtures") {
    CHECK(shapes::cube_sphere(4).topology.euler_characteristic() == 2);
    CHECK(shapes::unit_square_grid(5).topology.euler_characteristic() == 1);
    CHECK(shapes::annulus(0.4, 1.0, 200).topology.euler_characteristic() == 0);
  }

  TEST_CASE("validate reports") {
    const Mesh tet = shapes::tetrahedron();
    const ValidationReport r = validate(tet.topology, tet.vertices);
    CHECK(r.is_manifold);
    CHECK(r.is_connected);
    CHECK(r.orientation_consistent);
    CHECK_FALSE(r.has_degenerate_triangles);
    CHECK(r.boundary_loop_count == 0);

    Eigen::MatrixXd V(6, 3);
    V << 0, 0, 0, 1, 0, 0, 0, 1, 0, 5, 0, 0, 6, 0, 0, 5, 1, 0;
    const ValidationReport two = validate(6, {{0, 1, 2}, {3, 4, 5}}, V);
    CHECK_FALSE(two.is_connected);
    CHECK(two.boundary_loop_count == 2);

    const ValidationReport repeated = validate(3, {{0, 1, 1}}, V.topRows(3));
    CHECK(repeated.has_degenerate_triangles);

    Eigen::MatrixXd Q(4, 3);
    Q << 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0;
    const ValidationReport flipped = validate(4, {{0, 1, 2}, {0, 3, 2}}, Q);
    CHECK_FALSE(flipped.orientation_consistent);

    Eigen::MatrixXd P(5, 3);
    P << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 1;
    CHECK_FALSE(validate(5, {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}}, P).is_manifold);
  }
}
