#include "helpers.hpp"

#include "isospec/errors.hpp"
#include "isospec/flatremesh.hpp"
#include "isospec/mesh.hpp"
#include "isospec/operators.hpp"
#include "isospec/shapes.hpp"

#include <doctest.h>

#include <numbers>

using namespace isospec;

namespace {

void check_ccw_and_area(const RetriangulationResult& r, double expected_area) {
  const auto areas = signed_triangle_areas(r.vertices, r.topology);
  double total = 0.0;
  for (double a : areas) {
    CHECK(a > 0.0);
    total += a;
  }
  CHECK(total == doctest::Approx(expected_area).epsilon(1e-9));
}

Loop2d square_loop(int per_side) {
  Loop2d loop;
  for (int s = 0; s < 4; ++s) {
    for (int i = 0; i < per_side; ++i) {
      const double t = static_cast<double>(i) / per_side;
      const Eigen::Vector2d p[] = {{t, 0.0}, {1.0, t}, {1.0 - t, 1.0}, {0.0, 1.0 - t}};
      loop.push_back(p[s]);
    }
  }
  return loop;
}

}  // namespace

TEST_SUITE("flatremesh") {
  TEST_CASE("relaxation fixes a uniform grid") {
    const Mesh grid = shapes::unit_square_grid(6);
    // The regular grid has a diagonal per cell, so interior vertices are already at their
    // neighbor average.
    const VertexMatrix out = relax_interior(grid.topology, grid.vertices, 20);
    CHECK((out - grid.vertices).cwiseAbs().maxCoeff() < 1e-14);
  }

  TEST_CASE("single interior vertex moves to the barycenter of its ring") {
    Eigen::MatrixXd V(5, 2);
    V << 0, 0, 2, 0, 2, 2, 0, 2, 0.3, 1.6;
    const MeshTopology topo(5, {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}});
    const VertexMatrix out = relax_interior(topo, V, 1);
    CHECK(out(4, 0) == doctest::Approx(1.0));
    CHECK(out(4, 1) == doctest::Approx(1.0));
    CHECK(out.topRows(4) == V.topRows(4));
  }

  TEST_CASE("relaxation does not increase the interior edge energy") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Mesh m = testing::random_planar_mesh(seed, 7, 0.45);
      double prev = interior_edge_energy(m.topology, m.vertices);
      VertexMatrix V = m.vertices;
      for (int sweep = 0; sweep < 10; ++sweep) {
        V = relax_interior(m.topology, V, 1);
        const double e = interior_edge_energy(m.topology, V);
        CHECK(e <= prev + 1e-14);
        prev = e;
      }
      for (int v = 0; v < m.topology.n_vertices(); ++v) {
        if (m.topology.is_boundary_vertex(v)) CHECK(V.row(v) == m.vertices.row(v));
      }
    }
  }

  TEST_CASE("convex polygon without interior points") {
    Loop2d hexagon;
    for (int i = 0; i < 6; ++i) {
      const double a = 2.0 * std::numbers::pi * i / 6.0;
      hexagon.emplace_back(std::cos(a), std::sin(a));
    }
    const RetriangulationResult r = retriangulate({hexagon}, 0, 1);
    CHECK(r.topology.n_vertices() == 6);
    CHECK(r.topology.n_triangles() == 4);
    check_ccw_and_area(r, loop_signed_area(hexagon));
  }

  TEST_CASE("unit square with interior points") {
    const Loop2d loop = square_loop(10);
    const RetriangulationResult r = retriangulate({loop}, 100, 7);
    const int interior = r.topology.n_vertices() - static_cast<int>(loop.size());
    CHECK(interior >= 90);
    CHECK(interior <= 110);
    check_ccw_and_area(r, 1.0);
    const ValidationReport report = validate(r.topology, r.vertices);
    CHECK(report.is_manifold);
    CHECK(report.is_connected);
    CHECK(report.boundary_loop_count == 1);
    CHECK(r.topology.n_boundary_edges() == static_cast<int>(loop.size()));
  }

  TEST_CASE("boundary vertices keep their order and exact coordinates") {
    Loop2d loop = shapes::star_loop(60, 0.3);
    const RetriangulationResult r = retriangulate({loop}, 150, 3);
    for (std::size_t i = 0; i < loop.size(); ++i) {
      CHECK(r.boundary_map[i] == static_cast<int>(i));
      CHECK(r.vertices(static_cast<Eigen::Index>(i), 0) == loop[i].x());
      CHECK(r.vertices(static_cast<Eigen::Index>(i), 1) == loop[i].y());
    }
    for (std::size_t i = 0; i < loop.size(); ++i) {
      CHECK(r.topology.find_edge(static_cast<int>(i), static_cast<int>((i + 1) % loop.size())) >= 0);
    }
    check_ccw_and_area(r, std::abs(loop_signed_area(loop)));
  }

  TEST_CASE("annulus keeps its topology") {
    Loop2d outer, inner;
    for (int i = 0; i < 60; ++i) {
      const double a = 2.0 * std::numbers::pi * i / 60.0;
      outer.emplace_back(std::cos(a), std::sin(a));
    }
    for (int i = 0; i < 24; ++i) {
      const double a = 2.0 * std::numbers::pi * i / 24.0;
      inner.emplace_back(0.4 * std::cos(a), 0.4 * std::sin(a));
    }
    const RetriangulationResult r = retriangulate({outer, inner}, 200, 5);
    CHECK(boundary_loops(r.topology).size() == 2);
    CHECK(r.topology.euler_characteristic() == 0);
    const double area = std::abs(loop_signed_area(outer)) - std::abs(loop_signed_area(inner));
    check_ccw_and_area(r, area);
    const int interior = r.topology.n_vertices() - 84;
    CHECK(std::abs(interior - 200) <= 20);
  }

  TEST_CASE("mesh overload preserves the boundary and the interior count") {
    const Mesh disk = shapes::ellipse_mesh(1.0, 0.6, 300, 2);
    int n_interior = 0;
    for (int v = 0; v < disk.topology.n_vertices(); ++v) n_interior += disk.topology.is_boundary_vertex(v) ? 0 : 1;
    const RetriangulationResult r = retriangulate(disk.topology, disk.vertices, n_interior, 11);
    const int new_interior = r.topology.n_vertices() - disk.topology.n_boundary_edges();
    CHECK(std::abs(new_interior - n_interior) <= n_interior / 10);
    for (int v = 0; v < disk.topology.n_vertices(); ++v) {
      if (!disk.topology.is_boundary_vertex(v)) {
        CHECK(r.boundary_map[v] == -1);
        continue;
      }
      REQUIRE(r.boundary_map[v] >= 0);
      CHECK(r.vertices.row(r.boundary_map[v]) == disk.vertices.row(v));
    }
  }

  TEST_CASE("retriangulation is deterministic for a seed") {
    const Loop2d loop = shapes::star_loop(40, 0.3);
    const RetriangulationResult a = retriangulate({loop}, 80, 9);
    const RetriangulationResult b = retriangulate({loop}, 80, 9);
    CHECK(a.vertices == b.vertices);
    CHECK(a.topology.triangles() == b.topology.triangles());
  }

  TEST_CASE("self-intersecting boundary is rejected") {
    Loop2d bowtie{{0.0, 0.0}, {1.0, 1.0}, {1.0, 0.0}, {0.0, 1.0}};
    CHECK_THROWS_AS(retriangulate({bowtie}, 10, 1), SelfIntersectionError);
    try {
      check_simple_loops({bowtie});
    } catch (const SelfIntersectionError& e) {
      CHECK(e.first_segment() >= 0);
      CHECK(e.second_segment() >= 0);
    }
    CHECK_THROWS_AS(check_simple_loops({Loop2d{{0, 0}, {1, 0}}}), SelfIntersectionError);
  }

  TEST_CASE("loop helpers") {
    const Loop2d loop = square_loop(3);
    CHECK(loop_signed_area(loop) == doctest::Approx(1.0));
    Loop2d reversed(loop.rbegin(), loop.rend());
    CHECK(loop_signed_area(reversed) == doctest::Approx(-1.0));
    CHECK(inside_loops({loop}, Eigen::Vector2d(0.5, 0.5)));
    CHECK_FALSE(inside_loops({loop}, Eigen::Vector2d(1.5, 0.5)));
    const Mesh ring = shapes::annulus(0.4, 1.0, 200);
    const auto polys = boundary_polygons(ring.topology, ring.vertices);
    REQUIRE(polys.size() == 2);
    CHECK_FALSE(inside_loops(polys, Eigen::Vector2d(0.0, 0.0)));
    CHECK(inside_loops(polys, Eigen::Vector2d(0.7, 0.0)));
  }
}
