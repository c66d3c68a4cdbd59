#include "helpers.hpp"
#include "oracles.hpp"

#include "isospec/errors.hpp"
#include "isospec/operators.hpp"
#include "isospec/shapes.hpp"

#include <doctest.h>

#include <sstream>

using namespace isospec;

namespace {

Mesh equilateral() {
  Mesh m;
  m.vertices.resize(3, 2);
  m.vertices << 0, 0, 1, 0, 0.5, std::sqrt(3.0) / 2.0;
  m.topology = MeshTopology(3, {{0, 1, 2}});
  return m;
}

Mesh two_triangle_square() {
  Mesh m;
  m.vertices.resize(4, 2);
  m.vertices << 0, 0, 1, 0, 1, 1, 0, 1;
  m.topology = MeshTopology(4, {{0, 1, 2}, {0, 2, 3}});
  return m;
}

}  // namespace

TEST_SUITE("operators") {
  TEST_CASE("edge lengths") {
    Mesh m;
    m.vertices.resize(3, 2);
    m.vertices << 0, 0, 3, 4, 0, 1;
    m.topology = MeshTopology(3, {{0, 1, 2}});
    const auto len = edge_lengths(m.vertices, m.topology);
    const int e01 = m.topology.find_edge(0, 1);
    const int e02 = m.topology.find_edge(0, 2);
    CHECK(len[e01] == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(len[e02] == doctest::Approx(1.0).epsilon(1e-15));
    m.vertices.row(1) = m.vertices.row(0);
    CHECK_THROWS_AS(edge_lengths(m.vertices, m.topology), DegenerateError);
  }

  TEST_CASE("triangle areas") {
    Mesh right;
    right.vertices.resize(3, 2);
    right.vertices << 0, 0, 1, 0, 0, 1;
    right.topology = MeshTopology(3, {{0, 1, 2}});
    CHECK(triangle_areas(right.vertices, right.topology)[0] == doctest::Approx(0.5));
    CHECK(signed_triangle_areas(right.vertices, right.topology)[0] == doctest::Approx(0.5));
    const MeshTopology cw(3, {{0, 2, 1}});
    CHECK(signed_triangle_areas(right.vertices, cw)[0] == doctest::Approx(-0.5));

    const Mesh eq = equilateral();
    CHECK(triangle_areas(eq.vertices, eq.topology)[0] == doctest::Approx(0.4330127).epsilon(1e-7));

    right.vertices.row(2) << 2, 0;
    CHECK(triangle_areas(right.vertices, right.topology)[0] == 0.0);
  }

  TEST_CASE("stiffness of the equilateral triangle") {
    const Mesh eq = equilateral();
    const SparseSymmetric W = stiffness(eq.vertices, eq.topology);
    const double expected = -1.0 / (2.0 * std::sqrt(3.0));
    CHECK(W.coeff(0, 1) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(W.coeff(1, 2) == doctest::Approx(-0.2886751).epsilon(1e-7));
    CHECK(W.coeff(0, 0) == doctest::Approx(-2.0 * expected).epsilon(1e-12));
  }

  TEST_CASE("diagonal of the unit square carries no weight") {
    const Mesh sq = two_triangle_square();
    const SparseSymmetric W = stiffness(sq.vertices, sq.topology);
    CHECK(std::abs(W.coeff(0, 2)) < 1e-15);
    CHECK(W.coeff(0, 1) == doctest::Approx(-0.5));
  }

  TEST_CASE("stiffness matches the cotangent formula on random meshes") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const Mesh planar = testing::random_planar_mesh(seed);
      const Mesh surface = testing::random_surface_mesh(seed);
      for (const Mesh* m : {&planar, &surface}) {
        const SparseSymmetric W = stiffness(m->vertices, m->topology);
        for (const Edge& e : m->topology.edges()) {
          const double ref = oracle::cotan_weight(m->topology, m->vertices, e.v[0], e.v[1]);
          CHECK(std::abs(W.coeff(e.v[0], e.v[1]) - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
        }
      }
    }
  }

  TEST_CASE("rows of the stiffness matrix sum to zero") {
    const Mesh m = testing::random_surface_mesh(3);
    const SparseSymmetric W = stiffness(m.vertices, m.topology);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(W.dimension());
    CHECK((W.matrix() * ones).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((W.matrix() - Eigen::SparseMatrix<double>(W.matrix().transpose())).norm() == 0.0);
  }

  TEST_CASE("zero-area triangle is named") {
    Mesh m = two_triangle_square();
    m.vertices.row(3) << 0.5, 0.5;  // collinear with 0 and 2
    try {
      stiffness(m.vertices, m.topology);
      FAIL("expected DegenerateError");
    } catch (const DegenerateError& e) {
      CHECK(e.element() == 1);
    }
  }

  TEST_CASE("mass") {
    const Mesh eq = equilateral();
    const DiagonalMass A = mass(eq.vertices, eq.topology);
    for (int i = 0; i < 3; ++i) CHECK(A.values[i] == doctest::Approx(0.1443376).epsilon(1e-6));
    const Mesh sq = two_triangle_square();
    CHECK(mass(sq.vertices, sq.topology).total() == doctest::Approx(1.0));
    const Mesh m = testing::random_planar_mesh(4);
    const Eigen::VectorXd a1 = mass(m.vertices, m.topology).values;
    const Eigen::VectorXd a3 = mass(3.0 * m.vertices, m.topology).values;
    CHECK((a3 - 9.0 * a1).norm() < 1e-12 * a3.norm());
  }

  TEST_CASE("isolated vertex has no mass") {
    Eigen::MatrixXd V(4, 2);
    V << 0, 0, 1, 0, 0, 1, 5, 5;
    const MeshTopology topo(4, {{0, 1, 2}});
    CHECK_THROWS_AS(mass(V, topo), DegenerateError);
  }

  TEST_CASE("graph laplacian") {
    const MeshTopology tri(3, {{0, 1, 2}});
    const SparseSymmetric L = graph_laplacian(tri);
    for (int i = 0; i < 3; ++i) {
      CHECK(L.coeff(i, i) == 2.0);
      for (int j = 0; j < 3; ++j) {
        if (i != j) CHECK(L.coeff(i, j) == -1.0);
      }
    }
    // A strip of two triangles: the corner vertices have degree 2, the diagonal ends degree 3.
    const SparseSymmetric S = graph_laplacian(MeshTopology(4, {{0, 1, 2}, {0, 2, 3}}));
    CHECK(S.coeff(0, 0) == 3.0);
    CHECK(S.coeff(1, 1) == 2.0);
    CHECK((S.matrix() * Eigen::VectorXd::Ones(4)).norm() == 0.0);
  }

  TEST_CASE("signed volume of the cube") {
    const Mesh cube = shapes::unit_cube();
    CHECK(signed_volume(cube.vertices, cube.topology) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(signed_volume(2.0 * cube.vertices, cube.topology) == doctest::Approx(8.0).epsilon(1e-14));
    std::vector<Triangle> flipped = cube.topology.triangles();
    for (auto& t : flipped) std::swap(t[1], t[2]);
    CHECK(signed_volume(cube.vertices, MeshTopology(8, flipped)) == doctest::Approx(-1.0).epsilon(1e-14));
    const Mesh sq = shapes::unit_square_grid(2);
    Eigen::MatrixXd V3 = Eigen::MatrixXd::Zero(sq.vertices.rows(), 3);
    V3.leftCols(2) = sq.vertices;
    CHECK_THROWS_AS(signed_volume(V3, sq.topology), std::invalid_argument);
  }

  TEST_CASE("operators are invariant under rigid motions") {
    std::mt19937_64 rng(11);
    const Mesh m = testing::random_surface_mesh(5);
    const Eigen::Matrix3d R = oracle::random_rotation(rng);
    const Eigen::MatrixXd moved = (m.vertices * R.transpose()).rowwise() + Eigen::RowVector3d(0.3, -2.0, 1.5);
    const SparseSymmetric W0 = stiffness(m.vertices, m.topology);
    const SparseSymmetric W1 = stiffness(moved, m.topology);
    CHECK((W0.matrix() - W1.matrix()).norm() <= 1e-12 * W0.matrix().norm());
    const Eigen::VectorXd a0 = mass(m.vertices, m.topology).values;
    const Eigen::VectorXd a1 = mass(moved, m.topology).values;
    CHECK((a0 - a1).norm() <= 1e-12 * a0.norm());
    const SparseSymmetric W2 = stiffness(2.5 * m.vertices, m.topology);
    CHECK((W0.matrix() - W2.matrix()).norm() <= 1e-12 * W0.matrix().norm());
  }

  TEST_CASE("triplet dump lists the upper triangle") {
    const Mesh eq = equilateral();
    std::ostringstream out;
    stiffness(eq.vertices, eq.topology).write_triplets(out);
    std::istringstream in(out.str());
    int i = 0, j = 0, count = 0;
    double v = 0.0;
    while (in >> i >> j >> v) {
      CHECK(i <= j);
      ++count;
    }
    CHECK(count == 6);
  }
}
