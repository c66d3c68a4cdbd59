#include "helpers.hpp"
#include "oracles.hpp"

#include "isospec/energy.hpp"
#include "isospec/errors.hpp"
#include "isospec/operators.hpp"
#include "isospec/shapes.hpp"
#include "isospec/spectrum.hpp"

#include <doctest.h>

using namespace isospec;

namespace {

TargetSpectrum target_of(const Mesh& m, int k) {
  TargetSpectrum t;
  t.mu = eigensolve(m.vertices, m.topology, k).eigenvalues;
  t.mu[0] = 0.0;
  return t;
}

double bbox_diagonal(const Eigen::MatrixXd& V) { return (V.colwise().maxCoeff() - V.colwise().minCoeff()).norm(); }

}  // namespace

TEST_SUITE("energy") {
  TEST_CASE("spectral loss weights by inverse index") {
    Eigen::VectorXd lambda(3), mu(3);
    lambda << 0.0, 2.0, 4.0;
    mu << 0.0, 1.0, 5.0;
    const auto [value, grad] = spectral_loss(lambda, mu);
    // (1/2) 1 + (1/3) 1 ... with 1-based weights: 0 + 1/2 + 1/3.
    CHECK(value == doctest::Approx(0.5 + 1.0 / 3.0));
    CHECK(grad[1] == doctest::Approx(1.0));
    CHECK(grad[2] == doctest::Approx(-2.0 / 3.0));
    CHECK(spectral_loss(lambda, lambda).first == 0.0);
    CHECK_THROWS_AS(spectral_loss(lambda, mu.head(2)), std::invalid_argument);
  }

  TEST_CASE("target spectrum validation") {
    TargetSpectrum t;
    t.mu.resize(3);
    t.mu << 0.0, 1.0, 2.0;
    CHECK_NOTHROW(t.check());
    t.mu << 0.0, 2.0, 1.0;
    CHECK_THROWS_AS(t.check(), std::invalid_argument);
    t.mu << -1.0, 1.0, 2.0;
    CHECK_THROWS_AS(t.check(), std::invalid_argument);
    t.mu << 0.0, 1.0, 2.0;
    CHECK(t.truncated(2).k() == 2);
  }

  TEST_CASE("edge regularizer on a unit square") {
    const Mesh sq = shapes::unit_square_grid(1);
    const TermValue r = reg_edge_length(sq.vertices, sq.topology);
    CHECK(r.value == doctest::Approx(4.0));
    CHECK(reg_edge_length(sq.vertices, sq.topology, false).value == doctest::Approx(6.0));
  }

  TEST_CASE("flip penalty") {
    const Mesh m = testing::random_planar_mesh(3);
    CHECK(reg_flip_penalty(m.vertices, m.topology).value == 0.0);
    CHECK(reg_flip_penalty(m.vertices, m.topology).gradient.norm() == 0.0);

    Eigen::MatrixXd V(3, 2);
    V << 0, 0, 1, 0, 0, 1;
    const MeshTopology cw(3, {{0, 2, 1}});
    // Twice the signed area is -1.
    CHECK(reg_flip_penalty(V, cw).value == doctest::Approx(1.0));
  }

  TEST_CASE("regularizer gradients match finite differences") {
    int instances = 0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      Mesh flat = testing::random_planar_mesh(seed, 4);
      // Push one interior vertex across an edge so the flip term is active.
      const int v = 6;
      flat.vertices.row(v) += Eigen::RowVector2d(0.4, 0.35);
      const double h = 1e-6 * bbox_diagonal(flat.vertices);
      const auto edge = [&](const Eigen::MatrixXd& V) { return reg_edge_length(V, flat.topology).value; };
      CHECK(oracle::relative_error(reg_edge_length(flat.vertices, flat.topology).gradient,
                                   oracle::finite_difference(edge, flat.vertices, h)) < 1e-8);
      const TermValue flip = reg_flip_penalty(flat.vertices, flat.topology);
      REQUIRE(flip.value > 0.0);
      const auto fl = [&](const Eigen::MatrixXd& V) { return reg_flip_penalty(V, flat.topology).value; };
      CHECK(oracle::relative_error(flip.gradient, oracle::finite_difference(fl, flat.vertices, h)) < 1e-6);

      const Mesh surf = testing::random_surface_mesh(seed);
      const SparseSymmetric L = graph_laplacian(surf.topology);
      const auto sm = [&](const Eigen::MatrixXd& V) { return reg_smoothness(V, L).value; };
      CHECK(oracle::relative_error(reg_smoothness(surf.vertices, L).gradient,
                                   oracle::finite_difference(sm, surf.vertices, h)) < 1e-8);
      const auto vol = [&](const Eigen::MatrixXd& V) { return reg_volume(V, surf.topology).value; };
      CHECK(oracle::relative_error(reg_volume(surf.vertices, surf.topology).gradient,
                                   oracle::finite_difference(vol, surf.vertices, h)) < 1e-8);
      ++instances;
    }
    CHECK(instances == 3);
  }

  TEST_CASE("volume regularizer") {
    const Mesh cube = shapes::unit_cube();
    CHECK(reg_volume(cube.vertices, cube.topology).value == doctest::Approx(-1.0));
  }

  TEST_CASE("energy vanishes at the target shape") {
    const Mesh m = testing::random_planar_mesh(9);
    EnergyConfig cfg;
    cfg.k = 10;
    cfg.weights = RegWeights{0.0, 0.0, 0.0, 0.0};
    const EnergyModel model(m.topology, target_of(m, 10), cfg);
    const EnergyBreakdown e = model.evaluate(m.vertices);
    CHECK(e.data_term < 1e-20);
    CHECK(e.total == doctest::Approx(e.data_term));
  }

  TEST_CASE("total energy is the weighted sum of its terms") {
    const Mesh m = testing::random_planar_mesh(4);
    const Mesh other = testing::random_planar_mesh(5);
    EnergyConfig cfg;
    cfg.k = 10;
    const EnergyModel model(m.topology, target_of(other, 10), cfg);
    const RegWeights w{1.5, 3.0, 0.0, 0.0};
    const EnergyBreakdown e = model.evaluate(m.vertices, w);
    CHECK(e.total == doctest::Approx(e.data_term + 1.5 * e.reg_edge + 3.0 * e.reg_flip).epsilon(1e-14));
    const EnergyBreakdown d = model.evaluate(m.vertices, RegWeights{0.0, 0.0, 0.0, 0.0});
    const EnergyBreakdown r = model.evaluate(m.vertices, RegWeights{1.5, 0.0, 0.0, 0.0});
    const Eigen::MatrixXd g_edge = reg_edge_length(m.vertices, m.topology).gradient;
    CHECK((r.gradient - d.gradient - 1.5 * g_edge).norm() <= 1e-12 * r.gradient.norm());
  }

  TEST_CASE("total flat gradient matches finite differences") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const Mesh m = testing::random_planar_mesh(seed, 5, 0.3);
      const Mesh target = shapes::ellipse_mesh(1.3, 0.8, 80, seed);
      EnergyConfig cfg;
      cfg.k = 10;
      const EnergyModel model(m.topology, target_of(target, 10), cfg);
      const EnergyBreakdown e = model.evaluate(m.vertices);
      const auto f = [&](const Eigen::MatrixXd& V) { return model.evaluate(V).total; };
      CHECK(oracle::relative_error(e.gradient, oracle::finite_difference(f, m.vertices, 1e-6)) < 1e-4);
    }
  }

  TEST_CASE("total surface gradient in displacement mode matches finite differences") {
    const Mesh m = testing::random_surface_mesh(3);
    Mesh target = shapes::cube_sphere(3);
    target.vertices = shapes::scaled(target.vertices, 1.4, 1.0, 0.7);
    EnergyConfig cfg;
    cfg.k = 10;
    cfg.flat_mode = false;
    cfg.displacement_mode = true;
    const EnergyModel model(m.topology, target_of(target, 10), cfg, m.vertices);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 0.01);
    Eigen::MatrixXd D = Eigen::MatrixXd::NullaryExpr(m.vertices.rows(), 3, [&]() { return g(rng); });
    const EnergyBreakdown e = model.evaluate(D);
    const auto f = [&](const Eigen::MatrixXd& X) { return model.evaluate(X).total; };
    CHECK(oracle::relative_error(e.gradient, oracle::finite_difference(f, D, 1e-6)) < 1e-4);
    CHECK((model.vertices_of(D) - (m.vertices + D)).norm() == 0.0);
  }

  TEST_CASE("repeated eigenvalues keep the data term differentiable") {
    const Mesh sphere = shapes::octa_sphere(2);
    Mesh target = sphere;
    target.vertices = shapes::scaled(target.vertices, 1.2, 1.0, 0.9);
    EnergyConfig cfg;
    // k = 9 ends on a cluster boundary; truncating inside a cluster would make the mean non-smooth.
    cfg.k = 9;
    cfg.flat_mode = false;
    cfg.weights = RegWeights{0.0, 0.0, 0.0, 0.0};
    const EnergyModel model(sphere.topology, target_of(target, 9), cfg);
    const EnergyBreakdown e = model.evaluate(sphere.vertices);
    const auto f = [&](const Eigen::MatrixXd& V) { return model.evaluate(V).total; };
    // Central differences of a cluster mean are smooth in every direction.
    CHECK(oracle::relative_error(e.gradient, oracle::finite_difference(f, sphere.vertices, 1e-6)) < 1e-4);
  }

  TEST_CASE("model rejects mismatched inputs") {
    const Mesh m = testing::random_planar_mesh(1, 3);
    EnergyConfig cfg;
    cfg.k = 40;
    CHECK_THROWS(EnergyModel(m.topology, target_of(m, 10), cfg));
    cfg.k = 5;
    cfg.displacement_mode = true;
    CHECK_THROWS_AS(EnergyModel(m.topology, target_of(m, 10), cfg), std::invalid_argument);
  }
}
