#pragma once

#include "isospec/mesh.hpp"
#include "isospec/shapes.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace testing {

/// Jittered grid of the unit square; jitter below half a cell keeps every triangle CCW.
inline isospec::Mesh random_planar_mesh(std::uint64_t seed, int cells = 5, double jitter = 0.25) {
  isospec::Mesh mesh = isospec::shapes::unit_square_grid(cells);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const double h = 1.0 / cells;
  for (Eigen::Index i = 0; i < mesh.vertices.rows(); ++i) {
    const double du = uni(rng), dv = uni(rng);
    if (!mesh.topology.is_boundary_vertex(static_cast<int>(i))) {
      mesh.vertices(i, 0) += jitter * h * du;
      mesh.vertices(i, 1) += jitter * h * dv;
    }
  }
  return mesh;
}

/// Jittered cube-sphere, scaled anisotropically so no eigenvalue stays repeated.
inline isospec::Mesh random_surface_mesh(std::uint64_t seed, int m = 3) {
  isospec::Mesh mesh = isospec::shapes::cube_sphere(m, 0.3, seed);
  mesh.vertices = isospec::shapes::scaled(mesh.vertices, 1.3, 1.0, 0.8);
  return mesh;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("isospec_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

}  // namespace testing
