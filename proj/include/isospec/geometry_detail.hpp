#pragma once

// Small per-triangle kernels shared by the operator, gradient, and regularizer code.

#include "isospec/mesh.hpp"

#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <numeric>
#include <vector>

namespace isospec::detail {

/// Squared lengths of the edges opposite corners 0, 1, 2.
using CornerSquares = std::array<double, 3>;

inline CornerSquares opposite_squared_lengths(const VertexMatrix& V, const Triangle& t) {
  CornerSquares s;
  for (int c = 0; c < 3; ++c) s[c] = (V.row(t[(c + 1) % 3]) - V.row(t[(c + 2) % 3])).squaredNorm();
  return s;
}

inline double twice_signed_area(const VertexMatrix& V, const Triangle& t) {
  const double ax = V(t[0], 0), ay = V(t[0], 1);
  return (V(t[1], 0) - ax) * (V(t[2], 1) - ay) - (V(t[1], 1) - ay) * (V(t[2], 0) - ax);
}

inline double triangle_area(const VertexMatrix& V, const Triangle& t) {
  if (V.cols() == 2) return 0.5 * std::abs(twice_signed_area(V, t));
  const Eigen::Vector3d a = V.row(t[0]).transpose();
  const Eigen::Vector3d b = V.row(t[1]).transpose();
  const Eigen::Vector3d c = V.row(t[2]).transpose();
  return 0.5 * (b - a).cross(c - a).norm();
}

inline double degenerate_area_threshold(const std::vector<double>& areas) {
  if (areas.empty()) return 0.0;
  return 1e-12 * std::accumulate(areas.begin(), areas.end(), 0.0) / static_cast<double>(areas.size());
}

}  // namespace isospec::detail
