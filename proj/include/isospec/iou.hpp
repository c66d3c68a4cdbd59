#pragma once

#include "isospec/flatremesh.hpp"
#include "isospec/mesh.hpp"

#include <Eigen/Core>

#include <vector>

namespace isospec {

inline constexpr int kIouResolution = 512;

/// Intersection over union of two even-odd filled polygon sets in their given placement.
/// Sampled on `rows` scanlines across the joint bounding box; each scanline is measured
/// exactly in x.
double polygon_iou(const std::vector<Loop2d>& a, const std::vector<Loop2d>& b, int rows = kIouResolution);

struct RigidMotion2d {
  bool reflect = false;  // mirror across the x axis before rotating
  double angle = 0.0;    // about the centroid of the moving shape
  Eigen::Vector2d translation = Eigen::Vector2d::Zero();
  Eigen::Vector2d pivot = Eigen::Vector2d::Zero();

  Eigen::Vector2d apply(const Eigen::Vector2d& p) const;
  std::vector<Loop2d> apply(const std::vector<Loop2d>& loops) const;
};

struct AlignedIou {
  double iou = 0.0;
  RigidMotion2d motion;  // applied to the second shape
};

/// Best IOU over rotations, reflections and translations of `b`: a grid of 2 x 64 starts
/// with centroids matched, refined by Nelder-Mead on (angle, tx, ty) from the best starts.
AlignedIou aligned_iou(const std::vector<Loop2d>& a, const std::vector<Loop2d>& b, int rows = kIouResolution);

/// Throws std::invalid_argument for an empty or zero-area shape.
double iou(const std::vector<Loop2d>& a, const std::vector<Loop2d>& b, bool align, int rows = kIouResolution);

/// Boundary loops of a flat mesh in its own coordinates (first two columns).
std::vector<Loop2d> mesh_outline(const MeshTopology& topology, const VertexMatrix& vertices);

/// Area-weighted centroid of an even-odd polygon set.
Eigen::Vector2d loops_centroid(const std::vector<Loop2d>& loops);

}  // namespace isospec
