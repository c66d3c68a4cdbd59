#pragma once

#include "isospec/mesh.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace isospec {

/// A closed polygonal cycle; the last point connects back to the first.
using Loop2d = std::vector<Eigen::Vector2d>;

struct RetriangulationResult {
  MeshTopology topology;
  VertexMatrix vertices;
  /// For each vertex of the input (mesh overload) or each concatenated loop point (loop
  /// overload): its index in the new mesh, or -1 for discarded interior vertices.
  std::vector<int> boundary_map;
};

///
/// Gauss-Seidel relaxation of the interior vertices of a flat mesh.
///
/// Each sweep moves every interior vertex to the average of its neighbors, which is the
/// exact minimizer of the squared lengths of its incident edges with the neighbors held
/// fixed. A move that would invert a positively oriented incident triangle is undone.
/// Boundary rows are returned unchanged.
///
VertexMatrix relax_interior(const MeshTopology& topology, const VertexMatrix& vertices, int iterations = 20);

/// Sum of squared lengths of edges touching at least one interior vertex.
double interior_edge_energy(const MeshTopology& topology, const VertexMatrix& vertices);

/// Throws SelfIntersectionError naming the first pair of segments that touch or cross.
void check_simple_loops(const std::vector<Loop2d>& loops);

///
/// Constrained Delaunay triangulation of a polygon with holes.
///
/// Loop points become the first vertices of the result, in order and with bit-identical
/// coordinates; every loop segment is a mesh edge. About `target_interior` interior points
/// are placed on a jittered triangular lattice (seeded) away from the boundary. Triangles
/// are counter-clockwise. Any loop orientation is accepted; the inside is decided by the
/// even-odd rule.
///
RetriangulationResult retriangulate(const std::vector<Loop2d>& loops, int target_interior, std::uint64_t seed);

/// Retriangulates the region bounded by the boundary loops of a flat mesh, keeping its
/// boundary vertices. `boundary_map` is indexed by the old vertex ids.
RetriangulationResult retriangulate(const MeshTopology& topology, const VertexMatrix& vertices, int target_interior,
                                    std::uint64_t seed);

/// Boundary loops of a flat mesh as coordinate cycles.
std::vector<Loop2d> boundary_polygons(const MeshTopology& topology, const VertexMatrix& vertices);

/// Signed area of a loop (positive when counter-clockwise).
double loop_signed_area(const Loop2d& loop);

/// Even-odd point membership for a set of loops.
bool inside_loops(const std::vector<Loop2d>& loops, const Eigen::Vector2d& p);

}  // namespace isospec
