#pragma once

#include "isospec/flatremesh.hpp"
#include "isospec/mesh.hpp"

#include <cstdint>
#include <functional>

// Procedural fixture meshes and planar outlines.
namespace isospec::shapes {

/// Regular grid of [0,w]x[0,h] with nx by ny cells, each split along the same diagonal.
Mesh rectangle_grid(double width, double height, int nx, int ny);
inline Mesh unit_square_grid(int cells) { return rectangle_grid(1.0, 1.0, cells, cells); }

/// Closed triangulation of the unit cube surface: 8 vertices, 12 outward triangles.
Mesh unit_cube();
/// Regular tetrahedron, outward oriented.
Mesh tetrahedron();

/// Cube subdivided m x m per face and projected to the unit sphere (6m^2 + 2 vertices).
/// `jitter` perturbs vertices tangentially by that fraction of the grid spacing.
Mesh cube_sphere(int m, double jitter = 0.0, std::uint64_t seed = 1);
/// Cube-sphere with roughly n vertices.
/// Octahedron with `levels` rounds of midpoint subdivision, projected to the unit sphere.
/// Keeps the full octahedral symmetry, so repeated eigenvalues are exact.
Mesh octa_sphere(int levels);

Mesh sphere_with_vertices(int n, double jitter = 0.1, std::uint64_t seed = 1);

/// Multiplies each column by its factor.
VertexMatrix scaled(const VertexMatrix& vertices, double sx, double sy, double sz = 1.0);

/// Smooth asymmetric stretch-and-bend of a 3D point set, identity at strength 0.
VertexMatrix stretch_bend(const VertexMatrix& vertices, double strength);

/// Closed curve sampled uniformly in parameter, counter-clockwise.
Loop2d radial_loop(const std::function<double(double)>& radius, int n_points);
Loop2d ellipse_loop(double a, double b, int n_points);
/// Three-lobed star r(t) = 1 + a cos 3t.
Loop2d star_loop(int n_points, double amplitude = 0.3);
/// Head with two ears: the radial envelope of three circles.
Loop2d mickey_loop(int n_points);

/// Loop resampled to n points equally spaced in arc length, starting at the first point.
Loop2d resample_loop(const Loop2d& loop, int n_points);
/// Loops scaled about the origin so their enclosed area is `area`.
std::vector<Loop2d> scale_to_area(std::vector<Loop2d> loops, double area);
double loops_area(const std::vector<Loop2d>& loops);
double loops_perimeter(const std::vector<Loop2d>& loops);

/// Boundary vertex count for an n-vertex mesh of a region with the given area and
/// perimeter, so that boundary spacing matches the interior lattice spacing.
int boundary_count(double area, double perimeter, int n_total);

/// Meshes the region bounded by `loops` with about n_total vertices. Loops are resampled
/// (each in proportion to its length) before triangulation.
Mesh polygon_mesh(const std::vector<Loop2d>& loops, int n_total, std::uint64_t seed = 1);
Mesh ellipse_mesh(double a, double b, int n_total, std::uint64_t seed = 1);
/// Annulus between radii r_in < r_out, two boundary loops.
Mesh annulus(double r_in, double r_out, int n_total, std::uint64_t seed = 1);

/// Straight bar [0,L]x[0,W] in the plane z=0 as a 3D mesh, folded (when `folded`) along
/// the grid columns at x = L/3 and 2L/3 by 90 degrees each. Both are isometric.
Mesh bar(double length, double width, int nx, int ny, bool folded);

/// Tutte embedding: boundary vertices pinned at `boundary`, interior at the uniform
/// barycenter of their neighbors. Rows of `boundary` outside the boundary are ignored.
VertexMatrix tutte_embedding(const MeshTopology& topology, const VertexMatrix& boundary);

/// The single boundary loop of a disk-topology flat mesh mapped by arc length onto an
/// ellipse with semi-axes a, b, with the interior placed by Tutte.
VertexMatrix ellipse_embedding(const MeshTopology& topology, const VertexMatrix& vertices, double a, double b);

/// Uniform rescale of vertices about their centroid so the mesh area is `area`.
VertexMatrix with_area(const MeshTopology& topology, const VertexMatrix& vertices, double area);
double mesh_area(const MeshTopology& topology, const VertexMatrix& vertices);

}  // namespace isospec::shapes
