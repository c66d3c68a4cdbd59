#pragma once

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace isospec {

/// Row i holds the coordinates of vertex i; two columns for flat shapes, three for surfaces.
using VertexMatrix = Eigen::MatrixXd;

using Triangle = std::array<int, 3>;

enum class EdgeKind { interior, boundary };

/// Undirected edge stored as (min, max). `faces[1]` is -1 for boundary edges.
struct Edge {
  std::array<int, 2> v;
  EdgeKind kind;
  std::array<int, 2> faces;

  bool is_boundary() const { return kind == EdgeKind::boundary; }
};

///
/// Immutable connectivity of a manifold triangle mesh (with or without boundary).
///
/// Edges are derived from the triangles at construction time, classified as interior or
/// boundary, and record their flanking triangles so operator assembly is a single pass.
/// Construction throws MeshError for out-of-range indices or edges shared by more than
/// two triangles. Isolated vertices are allowed here and reported by validate().
///
class MeshTopology {
 public:
  MeshTopology() = default;
  MeshTopology(int n_vertices, std::vector<Triangle> triangles);

  int n_vertices() const { return n_vertices_; }
  int n_triangles() const { return static_cast<int>(triangles_.size()); }
  int n_edges() const { return static_cast<int>(edges_.size()); }

  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Edge indices of triangle f, ordered as the edges opposite corners 0, 1, 2.
  const std::array<int, 3>& triangle_edges(int f) const { return triangle_edges_[f]; }

  /// Index of edge {a, b}, or -1.
  int find_edge(int a, int b) const;

  std::span<const int> neighbors(int v) const;
  std::span<const int> vertex_triangles(int v) const;

  bool is_boundary_vertex(int v) const { return boundary_vertex_[v] != 0; }
  int n_boundary_edges() const { return n_boundary_edges_; }
  int n_interior_edges() const { return n_edges() - n_boundary_edges_; }
  bool is_closed() const { return n_boundary_edges_ == 0; }

  int euler_characteristic() const { return n_vertices_ - n_edges() + n_triangles(); }

 private:
  int n_vertices_ = 0;
  std::vector<Triangle> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<int> neighbor_offsets_;
  std::vector<int> neighbor_list_;
  std::vector<int> face_offsets_;
  std::vector<int> face_list_;
  std::vector<char> boundary_vertex_;
  int n_boundary_edges_ = 0;
};

struct Mesh {
  MeshTopology topology;
  VertexMatrix vertices;

  int dim() const { return static_cast<int>(vertices.cols()); }
};

/// Unvalidated file contents: always three coordinate columns.
struct RawMesh {
  Eigen::MatrixXd vertices;
  std::vector<Triangle> triangles;
};

enum class MeshFormat { off, obj };

MeshFormat format_from_path(const std::filesystem::path& path);

struct LoadOptions {
  /// Drop an all-zero z column and return a d=2 mesh (oriented counter-clockwise).
  bool flat = false;
};

RawMesh read_raw_mesh(const std::filesystem::path& path, MeshFormat format);
RawMesh read_raw_mesh(const std::filesystem::path& path);

Mesh load_mesh(const std::filesystem::path& path, MeshFormat format, const LoadOptions& options = {});
Mesh load_mesh(const std::filesystem::path& path, const LoadOptions& options = {});

/// Writes 17 significant digits; 2D meshes get a zero z column.
void save_mesh(const std::filesystem::path& path, MeshFormat format, const MeshTopology& topology,
               const VertexMatrix& vertices);
void save_mesh(const std::filesystem::path& path, const MeshTopology& topology,
               const VertexMatrix& vertices);

/// Closed cycles of boundary vertices, each following the orientation of its triangles.
/// Loops are emitted in order of their smallest vertex index and start at that vertex.
std::vector<std::vector<int>> boundary_loops(const MeshTopology& topology);

struct ValidationReport {
  bool is_manifold = true;
  bool is_connected = true;
  bool has_degenerate_triangles = false;
  bool orientation_consistent = true;
  int boundary_loop_count = 0;
};

/// Describes the mesh, never throws for malformed connectivity.
ValidationReport validate(int n_vertices, const std::vector<Triangle>& triangles,
                          const Eigen::MatrixXd& vertices);
ValidationReport validate(const MeshTopology& topology, const VertexMatrix& vertices);

/// Reverses every triangle when the total signed area is negative, so 2D meshes follow the
/// counter-clockwise convention. Requires d=2.
MeshTopology orient_ccw(const MeshTopology& topology, const VertexMatrix& vertices);

}  // namespace isospec
