#pragma once

#include "isospec/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <iosfwd>
#include <vector>

namespace isospec {

struct Triplet {
  int row;
  int col;
  double value;
};

/// Symmetric sparse matrix with the pattern of the mesh edges plus the diagonal.
class SparseSymmetric {
 public:
  SparseSymmetric() = default;
  explicit SparseSymmetric(Eigen::SparseMatrix<double> full) : matrix_(std::move(full)) {}

  int dimension() const { return static_cast<int>(matrix_.rows()); }
  double coeff(int i, int j) const { return matrix_.coeff(i, j); }
  const Eigen::SparseMatrix<double>& matrix() const { return matrix_; }

  /// Upper-triangle entries (row <= col), column-major order.
  std::vector<Triplet> entries() const;

  /// Writes "i j value" lines for the upper triangle.
  void write_triplets(std::ostream& out) const;

 private:
  Eigen::SparseMatrix<double> matrix_;
};

/// Lumped vertex areas a_i = (1/3) sum of incident triangle areas.
struct DiagonalMass {
  Eigen::VectorXd values;

  int dimension() const { return static_cast<int>(values.size()); }
  double total() const { return values.sum(); }
  void write_triplets(std::ostream& out) const;
};

/// Length of every topology edge. Throws DegenerateError naming the first zero-length edge.
std::vector<double> edge_lengths(const VertexMatrix& vertices, const MeshTopology& topology);

/// Unsigned triangle areas for any d.
std::vector<double> triangle_areas(const VertexMatrix& vertices, const MeshTopology& topology);

/// Signed areas for d=2; positive for counter-clockwise triangles.
std::vector<double> signed_triangle_areas(const VertexMatrix& vertices, const MeshTopology& topology);

///
/// Stiffness matrix from edge lengths.
///
/// Each triangle (i, j, k) contributes (l_ij^2 - l_jk^2 - l_ki^2) / (8 A_ijk) to w_ij, i.e.
/// -cot(angle at k) / 2; boundary edges receive a single term. The diagonal is the negated
/// off-diagonal row sum, so W 1 = 0 and the pencil (W, A) is positive semidefinite.
/// Throws DegenerateError if a triangle's area is below 1e-12 of the mean area.
///
SparseSymmetric stiffness(const VertexMatrix& vertices, const MeshTopology& topology);

/// Throws DegenerateError for vertices without incident area.
DiagonalMass mass(const VertexMatrix& vertices, const MeshTopology& topology);

/// Combinatorial Laplacian: degree on the diagonal, -1 per edge.
SparseSymmetric graph_laplacian(const MeshTopology& topology);

/// (1/6) sum over triangles of v_i . (v_j x v_k); positive for outward oriented closed surfaces.
/// Requires d=3 and a closed mesh.
double signed_volume(const VertexMatrix& vertices, const MeshTopology& topology);

}  // namespace isospec
