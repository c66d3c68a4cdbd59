#pragma once

#include "isospec/mesh.hpp"
#include "isospec/operators.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace isospec {

/// Groups of consecutive eigenvalue indices that are numerically equal.
using Clusters = std::vector<std::vector<int>>;

struct SpectrumResult {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // n x k, A-orthonormal
  Clusters clusters;

  int k() const { return static_cast<int>(eigenvalues.size()); }
  /// Index of the cluster containing eigenvalue i.
  int cluster_of(int i) const;
};

inline constexpr double kDefaultClusterTolerance = 1e-5;

///
/// First k pairs of W phi = lambda A phi.
///
/// A is diagonal, so the pencil is reduced to the ordinary symmetric matrix
/// A^{-1/2} W A^{-1/2} and solved densely (LAPACK dsyevr, index range 1..k). Eigenvectors
/// are mapped back by A^{-1/2} and signed so their largest-magnitude entry is positive.
/// Throws std::invalid_argument for k > n or k < 1 and DegenerateError for non-positive mass.
///
SpectrumResult eigensolve(const SparseSymmetric& W, const DiagonalMass& A, int k,
                          double cluster_rel_tol = kDefaultClusterTolerance);

/// Convenience: assemble both operators and solve.
SpectrumResult eigensolve(const VertexMatrix& vertices, const MeshTopology& topology, int k,
                          double cluster_rel_tol = kDefaultClusterTolerance);

///
/// Consecutive eigenvalues with |l[i+1] - l[i]| <= rel_tol * max(|l[i]|, scale) share a
/// cluster, where scale = |l[k-1]| / k keeps the test meaningful next to the zero eigenvalue.
///
Clusters cluster_eigenvalues(const Eigen::VectorXd& eigenvalues, double rel_tol = kDefaultClusterTolerance);

///
/// Gradient with respect to the vertex coordinates of sum_i coefficients[i] * lambda_i.
///
/// Uses first-order perturbation of the generalized problem, d lambda = phi^T (dW - lambda dA) phi,
/// chained through the edge-length form of the stiffness weights and the lumped areas. The
/// result is exact for simple eigenvalues; for a cluster it is meaningful only when all
/// members carry the same coefficient (the sum over a cluster is basis independent).
///
Eigen::MatrixXd weighted_eigenvalue_gradient(const VertexMatrix& vertices, const MeshTopology& topology,
                                             const SpectrumResult& spectrum, const Eigen::VectorXd& coefficients);

struct EigenvalueGradient {
  std::vector<int> indices;  // a whole cluster; one entry for a simple eigenvalue
  Eigen::MatrixXd gradient;  // gradient of the sum of the eigenvalues in `indices`
};

/// One gradient per cluster touched by `indices`. Requesting part of a repeated eigenvalue
/// throws ClusterSplitError.
std::vector<EigenvalueGradient> eigenvalue_gradients(const VertexMatrix& vertices, const MeshTopology& topology,
                                                     const SpectrumResult& spectrum, std::span<const int> indices);

}  // namespace isospec
