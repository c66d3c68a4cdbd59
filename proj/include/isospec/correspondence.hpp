#pragma once

#include "isospec/mesh.hpp"
#include "isospec/operators.hpp"
#include "isospec/spectrum.hpp"

#include <Eigen/Core>

#include <vector>

namespace isospec {

/// Eigenpairs of a shape together with the mass matrix they are orthonormal in.
struct SpectralBasis {
  SpectrumResult spectrum;
  DiagonalMass mass;
};

SpectralBasis spectral_basis(const VertexMatrix& vertices, const MeshTopology& topology, int k);

struct WksConfig {
  int n_energies = 100;
  double sigma_factor = 7.0;  // sigma = factor * energy spacing
};

///
/// Wave kernel signature, n x n_energies.
///
/// Energies are uniform in [log lambda_2, log lambda_k]; the zero eigenvalue has no log
/// and is skipped. Column e is sum_i phi_i^2 g_i(e) / sum_i g_i(e) with Gaussian g_i in
/// log lambda_i. Throws std::invalid_argument for k < 3 or lambda_2 <= 0.
///
Eigen::MatrixXd wks_descriptors(const SpectrumResult& spectrum, const WksConfig& config = {});

/// k_Y x k_X matrix sending coefficients in the basis of X to coefficients in the basis of Y.
struct FunctionalMap {
  Eigen::MatrixXd C;
  bool regularized = false;  // a 1e-9 ridge was needed for a rank-deficient system
};

///
/// Minimizes ||C a - b||_F^2 + w sum_ij ((lambda^Y_i - lambda^X_j) C_ij)^2 where a, b are the
/// descriptors projected onto the bases with mass-weighted inner products. The commutativity
/// term is entrywise, so each row of C is an independent symmetric solve.
///
FunctionalMap functional_map(const SpectralBasis& x, const SpectralBasis& y, const Eigen::MatrixXd& desc_x,
                             const Eigen::MatrixXd& desc_y, double commutativity_weight);

/// For each vertex of X, the vertex of Y whose spectral coordinates are nearest to C times
/// those of the X vertex. Ties go to the smallest index.
std::vector<int> pointwise_map(const FunctionalMap& map, const SpectrumResult& x, const SpectrumResult& y);

/// ||C - diag(C)||_F^2 / ||C||_F^2.
double off_diagonal_ratio(const Eigen::MatrixXd& C);

/// Shortest-path distances along mesh edges from `source` to every vertex.
std::vector<double> graph_distances(const MeshTopology& topology, const VertexMatrix& vertices, int source);

inline constexpr int kCurveSamples = 100;
inline constexpr double kCurveMaxThreshold = 0.5;

struct GeodesicErrorReport {
  double mean = 0.0;
  std::vector<double> per_vertex;  // normalized by sqrt(area of Y)
  std::vector<double> thresholds;  // kCurveSamples values over [0, kCurveMaxThreshold]
  std::vector<double> curve;       // fraction of vertices with error <= threshold
};

/// Throws std::invalid_argument on size mismatch or out-of-range indices and MeshError when
/// Y is disconnected.
GeodesicErrorReport geodesic_error(const std::vector<int>& map, const std::vector<int>& ground_truth,
                                   const MeshTopology& topology_y, const VertexMatrix& vertices_y);

///
/// Per-vertex geodesic distortion of a map X -> Y: the mean over the edges (x, x') of X of
/// |d_Y(T x, T x') - d_X(x, x')| / d_X(x, x'), with d the edge-graph distance.
///
std::vector<double> geodesic_distortion(const std::vector<int>& map, const MeshTopology& topology_x,
                                        const VertexMatrix& vertices_x, const MeshTopology& topology_y,
                                        const VertexMatrix& vertices_y);

}  // namespace isospec
