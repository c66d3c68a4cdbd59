#include "isospec/spectrum.hpp"

#include "isospec/errors.hpp"
#include "isospec/geometry_detail.hpp"

#include <Eigen/Eigenvalues>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace isospec {

int SpectrumResult::cluster_of(int i) const {
  for (int c = 0; c < static_cast<int>(clusters.size()); ++c) {
    if (i >= clusters[c].front() && i <= clusters[c].back()) return c;
  }
  throw std::out_of_range("eigenvalue index " + std::to_string(i) + " outside the computed spectrum");
}

Clusters cluster_eigenvalues(const Eigen::VectorXd& eigenvalues, double rel_tol) {
  Clusters out;
  const int k = static_cast<int>(eigenvalues.size());
  if (k == 0) return out;
  const double scale = std::abs(eigenvalues[k - 1]) / k;
  out.push_back({0});
  for (int i = 1; i < k; ++i) {
    const double gap = std::abs(eigenvalues[i] - eigenvalues[i - 1]);
    const double tol = rel_tol * std::max(std::abs(eigenvalues[i - 1]), scale);
    if (gap <= tol) {
      out.back().push_back(i);
    } else {
      out.push_back({i});
    }
  }
  return out;
}

SpectrumResult eigensolve(const SparseSymmetric& W, const DiagonalMass& A, int k, double cluster_rel_tol) {
  const int n = W.dimension();
  if (A.dimension() != n) throw std::invalid_argument("eigensolve: mass and stiffness sizes differ");
  if (k < 1 || k > n) {
    throw std::invalid_argument("eigensolve: requested k=" + std::to_string(k) + " eigenpairs of an n=" +
                                std::to_string(n) + " problem");
  }
  for (int i = 0; i < n; ++i) {
    if (!(A.values[i] > 0.0)) throw DegenerateError("eigensolve: non-positive mass at vertex " + std::to_string(i), i);
  }
  const Eigen::VectorXd inv_sqrt = A.values.cwiseSqrt().cwiseInverse();

  // Lower triangle of A^{-1/2} W A^{-1/2}, column-major.
  const auto& S = W.matrix();
  const auto scaled_lower = [&]() {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (int col = 0; col < S.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(S, col); it; ++it) {
        if (it.row() >= it.col()) M(it.row(), it.col()) = it.value() * inv_sqrt[it.row()] * inv_sqrt[it.col()];
      }
    }
    return M;
  };
  Eigen::MatrixXd M = scaled_lower();

  std::vector<double> w(n);
  Eigen::MatrixXd Y(n, k);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(k));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, M.data(), n, 0.0, 0.0, 1, k, 0.0,
                                         &found, w.data(), Y.data(), n, support.data());
  if (info != 0 || found != k) {
    throw NumericalAbort("eigensolve: LAPACK dsyevr failed (info=" + std::to_string(info) + ", found " +
                         std::to_string(found) + " of " + std::to_string(k) + ")");
  }
  Eigen::VectorXd values = Eigen::Map<const Eigen::VectorXd>(w.data(), k);

  // Some BLAS builds pick kernels that return accurate eigenvalues with garbage eigenvectors.
  // The residual is cheap to check against the sparse operator, so a bad result is never returned.
  const Eigen::SparseMatrix<double> scaled = inv_sqrt.asDiagonal() * S * inv_sqrt.asDiagonal();
  const auto residual = [&](const Eigen::MatrixXd& vecs, const Eigen::VectorXd& vals) {
    const Eigen::MatrixXd r = scaled * vecs - vecs * vals.asDiagonal();
    return r.colwise().norm().maxCoeff();
  };
  const double tol = 1e-8 * std::max(scaled.norm(), std::numeric_limits<double>::min());
  if (!(residual(Y, values) <= tol)) {
    Eigen::MatrixXd full = scaled_lower();
    full.triangularView<Eigen::StrictlyUpper>() = full.transpose();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(full);
    if (es.info() != Eigen::Success) throw NumericalAbort("eigensolve: dense fallback did not converge");
    values = es.eigenvalues().head(k);
    Y = es.eigenvectors().leftCols(k);
    if (!(residual(Y, values) <= tol)) throw NumericalAbort("eigensolve: eigenvector residual above tolerance");
  }

  SpectrumResult result;
  result.eigenvalues = values;
  result.eigenvectors = inv_sqrt.asDiagonal() * Y;
  for (int j = 0; j < k; ++j) {
    Eigen::Index arg = 0;
    result.eigenvectors.col(j).cwiseAbs().maxCoeff(&arg);
    if (result.eigenvectors(arg, j) < 0.0) result.eigenvectors.col(j) *= -1.0;
  }
  result.clusters = cluster_eigenvalues(result.eigenvalues, cluster_rel_tol);
  return result;
}

SpectrumResult eigensolve(const VertexMatrix& vertices, const MeshTopology& topology, int k, double cluster_rel_tol) {
  return eigensolve(stiffness(vertices, topology), mass(vertices, topology), k, cluster_rel_tol);
}

Eigen::MatrixXd weighted_eigenvalue_gradient(const VertexMatrix& vertices, const MeshTopology& topology,
                                             const SpectrumResult& spectrum, const Eigen::VectorXd& coefficients) {
  const int k = spectrum.k();
  if (coefficients.size() != k) throw std::invalid_argument("weighted_eigenvalue_gradient: coefficient count mismatch");
  const Eigen::MatrixXd& phi = spectrum.eigenvectors;

  // d(sum c_i lambda_i)/d w_e = -sum c_i (phi_i(p) - phi_i(q))^2, since phi^T W phi = -sum_e w_e (dphi_e)^2.
  std::vector<double> dweight(topology.n_edges(), 0.0);
  for (int e = 0; e < topology.n_edges(); ++e) {
    const auto [p, q] = topology.edges()[e].v;
    double acc = 0.0;
    for (int i = 0; i < k; ++i) {
      if (coefficients[i] == 0.0) continue;
      const double d = phi(p, i) - phi(q, i);
      acc += coefficients[i] * d * d;
    }
    dweight[e] = -acc;
  }
  // d/d a_v = -sum c_i lambda_i phi_i(v)^2.
  Eigen::VectorXd dmass = Eigen::VectorXd::Zero(topology.n_vertices());
  for (int i = 0; i < k; ++i) {
    if (coefficients[i] == 0.0) continue;
    dmass -= (coefficients[i] * spectrum.eigenvalues[i]) * phi.col(i).cwiseAbs2();
  }

  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(vertices.rows(), vertices.cols());
  for (int f = 0; f < topology.n_triangles(); ++f) {
    const Triangle& t = topology.triangles()[f];
    const auto& te = topology.triangle_edges(f);
    const detail::CornerSquares s = detail::opposite_squared_lengths(vertices, t);
    const double area = detail::triangle_area(vertices, t);
    double term[3];
    for (int c = 0; c < 3; ++c) term[c] = (s[c] - s[(c + 1) % 3] - s[(c + 2) % 3]) / (8.0 * area);

    double d_area = (dmass[t[0]] + dmass[t[1]] + dmass[t[2]]) / 3.0;
    for (int c = 0; c < 3; ++c) d_area -= dweight[te[c]] * term[c] / area;

    for (int c = 0; c < 3; ++c) {
      const int c1 = (c + 1) % 3;
      const int c2 = (c + 2) % 3;
      // Heron: 16 A^2 = 2(s0 s1 + s1 s2 + s2 s0) - (s0^2 + s1^2 + s2^2).
      const double area_ds = (s[c1] + s[c2] - s[c]) / (16.0 * area);
      const double d_s = (dweight[te[c]] - dweight[te[c1]] - dweight[te[c2]]) / (8.0 * area) + d_area * area_ds;
      const Eigen::RowVectorXd edge = vertices.row(t[c1]) - vertices.row(t[c2]);
      grad.row(t[c1]) += 2.0 * d_s * edge;
      grad.row(t[c2]) -= 2.0 * d_s * edge;
    }
  }
  return grad;
}

std::vector<EigenvalueGradient> eigenvalue_gradients(const VertexMatrix& vertices, const MeshTopology& topology,
                                                     const SpectrumResult& spectrum, std::span<const int> indices) {
  std::vector<int> touched;
  for (int i : indices) {
    const int c = spectrum.cluster_of(i);
    if (std::find(touched.begin(), touched.end(), c) == touched.end()) touched.push_back(c);
  }
  std::vector<EigenvalueGradient> out;
  for (int c : touched) {
    const auto& members = spectrum.clusters[c];
    for (int m : members) {
      if (std::find(indices.begin(), indices.end(), m) == indices.end()) {
        throw ClusterSplitError("eigenvalue " + std::to_string(m) + " belongs to a repeated cluster [" +
                                std::to_string(members.front()) + ", " + std::to_string(members.back()) +
                                "] that was only partially requested");
      }
    }
    Eigen::VectorXd coeff = Eigen::VectorXd::Zero(spectrum.k());
    for (int m : members) coeff[m] = 1.0;
    out.push_back({members, weighted_eigenvalue_gradient(vertices, topology, spectrum, coeff)});
  }
  return out;
}

}  // namespace isospec
