#include "isospec/correspondence.hpp"

#include "isospec/errors.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_map>

namespace isospec {

SpectralBasis spectral_basis(const VertexMatrix& vertices, const MeshTopology& topology, int k) {
  SpectralBasis basis;
  basis.mass = mass(vertices, topology);
  basis.spectrum = eigensolve(stiffness(vertices, topology), basis.mass, k);
  return basis;
}

Eigen::MatrixXd wks_descriptors(const SpectrumResult& spectrum, const WksConfig& config) {
  const int k = spectrum.k();
  if (k < 3) throw std::invalid_argument("wks_descriptors needs k >= 3");
  if (!(spectrum.eigenvalues[1] > 0.0)) throw std::invalid_argument("wks_descriptors needs lambda_2 > 0");
  if (config.n_energies < 1) throw std::invalid_argument("wks_descriptors needs at least one energy");
  const Eigen::Index n = spectrum.eigenvectors.rows();
  Eigen::VectorXd log_lambda(k - 1);
  for (int i = 1; i < k; ++i) log_lambda[i - 1] = std::log(std::max(spectrum.eigenvalues[i], spectrum.eigenvalues[1]));
  const double e_min = log_lambda[0];
  const double e_max = log_lambda[k - 2];
  const double delta = config.n_energies > 1 ? (e_max - e_min) / (config.n_energies - 1) : 0.0;
  const double sigma = delta > 0.0 ? config.sigma_factor * delta : 1.0;
  const Eigen::MatrixXd phi2 = spectrum.eigenvectors.rightCols(k - 1).array().square();
  Eigen::MatrixXd out(n, config.n_energies);
  for (int e = 0; e < config.n_energies; ++e) {
    const double energy = e_min + e * delta;
    Eigen::VectorXd g = (-(energy - log_lambda.array()).square() / (2.0 * sigma * sigma)).exp();
    const double total = g.sum();
    out.col(e) = phi2 * (g / total);
  }
  return out;
}

FunctionalMap functional_map(const SpectralBasis& x, const SpectralBasis& y, const Eigen::MatrixXd& desc_x,
                             const Eigen::MatrixXd& desc_y, double commutativity_weight) {
  if (desc_x.cols() != desc_y.cols()) throw std::invalid_argument("functional_map: descriptor counts differ");
  const Eigen::MatrixXd& phi_x = x.spectrum.eigenvectors;
  const Eigen::MatrixXd& phi_y = y.spectrum.eigenvectors;
  if (desc_x.rows() != phi_x.rows() || desc_y.rows() != phi_y.rows()) {
    throw std::invalid_argument("functional_map: descriptor rows do not match the vertex counts");
  }
  const Eigen::MatrixXd a = phi_x.transpose() * x.mass.values.asDiagonal() * desc_x;  // k_X x q
  const Eigen::MatrixXd b = phi_y.transpose() * y.mass.values.asDiagonal() * desc_y;  // k_Y x q
  const Eigen::MatrixXd gram = a * a.transpose();
  const Eigen::MatrixXd rhs = a * b.transpose();  // column i: right side for row i of C
  const Eigen::VectorXd& lx = x.spectrum.eigenvalues;
  const Eigen::VectorXd& ly = y.spectrum.eigenvalues;
  const Eigen::Index kx = lx.size(), ky = ly.size();

  FunctionalMap out;
  out.C.resize(ky, kx);
  const double scale = std::max(gram.diagonal().maxCoeff(), 1.0);
  for (Eigen::Index i = 0; i < ky; ++i) {
    Eigen::MatrixXd system = gram;
    for (Eigen::Index j = 0; j < kx; ++j) {
      const double gap = ly[i] - lx[j];
      system(j, j) += commutativity_weight * gap * gap;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(system);
    const Eigen::VectorXd d = ldlt.vectorD();
    const bool deficient = ldlt.info() != Eigen::Success || d.minCoeff() <= 1e-12 * scale;
    if (deficient) {
      system.diagonal().array() += 1e-9 * scale;
      ldlt.compute(system);
      out.regularized = true;
    }
    out.C.row(i) = ldlt.solve(rhs.col(i)).transpose();
  }
  if (!out.C.allFinite()) throw NumericalAbort("functional_map: non-finite solution");
  return out;
}

std::vector<int> pointwise_map(const FunctionalMap& map, const SpectrumResult& x, const SpectrumResult& y) {
  const Eigen::MatrixXd& C = map.C;
  if (C.cols() != x.k() || C.rows() != y.k()) throw std::invalid_argument("pointwise_map: C does not match the bases");
  const Eigen::MatrixXd query = x.eigenvectors * C.transpose();  // n_X x k_Y
  const Eigen::MatrixXd& target = y.eigenvectors;
  const Eigen::VectorXd target_norms = target.rowwise().squaredNorm();
  std::vector<int> out(query.rows(), 0);
  for (Eigen::Index v = 0; v < query.rows(); ++v) {
    const Eigen::VectorXd d = target_norms - 2.0 * target * query.row(v).transpose();
    Eigen::Index best = 0;
    for (Eigen::Index u = 1; u < d.size(); ++u) {
      if (d[u] < d[best]) best = u;
    }
    out[v] = static_cast<int>(best);
  }
  return out;
}

double off_diagonal_ratio(const Eigen::MatrixXd& C) {
  const double total = C.squaredNorm();
  if (total == 0.0) return 0.0;
  double diag = 0.0;
  for (Eigen::Index i = 0; i < std::min(C.rows(), C.cols()); ++i) diag += C(i, i) * C(i, i);
  return (total - diag) / total;
}

std::vector<double> graph_distances(const MeshTopology& topology, const VertexMatrix& vertices, int source) {
  const int n = topology.n_vertices();
  if (source < 0 || source >= n) throw std::invalid_argument("graph_distances: source out of range");
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (d > dist[v]) continue;
    for (int u : topology.neighbors(v)) {
      const double nd = d + (vertices.row(u) - vertices.row(v)).norm();
      if (nd < dist[u]) {
        dist[u] = nd;
        queue.emplace(nd, u);
      }
    }
  }
  return dist;
}

GeodesicErrorReport geodesic_error(const std::vector<int>& map, const std::vector<int>& ground_truth,
                                   const MeshTopology& topology_y, const VertexMatrix& vertices_y) {
  if (map.size() != ground_truth.size()) throw std::invalid_argument("geodesic_error: map sizes differ");
  const int n_y = topology_y.n_vertices();
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (map[i] < 0 || map[i] >= n_y || ground_truth[i] < 0 || ground_truth[i] >= n_y) {
      throw std::invalid_argument("geodesic_error: vertex index out of range");
    }
  }
  double area = 0.0;
  for (double a : triangle_areas(vertices_y, topology_y)) area += a;
  const double norm = std::sqrt(area);

  GeodesicErrorReport report;
  report.per_vertex.resize(map.size());
  std::unordered_map<int, std::vector<double>> cache;
  for (std::size_t i = 0; i < map.size(); ++i) {
    auto it = cache.find(ground_truth[i]);
    if (it == cache.end()) {
      it = cache.emplace(ground_truth[i], graph_distances(topology_y, vertices_y, ground_truth[i])).first;
      for (double d : it->second) {
        if (!std::isfinite(d)) throw MeshError("geodesic_error: target mesh is disconnected");
      }
    }
    report.per_vertex[i] = it->second[map[i]] / norm;
  }
  double sum = 0.0;
  for (double e : report.per_vertex) sum += e;
  report.mean = map.empty() ? 0.0 : sum / static_cast<double>(map.size());
  std::vector<double> sorted = report.per_vertex;
  std::sort(sorted.begin(), sorted.end());
  for (int s = 0; s < kCurveSamples; ++s) {
    const double t = kCurveMaxThreshold * s / (kCurveSamples - 1);
    const auto below = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    report.thresholds.push_back(t);
    report.curve.push_back(sorted.empty() ? 1.0 : static_cast<double>(below) / static_cast<double>(sorted.size()));
  }
  return report;
}

std::vector<double> geodesic_distortion(const std::vector<int>& map, const MeshTopology& topology_x,
                                        const VertexMatrix& vertices_x, const MeshTopology& topology_y,
                                        const VertexMatrix& vertices_y) {
  if (static_cast<int>(map.size()) != topology_x.n_vertices()) {
    throw std::invalid_argument("geodesic_distortion: map size differs from the vertex count of X");
  }
  std::unordered_map<int, std::vector<double>> cache;
  std::vector<double> out(map.size(), 0.0);
  for (int v = 0; v < topology_x.n_vertices(); ++v) {
    auto it = cache.find(map[v]);
    if (it == cache.end()) it = cache.emplace(map[v], graph_distances(topology_y, vertices_y, map[v])).first;
    const auto nbrs = topology_x.neighbors(v);
    if (nbrs.empty()) continue;
    double sum = 0.0;
    for (int u : nbrs) {
      const double dx = (vertices_x.row(u) - vertices_x.row(v)).norm();
      sum += std::abs(it->second[map[u]] - dx) / dx;
    }
    out[v] = sum / static_cast<double>(nbrs.size());
  }
  return out;
}

}  // namespace isospec
