#include "isospec/energy.hpp"

#include "isospec/errors.hpp"
#include "isospec/geometry_detail.hpp"

#include <cmath>
#include <stdexcept>

namespace isospec {

void TargetSpectrum::check() const {
  if (mu.size() < 1) throw std::invalid_argument("target spectrum is empty");
  const double scale = std::abs(mu[mu.size() - 1]);
  if (!mu.allFinite()) throw std::invalid_argument("target spectrum has non-finite values");
  if (std::abs(mu[0]) > 1e-6 * std::max(scale, 1e-300) && std::abs(mu[0]) > 1e-12) {
    throw std::invalid_argument("target spectrum: first eigenvalue " + std::to_string(mu[0]) +
                                " is not zero (disconnected or malformed target)");
  }
  for (Eigen::Index i = 1; i < mu.size(); ++i) {
    if (mu[i] < mu[i - 1] - 1e-12 * scale) throw std::invalid_argument("target spectrum is not ascending");
  }
}

TargetSpectrum TargetSpectrum::truncated(int k) const {
  if (k > this->k()) {
    throw std::invalid_argument("target spectrum has " + std::to_string(this->k()) + " values, " + std::to_string(k) +
                                " requested");
  }
  return {mu.head(k), source_label};
}

std::pair<double, Eigen::VectorXd> spectral_loss(const Eigen::VectorXd& lambda, const Eigen::VectorXd& mu) {
  if (lambda.size() != mu.size()) {
    throw std::invalid_argument("spectral_loss: length mismatch (" + std::to_string(lambda.size()) + " vs " +
                                std::to_string(mu.size()) + ")");
  }
  double value = 0.0;
  Eigen::VectorXd d(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const double w = 1.0 / static_cast<double>(i + 1);
    const double r = lambda[i] - mu[i];
    value += w * r * r;
    d[i] = 2.0 * w * r;
  }
  return {value, d};
}

TermValue reg_edge_length(const VertexMatrix& vertices, const MeshTopology& topology, bool boundary_only) {
  TermValue out;
  out.gradient = Eigen::MatrixXd::Zero(vertices.rows(), vertices.cols());
  for (const Edge& e : topology.edges()) {
    if (boundary_only && !e.is_boundary()) continue;
    const Eigen::RowVectorXd d = vertices.row(e.v[0]) - vertices.row(e.v[1]);
    out.value += d.squaredNorm();
    out.gradient.row(e.v[0]) += 2.0 * d;
    out.gradient.row(e.v[1]) -= 2.0 * d;
  }
  return out;
}

TermValue reg_flip_penalty(const VertexMatrix& vertices, const MeshTopology& topology) {
  if (vertices.cols() != 2) throw std::invalid_argument("reg_flip_penalty requires d=2");
  TermValue out;
  out.gradient = Eigen::MatrixXd::Zero(vertices.rows(), 2);
  for (const Triangle& t : topology.triangles()) {
    const double s = detail::twice_signed_area(vertices, t);
    if (s >= 0.0) continue;
    out.value += s * s;
    const double g = 2.0 * s;
    const double ax = vertices(t[0], 0), ay = vertices(t[0], 1);
    const double bx = vertices(t[1], 0), by = vertices(t[1], 1);
    const double cx = vertices(t[2], 0), cy = vertices(t[2], 1);
    out.gradient(t[0], 0) += g * (by - cy);
    out.gradient(t[0], 1) += g * (cx - bx);
    out.gradient(t[1], 0) += g * (cy - ay);
    out.gradient(t[1], 1) += g * (ax - cx);
    out.gradient(t[2], 0) += g * (ay - by);
    out.gradient(t[2], 1) += g * (bx - ax);
  }
  return out;
}

TermValue reg_smoothness(const VertexMatrix& vertices, const SparseSymmetric& laplacian) {
  if (laplacian.dimension() != vertices.rows()) {
    throw std::invalid_argument("reg_smoothness: Laplacian is " + std::to_string(laplacian.dimension()) +
                                "-dimensional but there are " + std::to_string(vertices.rows()) + " vertices");
  }
  const Eigen::MatrixXd LV = laplacian.matrix() * vertices;
  TermValue out;
  out.value = LV.squaredNorm();
  out.gradient = 2.0 * (laplacian.matrix().transpose() * LV);
  return out;
}

TermValue reg_volume(const VertexMatrix& vertices, const MeshTopology& topology) {
  TermValue out;
  out.value = -signed_volume(vertices, topology);
  out.gradient = Eigen::MatrixXd::Zero(vertices.rows(), 3);
  for (const Triangle& t : topology.triangles()) {
    const Eigen::Vector3d a = vertices.row(t[0]).transpose();
    const Eigen::Vector3d b = vertices.row(t[1]).transpose();
    const Eigen::Vector3d c = vertices.row(t[2]).transpose();
    out.gradient.row(t[0]) -= b.cross(c).transpose() / 6.0;
    out.gradient.row(t[1]) -= c.cross(a).transpose() / 6.0;
    out.gradient.row(t[2]) -= a.cross(b).transpose() / 6.0;
  }
  return out;
}

EnergyModel::EnergyModel(MeshTopology topology, TargetSpectrum target, EnergyConfig config,
                         std::optional<VertexMatrix> base_vertices)
    : topology_(std::move(topology)), config_(config), base_(std::move(base_vertices)) {
  if (config_.k < 1) throw std::invalid_argument("EnergyConfig.k must be >= 1");
  if (config_.k > topology_.n_vertices()) {
    throw std::invalid_argument("EnergyConfig.k=" + std::to_string(config_.k) + " exceeds vertex count " +
                                std::to_string(topology_.n_vertices()));
  }
  target_ = target.truncated(config_.k);
  target_.check();
  if (config_.displacement_mode && !base_) throw std::invalid_argument("displacement mode needs base vertices");
  laplacian_ = graph_laplacian(topology_);
  if (config_.normalize_data) {
    double norm = 0.0;
    for (int i = 0; i < target_.k(); ++i) norm += target_.mu[i] * target_.mu[i] / static_cast<double>(i + 1);
    normalization_ = norm > 0.0 ? norm : 1.0;
  }
}

VertexMatrix EnergyModel::vertices_of(const Eigen::MatrixXd& variable) const {
  if (config_.displacement_mode) {
    if (variable.rows() != base_->rows() || variable.cols() != base_->cols()) {
      throw std::invalid_argument("displacement shape does not match base vertices");
    }
    return *base_ + variable;
  }
  return variable;
}

double EnergyModel::data_with_gradient(const VertexMatrix& vertices, Eigen::MatrixXd* gradient,
                                       Eigen::VectorXd* lambda) const {
  const SpectrumResult spec = eigensolve(vertices, topology_, config_.k, config_.cluster_rel_tol);
  if (lambda) *lambda = spec.eigenvalues;
  double value = 0.0;
  Eigen::VectorXd coeff = Eigen::VectorXd::Zero(config_.k);
  for (const auto& cluster : spec.clusters) {
    double mean = 0.0;
    for (int i : cluster) mean += spec.eigenvalues[i];
    mean /= static_cast<double>(cluster.size());
    double d_mean = 0.0;
    for (int i : cluster) {
      const double w = 1.0 / static_cast<double>(i + 1);
      const double r = mean - target_.mu[i];
      value += w * r * r;
      d_mean += 2.0 * w * r;
    }
    for (int i : cluster) coeff[i] = d_mean / static_cast<double>(cluster.size());
  }
  value /= normalization_;
  if (gradient) *gradient = weighted_eigenvalue_gradient(vertices, topology_, spec, coeff / normalization_);
  return value;
}

double EnergyModel::data_term(const VertexMatrix& vertices) const { return data_with_gradient(vertices, nullptr, nullptr); }

EnergyBreakdown EnergyModel::evaluate(const Eigen::MatrixXd& variable, const RegWeights& weights) const {
  const VertexMatrix V = vertices_of(variable);
  if (V.rows() != topology_.n_vertices()) throw std::invalid_argument("vertex count does not match topology");
  if (!V.allFinite()) throw NumericalAbort("non-finite vertex coordinates");
  EnergyBreakdown out;
  out.weights = weights;
  out.data_term = data_with_gradient(V, &out.gradient, &out.eigenvalues);
  out.total = out.data_term;
  auto add = [&](double weight, const TermValue& term, double& slot) {
    slot = term.value;
    if (weight == 0.0) return;
    out.total += weight * term.value;
    out.gradient += weight * term.gradient;
  };
  if (config_.flat_mode) {
    if (V.cols() != 2) throw std::invalid_argument("flat mode requires a 2D embedding");
    add(weights.edge, reg_edge_length(V, topology_, true), out.reg_edge);
    add(weights.flip, reg_flip_penalty(V, topology_), out.reg_flip);
  } else {
    add(weights.smooth, reg_smoothness(V, laplacian_), out.reg_smooth);
    // Volume is only defined for closed surfaces; the term stays inactive on open meshes.
    if (V.cols() == 3 && topology_.is_closed()) add(weights.volume, reg_volume(V, topology_), out.reg_volume);
  }
  return out;
}

EnergyBreakdown total_energy(const Eigen::MatrixXd& variable, const std::optional<VertexMatrix>& base_vertices,
                             const MeshTopology& topology, const TargetSpectrum& target, const EnergyConfig& config) {
  return EnergyModel(topology, target, config, base_vertices).evaluate(variable);
}

}  // namespace isospec
