#pragma once

#include "isospec/mesh.hpp"
#include "isospec/operators.hpp"
#include "isospec/spectrum.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>

namespace isospec {

/// The eigenvalue sequence to reproduce. Must be ascending, nonnegative, with mu_1 ~ 0.
struct TargetSpectrum {
  Eigen::VectorXd mu;
  std::string source_label;

  int k() const { return static_cast<int>(mu.size()); }
  /// Throws std::invalid_argument if the sequence is not a plausible connected-shape spectrum.
  void check() const;
  /// First k values.
  TargetSpectrum truncated(int k) const;
};

struct RegWeights {
  double edge = 0.05;    // flat: squared boundary edge lengths
  double flip = 10.0;    // flat: inverted triangles
  // ||L V||^2 of a fine mesh is orders of magnitude above the normalized data term, so the
  // surface weights are small; larger values stall the data term well before the decay ends.
  double smooth = 2e-3;  // surface: ||L V||_F^2
  double volume = 2e-4;  // surface: negative enclosed volume

  RegWeights scaled(double factor) const { return {edge * factor, flip * factor, smooth * factor, volume * factor}; }
};

struct EnergyConfig {
  int k = 30;
  RegWeights weights;
  /// Flat shapes use the edge and flip terms, surfaces the smoothness and volume terms.
  bool flat_mode = true;
  /// The optimization variable is a displacement D added to fixed base vertices.
  bool displacement_mode = false;
  double cluster_rel_tol = kDefaultClusterTolerance;
  /// Divide the data term by sum_i mu_i^2 / i.
  bool normalize_data = true;
};

struct TermValue {
  double value = 0.0;
  Eigen::MatrixXd gradient;
};

struct EnergyBreakdown {
  double data_term = 0.0;
  double reg_edge = 0.0;
  double reg_flip = 0.0;
  double reg_smooth = 0.0;
  double reg_volume = 0.0;
  RegWeights weights;  // weights the total was formed with
  double total = 0.0;
  Eigen::MatrixXd gradient;     // d total / d variable
  Eigen::VectorXd eigenvalues;  // current first-k spectrum
};

/// sum_i (1/i) (lambda_i - mu_i)^2 with 1-based i, and its derivative (2/i)(lambda_i - mu_i).
std::pair<double, Eigen::VectorXd> spectral_loss(const Eigen::VectorXd& lambda, const Eigen::VectorXd& mu);

/// Sum of squared lengths over boundary edges (all edges when boundary_only is false).
TermValue reg_edge_length(const VertexMatrix& vertices, const MeshTopology& topology, bool boundary_only = true);

/// sum_f min(0, s_f)^2 with s_f twice the signed area; zero for counter-clockwise meshes. d=2.
TermValue reg_flip_penalty(const VertexMatrix& vertices, const MeshTopology& topology);

/// ||L V||_F^2 for a fixed (initial) graph Laplacian L.
TermValue reg_smoothness(const VertexMatrix& vertices, const SparseSymmetric& laplacian);

/// Negative signed volume of a closed surface.
TermValue reg_volume(const VertexMatrix& vertices, const MeshTopology& topology);

///
/// Objective of the isospectral problem: weighted spectral data term plus the regularizers
/// of the active mode, assembled with analytic gradients.
///
/// Repeated eigenvalues are handled per cluster: a cluster spanning indices I contributes
/// sum_{i in I} (1/i) (mean_I lambda - mu_i)^2, which stays differentiable when eigenvalues
/// coalesce. The model is fixed to one topology; the graph Laplacian used by the smoothness
/// term is taken from that topology at construction.
///
class EnergyModel {
 public:
  EnergyModel(MeshTopology topology, TargetSpectrum target, EnergyConfig config,
              std::optional<VertexMatrix> base_vertices = std::nullopt);

  /// `variable` is V, or the displacement D when the config's displacement_mode is set.
  EnergyBreakdown evaluate(const Eigen::MatrixXd& variable, const RegWeights& weights) const;
  EnergyBreakdown evaluate(const Eigen::MatrixXd& variable) const { return evaluate(variable, config_.weights); }

  /// Data term only (no gradient).
  double data_term(const VertexMatrix& vertices) const;

  const MeshTopology& topology() const { return topology_; }
  const EnergyConfig& config() const { return config_; }
  const TargetSpectrum& target() const { return target_; }
  VertexMatrix vertices_of(const Eigen::MatrixXd& variable) const;

 private:
  double data_with_gradient(const VertexMatrix& vertices, Eigen::MatrixXd* gradient, Eigen::VectorXd* lambda) const;

  MeshTopology topology_;
  TargetSpectrum target_;
  EnergyConfig config_;
  std::optional<VertexMatrix> base_;
  SparseSymmetric laplacian_;
  double normalization_ = 1.0;
};

/// One-shot evaluation; `base_vertices` is required when displacement_mode is set.
EnergyBreakdown total_energy(const Eigen::MatrixXd& variable, const std::optional<VertexMatrix>& base_vertices,
                             const MeshTopology& topology, const TargetSpectrum& target, const EnergyConfig& config);

}  // namespace isospec
