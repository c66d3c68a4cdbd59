#pragma once

#include "isospec/correspondence.hpp"
#include "isospec/energy.hpp"
#include "isospec/mesh.hpp"
#include "isospec/optimize.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace isospec {

/// Area of a closed surface whose first k eigenvalues end at mu_k: 4 pi k / mu_k.
double weyl_area(const TargetSpectrum& target);
/// Area of a flat region with boundary from the two-term law
/// k = A mu / (4 pi) + P sqrt(mu) / (4 pi), taking the perimeter of the disk of area A.
double weyl_area_flat(const TargetSpectrum& target);

enum class InitKind { ellipse, sphere, mesh };
InitKind init_kind_from_string(const std::string& name);
std::string to_string(InitKind kind);

struct InitSpec {
  InitKind kind = InitKind::ellipse;
  int n = 400;
  double aspect = 1.5;  // ellipse semi-axis ratio a / b
  std::optional<Mesh> mesh;  // required for InitKind::mesh
  bool weyl_scale = true;
  std::uint64_t seed = 1;
};

///
/// Initial embedding for a recovery: a canonical ellipse (d=2) or sphere (d=3) with about
/// n vertices, or a given mesh, uniformly scaled to the Weyl area estimate of the target.
/// The flat estimate is used for meshes with boundary, the closed one otherwise.
/// Throws std::invalid_argument when mu_k is not positive.
///
Mesh init_embedding(const TargetSpectrum& target, const InitSpec& init);

/// Same triangulation as `target_mesh`, boundary mapped by arc length onto an ellipse and
/// interior placed by Tutte; the protocol where the connectivity of the target is known.
Mesh known_connectivity_init(const Mesh& target_mesh, double aspect = 1.5);

struct RecoveryTask {
  TargetSpectrum target;
  InitSpec init;
  bool known_connectivity = false;
  std::optional<Mesh> ground_truth;  // enables the IOU entry of the report (d=2)
  EnergyConfig energy;
  ScheduleConfig schedule;
};

struct RecoveryReport {
  double data_term_initial = 0.0;
  double data_term_final = 0.0;
  std::optional<double> iou;
  int steps = 0;
  int retriangulations = 0;
  double initial_area = 0.0;
  double final_area = 0.0;
  Eigen::VectorXd target_eigenvalues;
  Eigen::VectorXd final_eigenvalues;
};

nlohmann::json to_json(const RecoveryReport& report);

struct RecoveryResult {
  Mesh initial;
  Mesh result;
  OptTrace trace;
  RecoveryReport report;
};

/// Runs optimize_flat for d=2 inits and optimize_surface for d=3 (the result is the
/// deformed init). With known connectivity the init must share the target's topology
/// (checked when a ground truth is given) and retriangulation is disabled.
RecoveryResult recover_shape(const RecoveryTask& task);

struct StyleResult {
  Mesh result;  // source connectivity
  OptTrace trace;
  RecoveryReport report;
};

/// Deforms `source` so its first k eigenvalues match those of `target`.
StyleResult style_transfer(const Mesh& source, const Mesh& target, const EnergyConfig& energy,
                           const ScheduleConfig& schedule);

struct MatchConfig {
  int basis_size = 30;
  WksConfig wks;
  double commutativity_weight = 1e-3;
  EnergyConfig energy;
  ScheduleConfig schedule;
  bool baseline_only = false;
};

struct MatchReport {
  std::optional<double> geoerr_mean_before;
  std::optional<double> geoerr_mean_after;
  std::vector<double> curve_before;
  std::vector<double> curve_after;
  std::vector<double> thresholds;
  double offdiag_before = 0.0;
  std::optional<double> offdiag_after;
  std::optional<double> data_term_initial;
  std::optional<double> data_term_final;
  bool regularized = false;
};

nlohmann::json to_json(const MatchReport& report);

struct MatchResult {
  Mesh x_prime;               // isospectralized X (X itself for a baseline run)
  std::vector<int> baseline;  // X -> Y without isospectralization
  std::vector<int> map;       // X -> Y through X'; equals baseline for a baseline run
  FunctionalMap fmap_before;
  std::optional<FunctionalMap> fmap_after;
  OptTrace trace;
  MatchReport report;
};

/// Deform X toward the spectrum of Y, match X' to Y with WKS descriptors and a functional
/// map, and read the result back on X through the shared vertex ids. The baseline match of
/// X to Y is always computed. `ground_truth[x]` is the Y vertex that x truly corresponds to.
MatchResult precondition_match(const Mesh& x, const Mesh& y, const MatchConfig& config,
                               const std::optional<std::vector<int>>& ground_truth = std::nullopt);

/// First k eigenvalues of a mesh as a target spectrum.
TargetSpectrum spectrum_of(const Mesh& mesh, int k, const std::string& label = "mesh");

/// Eigenvalue lists in JSON: an array, or an object with an "eigenvalues" array.
TargetSpectrum read_target_spectrum(const std::string& path);

/// Sum i lambda_i / sum i^2 over the 1-based indices: least-squares slope of lambda_i ~ s i.
double weyl_slope(const Eigen::VectorXd& eigenvalues);

}  // namespace isospec
