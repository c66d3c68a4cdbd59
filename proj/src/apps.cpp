#include "isospec/apps.hpp"

#include "isospec/errors.hpp"
#include "isospec/iou.hpp"
#include "isospec/shapes.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace isospec {

namespace {

constexpr double kPi = std::numbers::pi;

double last_positive(const TargetSpectrum& target) {
  if (target.k() < 1 || !(target.mu[target.k() - 1] > 0.0)) {
    throw std::invalid_argument("Weyl estimate needs a positive last eigenvalue");
  }
  return target.mu[target.k() - 1];
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

bool same_topology(const MeshTopology& a, const MeshTopology& b) {
  return a.n_vertices() == b.n_vertices() && a.triangles() == b.triangles();
}

}  // namespace

double weyl_area(const TargetSpectrum& target) { return 4.0 * kPi * target.k() / last_positive(target); }

double weyl_area_flat(const TargetSpectrum& target) {
  const double mu = last_positive(target);
  // k = a s^2 + b s with s = sqrt(A).
  const double a = mu / (4.0 * kPi);
  const double b = std::sqrt(mu) / (2.0 * std::sqrt(kPi));
  const double s = (-b + std::sqrt(b * b + 4.0 * a * target.k())) / (2.0 * a);
  return s * s;
}

InitKind init_kind_from_string(const std::string& name) {
  if (name == "ellipse") return InitKind::ellipse;
  if (name == "sphere") return InitKind::sphere;
  if (name == "mesh") return InitKind::mesh;
  throw std::invalid_argument("unknown init kind '" + name + "' (expected ellipse, sphere or mesh)");
}

std::string to_string(InitKind kind) {
  switch (kind) {
    case InitKind::ellipse:
      return "ellipse";
    case InitKind::sphere:
      return "sphere";
    case InitKind::mesh:
      return "mesh";
  }
  return "unknown";
}

Mesh init_embedding(const TargetSpectrum& target, const InitSpec& init) {
  last_positive(target);
  Mesh mesh;
  switch (init.kind) {
    case InitKind::ellipse: {
      const double b = 1.0 / std::sqrt(init.aspect);
      mesh = shapes::ellipse_mesh(init.aspect * b, b, init.n, init.seed);
      break;
    }
    case InitKind::sphere:
      mesh = shapes::sphere_with_vertices(init.n, 0.1, init.seed);
      break;
    case InitKind::mesh:
      if (!init.mesh) throw std::invalid_argument("init kind 'mesh' needs a mesh");
      mesh = *init.mesh;
      break;
  }
  if (!init.weyl_scale) return mesh;
  const double area = mesh.topology.is_closed() ? weyl_area(target) : weyl_area_flat(target);
  mesh.vertices = shapes::with_area(mesh.topology, mesh.vertices, area);
  return mesh;
}

Mesh known_connectivity_init(const Mesh& target_mesh, double aspect) {
  if (target_mesh.dim() != 2) throw std::invalid_argument("known_connectivity_init requires a flat mesh");
  const double b = 1.0 / std::sqrt(aspect);
  Mesh out;
  out.topology = target_mesh.topology;
  out.vertices = shapes::ellipse_embedding(target_mesh.topology, target_mesh.vertices, aspect * b, b);
  return out;
}

nlohmann::json to_json(const RecoveryReport& r) {
  nlohmann::json j;
  j["iou"] = r.iou ? nlohmann::json(*r.iou) : nlohmann::json(nullptr);
  j["data_term_initial"] = r.data_term_initial;
  j["data_term_final"] = r.data_term_final;
  j["steps"] = r.steps;
  j["retriangulations"] = r.retriangulations;
  j["initial_area"] = r.initial_area;
  j["final_area"] = r.final_area;
  j["target_eigenvalues"] = to_vector(r.target_eigenvalues);
  j["final_eigenvalues"] = to_vector(r.final_eigenvalues);
  return j;
}

RecoveryResult recover_shape(const RecoveryTask& task) {
  RecoveryResult out;
  out.initial = init_embedding(task.target, task.init);
  ScheduleConfig schedule = task.schedule;
  if (task.known_connectivity) {
    schedule.retriangulate = false;
    if (task.ground_truth && !same_topology(out.initial.topology, task.ground_truth->topology)) {
      throw std::invalid_argument("known connectivity: init topology differs from the target topology");
    }
  }
  const Mesh& init = out.initial;
  RecoveryReport& report = out.report;
  report.initial_area = shapes::mesh_area(init.topology, init.vertices);
  report.target_eigenvalues = task.target.truncated(std::min(task.energy.k, task.target.k())).mu;
  if (init.dim() == 2) {
    FlatResult r = optimize_flat(init.topology, init.vertices, task.target, task.energy, schedule);
    out.result.topology = std::move(r.topology);
    out.result.vertices = std::move(r.vertices);
    out.trace = std::move(r.trace);
    report.data_term_initial = r.initial_data;
    report.data_term_final = r.final_data;
    report.final_eigenvalues = r.final_eigenvalues;
    report.retriangulations = r.retriangulations;
  } else {
    SurfaceResult r = optimize_surface(init.topology, init.vertices, task.target, task.energy, schedule);
    out.result.topology = init.topology;
    out.result.vertices = std::move(r.vertices);
    out.trace = std::move(r.trace);
    report.data_term_initial = r.initial_data;
    report.data_term_final = r.final_data;
    report.final_eigenvalues = r.final_eigenvalues;
  }
  report.steps = static_cast<int>(out.trace.records.size());
  report.final_area = shapes::mesh_area(out.result.topology, out.result.vertices);
  if (task.ground_truth && task.ground_truth->dim() == 2 && out.result.dim() == 2) {
    report.iou = iou(mesh_outline(task.ground_truth->topology, task.ground_truth->vertices),
                     mesh_outline(out.result.topology, out.result.vertices), true);
  }
  return out;
}

TargetSpectrum spectrum_of(const Mesh& mesh, int k, const std::string& label) {
  return {eigensolve(mesh.vertices, mesh.topology, k).eigenvalues, label};
}

StyleResult style_transfer(const Mesh& source, const Mesh& target, const EnergyConfig& energy,
                           const ScheduleConfig& schedule) {
  if (source.dim() != 3 || target.dim() != 3) throw std::invalid_argument("style_transfer requires 3D meshes");
  const TargetSpectrum mu = spectrum_of(target, energy.k, "style target");
  SurfaceResult r = optimize_surface(source.topology, source.vertices, mu, energy, schedule);
  StyleResult out;
  out.result.topology = source.topology;
  out.result.vertices = std::move(r.vertices);
  out.trace = std::move(r.trace);
  out.report.data_term_initial = r.initial_data;
  out.report.data_term_final = r.final_data;
  out.report.steps = static_cast<int>(out.trace.records.size());
  out.report.initial_area = shapes::mesh_area(source.topology, source.vertices);
  out.report.final_area = shapes::mesh_area(out.result.topology, out.result.vertices);
  out.report.target_eigenvalues = mu.mu;
  out.report.final_eigenvalues = r.final_eigenvalues;
  return out;
}

nlohmann::json to_json(const MatchReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["geoerr_mean_before"] = opt(r.geoerr_mean_before);
  j["geoerr_mean_after"] = opt(r.geoerr_mean_after);
  j["curve"] = r.curve_after.empty() ? r.curve_before : r.curve_after;
  j["curve_before"] = r.curve_before;
  j["curve_after"] = r.curve_after;
  j["thresholds"] = r.thresholds;
  j["offdiag_before"] = r.offdiag_before;
  j["offdiag_after"] = opt(r.offdiag_after);
  j["data_term_initial"] = opt(r.data_term_initial);
  j["data_term_final"] = opt(r.data_term_final);
  j["regularized"] = r.regularized;
  return j;
}

MatchResult precondition_match(const Mesh& x, const Mesh& y, const MatchConfig& config,
                               const std::optional<std::vector<int>>& ground_truth) {
  if (x.dim() != 3 || y.dim() != 3) throw std::invalid_argument("precondition_match requires 3D meshes");
  const int k = config.basis_size;
  const SpectralBasis basis_y = spectral_basis(y.vertices, y.topology, k);
  const Eigen::MatrixXd desc_y = wks_descriptors(basis_y.spectrum, config.wks);

  auto match = [&](const Mesh& source, FunctionalMap& fmap) {
    const SpectralBasis basis = spectral_basis(source.vertices, source.topology, k);
    fmap = functional_map(basis, basis_y, wks_descriptors(basis.spectrum, config.wks), desc_y,
                          config.commutativity_weight);
    return pointwise_map(fmap, basis.spectrum, basis_y.spectrum);
  };

  MatchResult out;
  out.baseline = match(x, out.fmap_before);
  out.report.offdiag_before = off_diagonal_ratio(out.fmap_before.C);
  out.report.regularized = out.fmap_before.regularized;
  out.x_prime = x;
  out.map = out.baseline;
  if (!config.baseline_only) {
    const TargetSpectrum target = spectrum_of(y, config.energy.k, "match target");
    SurfaceResult r = optimize_surface(x.topology, x.vertices, target, config.energy, config.schedule);
    out.x_prime.vertices = std::move(r.vertices);
    out.trace = std::move(r.trace);
    out.report.data_term_initial = r.initial_data;
    out.report.data_term_final = r.final_data;
    FunctionalMap after;
    out.map = match(out.x_prime, after);
    out.report.offdiag_after = off_diagonal_ratio(after.C);
    out.report.regularized = out.report.regularized || after.regularized;
    out.fmap_after = std::move(after);
  }
  if (ground_truth) {
    const GeodesicErrorReport before = geodesic_error(out.baseline, *ground_truth, y.topology, y.vertices);
    out.report.geoerr_mean_before = before.mean;
    out.report.curve_before = before.curve;
    out.report.thresholds = before.thresholds;
    if (!config.baseline_only) {
      const GeodesicErrorReport after = geodesic_error(out.map, *ground_truth, y.topology, y.vertices);
      out.report.geoerr_mean_after = after.mean;
      out.report.curve_after = after.curve;
    }
  }
  return out;
}

TargetSpectrum read_target_spectrum(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open target spectrum " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("target spectrum " + path + " is not valid JSON: " + e.what());
  }
  const nlohmann::json& values = j.is_object() ? j.at("eigenvalues") : j;
  if (!values.is_array()) throw Error("target spectrum " + path + " has no eigenvalue array");
  TargetSpectrum t;
  t.mu.resize(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) t.mu[static_cast<Eigen::Index>(i)] = values[i].get<double>();
  t.source_label = path;
  t.check();
  return t;
}

double weyl_slope(const Eigen::VectorXd& eigenvalues) {
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double idx = static_cast<double>(i + 1);
    num += idx * eigenvalues[i];
    den += idx * idx;
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace isospec
