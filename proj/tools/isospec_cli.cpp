// Command-line driver: spectra, shape recovery, style transfer, matching and evaluation.

#include "isospec/apps.hpp"
#include "isospec/errors.hpp"
#include "isospec/flatremesh.hpp"
#include "isospec/iou.hpp"
#include "isospec/mesh.hpp"
#include "isospec/operators.hpp"
#include "isospec/shapes.hpp"
#include "isospec/spectrum.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace isospec;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitAbort = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Options that override keys of the resolved run config when given on the command line.
class Overrides {
 public:
  template <class T>
  CLI::Option* add(CLI::App* app, const std::string& names, const std::string& key, const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(names, *value, help);
    apply_.push_back([opt, value, key](json& j) {
      if (opt->count() > 0) j[key] = *value;
    });
    return opt;
  }

  CLI::Option* add_flag(CLI::App* app, const std::string& names, const std::string& key, bool value_when_set,
                        const std::string& help) {
    CLI::Option* opt = app->add_flag(names, help);
    apply_.push_back([opt, key, value_when_set](json& j) {
      if (opt->count() > 0) j[key] = value_when_set;
    });
    return opt;
  }

  void apply(json& j) const {
    for (const auto& f : apply_) f(j);
  }

 private:
  std::vector<std::function<void(json&)>> apply_;
};

json common_defaults(bool flat) {
  return {{"seed", 1},
          {"k", 30},
          {"steps", flat ? 2000 : 3000},
          {"lr", flat ? kFlatLearningRate : kSurfaceLearningRate},
          {"w_edge", RegWeights{}.edge},
          {"w_flip", RegWeights{}.flip},
          {"w_smooth", RegWeights{}.smooth},
          {"w_volume", RegWeights{}.volume},
          {"boundary_block", 10},
          {"relax_sweeps", 20},
          {"retriangulate_period", 200},
          {"retriangulate", flat},
          {"decay_horizon", 0},
          {"rel_exit", 1e-6},
          {"cluster_tol", kDefaultClusterTolerance},
          {"checkpoint_every", 0}};
}

// defaults <- config file <- flags; unknown file keys are a usage error.
json resolve(json defaults, const std::string& config_path, const Overrides& overrides) {
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw UsageError("cannot open config " + config_path);
    json file;
    try {
      in >> file;
    } catch (const json::exception& e) {
      throw UsageError("config " + config_path + " is not valid JSON: " + e.what());
    }
    if (!file.is_object()) throw UsageError("config " + config_path + " must be a JSON object");
    for (const auto& [key, value] : file.items()) {
      if (!defaults.contains(key)) throw UsageError("unknown config key '" + key + "'");
      defaults[key] = value;
    }
  }
  overrides.apply(defaults);
  return defaults;
}

EnergyConfig energy_from(const json& c) {
  EnergyConfig e;
  e.k = c.at("k").get<int>();
  e.weights.edge = c.at("w_edge").get<double>();
  e.weights.flip = c.at("w_flip").get<double>();
  e.weights.smooth = c.at("w_smooth").get<double>();
  e.weights.volume = c.at("w_volume").get<double>();
  e.cluster_rel_tol = c.at("cluster_tol").get<double>();
  return e;
}

ScheduleConfig schedule_from(const json& c) {
  ScheduleConfig s;
  s.total_steps = c.at("steps").get<int>();
  s.adam.learning_rate = c.at("lr").get<double>();
  s.boundary_block = c.at("boundary_block").get<int>();
  s.relax_sweeps = c.at("relax_sweeps").get<int>();
  s.retriangulate_period = c.at("retriangulate_period").get<int>();
  s.retriangulate = c.at("retriangulate").get<bool>();
  s.decay_horizon = c.at("decay_horizon").get<int>();
  s.rel_exit = c.at("rel_exit").get<double>();
  s.seed = c.at("seed").get<std::uint64_t>();
  s.checkpoint_every = c.at("checkpoint_every").get<int>();
  return s;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

fs::path prepare_out(const std::string& dir) {
  if (dir.empty()) throw UsageError("--out is required");
  fs::create_directories(dir);
  return fs::path(dir);
}

void attach_checkpoints(ScheduleConfig& s, const fs::path& out) {
  if (s.checkpoint_every <= 0) return;
  fs::create_directories(out / "checkpoints");
  s.checkpoint = [out](int step, const MeshTopology& topo, const VertexMatrix& v) {
    char name[32];
    std::snprintf(name, sizeof(name), "step_%06d.off", step);
    save_mesh(out / "checkpoints" / name, topo, v);
  };
}

// Writes the trace of an aborted run before the abort is reported.
template <class F>
int run_optimization(const fs::path& out, F&& body) {
  try {
    body();
    return kExitOk;
  } catch (const OptimizationAborted& e) {
    e.trace().write_csv((out / "trace.csv").string());
    std::cerr << "numerical abort: " << e.what() << '\n';
    return kExitAbort;
  }
}

int cmd_spectrum(const std::string& mesh_path, int k, bool flat, const std::string& dump_dir, const std::string& out) {
  LoadOptions options;
  options.flat = flat;
  const Mesh mesh = load_mesh(mesh_path, options);
  const SparseSymmetric W = stiffness(mesh.vertices, mesh.topology);
  const DiagonalMass A = mass(mesh.vertices, mesh.topology);
  if (!dump_dir.empty()) {
    fs::create_directories(dump_dir);
    std::ofstream w(fs::path(dump_dir) / "stiffness.txt");
    W.write_triplets(w);
    std::ofstream a(fs::path(dump_dir) / "mass.txt");
    A.write_triplets(a);
  }
  const SpectrumResult spec = eigensolve(W, A, k);
  json j;
  j["eigenvalues"] = std::vector<double>(spec.eigenvalues.data(), spec.eigenvalues.data() + spec.k());
  j["area"] = A.total();
  j["weyl_slope"] = weyl_slope(spec.eigenvalues);
  if (out.empty()) {
    std::cout << std::setprecision(17) << j.dump(2) << '\n';
  } else {
    write_json(out, j);
  }
  return kExitOk;
}

int cmd_recover(const json& c, bool flat, const std::string& out_dir) {
  const fs::path out = prepare_out(out_dir);
  write_json(out / "config.json", c);
  const int k = c.at("k").get<int>();
  LoadOptions load;
  load.flat = flat;

  std::optional<Mesh> target_mesh;
  if (!c.at("target_mesh").get<std::string>().empty()) target_mesh = load_mesh(c.at("target_mesh").get<std::string>(), load);
  TargetSpectrum target;
  if (!c.at("target_spectrum").get<std::string>().empty()) {
    target = read_target_spectrum(c.at("target_spectrum").get<std::string>());
  } else if (target_mesh) {
    target = spectrum_of(*target_mesh, k, c.at("target_mesh").get<std::string>());
  } else {
    throw UsageError("one of --target-spectrum or --target-mesh is required");
  }
  if (target.k() < k) {
    throw UsageError("target spectrum has " + std::to_string(target.k()) + " values, k=" + std::to_string(k));
  }

  RecoveryTask task;
  task.target = target;
  task.energy = energy_from(c);
  task.schedule = schedule_from(c);
  task.known_connectivity = c.at("known_connectivity").get<bool>();
  task.init.kind = init_kind_from_string(c.at("init").get<std::string>());
  task.init.n = c.at("n").get<int>();
  task.init.aspect = c.at("aspect").get<double>();
  task.init.weyl_scale = c.at("weyl_scale").get<bool>();
  task.init.seed = c.at("seed").get<std::uint64_t>();
  if (!c.at("ground_truth").get<std::string>().empty()) {
    task.ground_truth = load_mesh(c.at("ground_truth").get<std::string>(), load);
  } else if (flat && target_mesh) {
    task.ground_truth = target_mesh;
  }
  if (task.known_connectivity) {
    if (!target_mesh) throw UsageError("--known-connectivity needs --target-mesh");
    if (!flat) throw UsageError("--known-connectivity is a flat-shape protocol");
    task.init.kind = InitKind::mesh;
    task.init.mesh = known_connectivity_init(*target_mesh, task.init.aspect);
  } else if (task.init.kind == InitKind::mesh) {
    const std::string path = c.at("init_mesh").get<std::string>();
    if (path.empty()) throw UsageError("--init mesh needs --init-mesh");
    task.init.mesh = load_mesh(path, load);
  }
  if (flat && task.init.kind == InitKind::sphere) throw UsageError("recover2d cannot start from a sphere");
  if (!flat && task.init.kind == InitKind::ellipse) throw UsageError("recover3d cannot start from an ellipse");
  attach_checkpoints(task.schedule, out);

  return run_optimization(out, [&] {
    const RecoveryResult r = recover_shape(task);
    save_mesh(out / "initial.off", r.initial.topology, r.initial.vertices);
    save_mesh(out / "result.off", r.result.topology, r.result.vertices);
    r.trace.write_csv((out / "trace.csv").string());
    json report = to_json(r.report);
    report["target"] = target.source_label;
    write_json(out / "report.json", report);
    std::cout << "data term " << r.report.data_term_initial << " -> " << r.report.data_term_final;
    if (r.report.iou) std::cout << ", IOU " << *r.report.iou;
    std::cout << '\n';
  });
}

int cmd_style(const json& c, const std::string& out_dir) {
  const fs::path out = prepare_out(out_dir);
  write_json(out / "config.json", c);
  const Mesh source = load_mesh(c.at("source").get<std::string>());
  const Mesh target = load_mesh(c.at("target").get<std::string>());
  ScheduleConfig schedule = schedule_from(c);
  attach_checkpoints(schedule, out);
  return run_optimization(out, [&] {
    const StyleResult r = style_transfer(source, target, energy_from(c), schedule);
    save_mesh(out / "result.off", r.result.topology, r.result.vertices);
    r.trace.write_csv((out / "trace.csv").string());
    write_json(out / "report.json", to_json(r.report));
    std::cout << "data term " << r.report.data_term_initial << " -> " << r.report.data_term_final << '\n';
  });
}

std::vector<int> read_index_map(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open correspondence " + path);
  std::vector<int> map(n, -1);
  int a = 0, b = 0;
  while (in >> a >> b) {
    if (a < 0 || a >= n) throw Error("correspondence " + path + ": source index out of range");
    map[a] = b;
  }
  for (int v : map) {
    if (v < 0) throw Error("correspondence " + path + " does not cover every vertex");
  }
  return map;
}

void write_index_map(const fs::path& path, const std::vector<int>& map) {
  std::ofstream out(path);
  for (std::size_t i = 0; i < map.size(); ++i) out << i << ' ' << map[i] << '\n';
}

int cmd_match(const json& c, const std::string& out_dir) {
  const fs::path out = prepare_out(out_dir);
  write_json(out / "config.json", c);
  const Mesh x = load_mesh(c.at("x").get<std::string>());
  const Mesh y = load_mesh(c.at("y").get<std::string>());
  MatchConfig m;
  m.basis_size = c.at("basis_size").get<int>();
  m.wks.n_energies = c.at("wks_energies").get<int>();
  m.wks.sigma_factor = c.at("wks_sigma").get<double>();
  m.commutativity_weight = c.at("fmap_weight").get<double>();
  m.energy = energy_from(c);
  m.schedule = schedule_from(c);
  m.baseline_only = c.at("baseline").get<bool>();
  attach_checkpoints(m.schedule, out);
  std::optional<std::vector<int>> gt;
  const std::string gt_path = c.at("ground_truth").get<std::string>();
  if (gt_path == "identity") {
    if (x.topology.n_vertices() != y.topology.n_vertices()) throw UsageError("identity ground truth needs equal vertex counts");
    gt = std::vector<int>(x.topology.n_vertices());
    for (int i = 0; i < x.topology.n_vertices(); ++i) (*gt)[i] = i;
  } else if (!gt_path.empty()) {
    gt = read_index_map(gt_path, x.topology.n_vertices());
  }
  return run_optimization(out, [&] {
    const MatchResult r = precondition_match(x, y, m, gt);
    save_mesh(out / "result.off", r.x_prime.topology, r.x_prime.vertices);
    r.trace.write_csv((out / "trace.csv").string());
    write_index_map(out / "map.txt", r.map);
    write_index_map(out / "map_baseline.txt", r.baseline);
    write_json(out / "report.json", to_json(r.report));
    if (r.report.geoerr_mean_before) std::cout << "mean geodesic error before " << *r.report.geoerr_mean_before;
    if (r.report.geoerr_mean_after) std::cout << ", after " << *r.report.geoerr_mean_after;
    std::cout << '\n';
  });
}

int cmd_eval_iou(const std::string& a, const std::string& b, bool no_align) {
  LoadOptions load;
  load.flat = true;
  const Mesh ma = load_mesh(a, load);
  const Mesh mb = load_mesh(b, load);
  const double value = iou(mesh_outline(ma.topology, ma.vertices), mesh_outline(mb.topology, mb.vertices), !no_align);
  std::cout << std::setprecision(6) << value << '\n';
  return kExitOk;
}

int cmd_validate(const std::string& path) {
  const RawMesh raw = read_raw_mesh(path);
  const ValidationReport r = validate(static_cast<int>(raw.vertices.rows()), raw.triangles, raw.vertices);
  json j = {{"is_manifold", r.is_manifold},
            {"is_connected", r.is_connected},
            {"has_degenerate_triangles", r.has_degenerate_triangles},
            {"orientation_consistent", r.orientation_consistent},
            {"boundary_loop_count", r.boundary_loop_count}};
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_make_shape(const std::string& kind, int n, std::uint64_t seed, const std::string& out) {
  Mesh mesh;
  if (kind == "square") {
    const int cells = std::max(1, static_cast<int>(std::lround(std::sqrt(n))) - 1);
    mesh = shapes::unit_square_grid(cells);
  } else if (kind == "disk" || kind == "ellipse") {
    const double a = kind == "disk" ? 1.0 : 1.5;
    mesh = shapes::ellipse_mesh(a, 1.0 / a, n, seed);
  } else if (kind == "star") {
    mesh = shapes::polygon_mesh(shapes::scale_to_area({shapes::star_loop(512)}, 1.0), n, seed);
  } else if (kind == "mickey") {
    mesh = shapes::polygon_mesh(shapes::scale_to_area({shapes::mickey_loop(1024)}, 1.0), n, seed);
  } else if (kind == "annulus") {
    mesh = shapes::annulus(0.4, 1.0, n, seed);
  } else if (kind == "sphere") {
    mesh = shapes::sphere_with_vertices(n, 0.1, seed);
  } else if (kind == "ellipsoid") {
    mesh = shapes::sphere_with_vertices(n, 0.1, seed);
    mesh.vertices = shapes::scaled(mesh.vertices, 1.6, 1.0, 0.7);
  } else if (kind == "cube") {
    mesh = shapes::unit_cube();
  } else if (kind == "tetra") {
    mesh = shapes::tetrahedron();
  } else if (kind == "bar" || kind == "folded-bar") {
    mesh = shapes::bar(3.0, 0.5, 30, 5, kind == "folded-bar");
  } else {
    throw UsageError("unknown shape '" + kind + "'");
  }
  save_mesh(out, mesh.topology, mesh.vertices);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Isospectralization: recover and deform shapes from Laplacian eigenvalues"};
  app.require_subcommand(1);

  // spectrum
  auto* spectrum = app.add_subcommand("spectrum", "Compute the first k eigenvalues of a mesh");
  std::string spectrum_mesh, dump_dir, spectrum_out;
  int spectrum_k = 30;
  bool spectrum_flat = false;
  spectrum->add_option("mesh", spectrum_mesh, "OFF or OBJ mesh")->required()->check(CLI::ExistingFile);
  spectrum->add_option("-k", spectrum_k, "Number of eigenvalues")->check(CLI::PositiveNumber);
  spectrum->add_flag("--flat", spectrum_flat, "Treat the mesh as planar (drop z)");
  spectrum->add_option("--dump-operators", dump_dir, "Write stiffness and mass triplets to this directory");
  spectrum->add_option("--out", spectrum_out, "Write the JSON here instead of stdout");

  // recover2d / recover3d
  struct RecoverCli {
    CLI::App* app;
    Overrides overrides;
    std::string config;
    std::string out;
    bool flat;
  };
  std::vector<std::unique_ptr<RecoverCli>> recovers;
  for (bool flat : {true, false}) {
    auto r = std::make_unique<RecoverCli>();
    r->flat = flat;
    r->app = app.add_subcommand(flat ? "recover2d" : "recover3d",
                                flat ? "Recover a planar shape from eigenvalues" : "Recover a surface from eigenvalues");
    auto* a = r->app;
    auto& o = r->overrides;
    o.add<std::string>(a, "--target-spectrum", "target_spectrum", "JSON eigenvalue list");
    o.add<std::string>(a, "--target-mesh", "target_mesh", "Mesh whose spectrum is the target");
    o.add<std::string>(a, "--ground-truth", "ground_truth", "Mesh to report IOU against (2D)");
    o.add<std::string>(a, "--init", "init", "ellipse, sphere or mesh");
    o.add<std::string>(a, "--init-mesh", "init_mesh", "Initial mesh for --init mesh");
    o.add<int>(a, "-n", "n", "Vertex count of the initial shape");
    o.add<double>(a, "--aspect", "aspect", "Semi-axis ratio of the ellipse init");
    o.add_flag(a, "--known-connectivity", "known_connectivity", true, "Start from the target topology");
    o.add_flag(a, "--no-weyl-scale", "weyl_scale", false, "Keep the init at its own scale");
    r->app->add_option("--config", r->config, "JSON file with flat keys");
    r->app->add_option("--out", r->out, "Run directory")->required();
    recovers.push_back(std::move(r));
  }

  // style
  auto* style = app.add_subcommand("style", "Deform a source surface toward the spectrum of a target");
  Overrides style_overrides;
  std::string style_config, style_out;
  style_overrides.add<std::string>(style, "source", "source", "Source mesh")->required();
  style_overrides.add<std::string>(style, "target", "target", "Target mesh")->required();
  style->add_option("--config", style_config, "JSON file with flat keys");
  style->add_option("--out", style_out, "Run directory")->required();

  // match
  auto* match = app.add_subcommand("match", "Correspondence with spectral preconditioning");
  Overrides match_overrides;
  std::string match_config, match_out;
  match_overrides.add<std::string>(match, "x", "x", "Source mesh")->required();
  match_overrides.add<std::string>(match, "y", "y", "Target mesh")->required();
  match_overrides.add<std::string>(match, "--ground-truth", "ground_truth",
                                   "Two-column index file, or 'identity'");
  match_overrides.add_flag(match, "--baseline", "baseline", true, "Skip isospectralization");
  match_overrides.add<int>(match, "--basis", "basis_size", "Functional map basis size");
  match_overrides.add<double>(match, "--fmap-weight", "fmap_weight", "Commutativity weight");
  match->add_option("--config", match_config, "JSON file with flat keys");
  match->add_option("--out", match_out, "Run directory")->required();

  // Optimization flags shared by the drivers.
  std::vector<std::pair<CLI::App*, Overrides*>> drivers;
  for (auto& r : recovers) drivers.emplace_back(r->app, &r->overrides);
  drivers.emplace_back(style, &style_overrides);
  drivers.emplace_back(match, &match_overrides);
  for (auto& [a, o] : drivers) {
    o->add<int>(a, "-k", "k", "Number of eigenvalues to align");
    o->add<int>(a, "--steps", "steps", "Optimization step budget");
    o->add<double>(a, "--lr", "lr", "Adam learning rate");
    o->add<std::uint64_t>(a, "--seed", "seed", "Random seed");
    o->add<int>(a, "--checkpoint-every", "checkpoint_every", "Save the mesh every N steps");
    o->add<int>(a, "--decay-horizon", "decay_horizon", "Cosine decay horizon (0: step budget)");
  }

  // eval-iou
  auto* eval_iou = app.add_subcommand("eval-iou", "IOU of two planar meshes after optimal alignment");
  std::string iou_a, iou_b;
  bool no_align = false;
  eval_iou->add_option("a", iou_a, "First mesh")->required()->check(CLI::ExistingFile);
  eval_iou->add_option("b", iou_b, "Second mesh")->required()->check(CLI::ExistingFile);
  eval_iou->add_flag("--no-align", no_align, "Compare in the given placement");

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "Report mesh validity");
  std::string validate_path;
  validate_cmd->add_option("mesh", validate_path, "OFF or OBJ mesh")->required()->check(CLI::ExistingFile);

  // make-shape
  auto* make_shape = app.add_subcommand("make-shape", "Write a procedural fixture mesh");
  std::string shape_kind, shape_out;
  int shape_n = 400;
  std::uint64_t shape_seed = 1;
  make_shape
      ->add_option("kind", shape_kind,
                   "square, disk, ellipse, star, mickey, annulus, sphere, ellipsoid, cube, tetra, bar, folded-bar")
      ->required();
  make_shape->add_option("-n", shape_n, "Approximate vertex count");
  make_shape->add_option("--seed", shape_seed, "Random seed");
  make_shape->add_option("--out", shape_out, "Output mesh")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (spectrum->parsed()) return cmd_spectrum(spectrum_mesh, spectrum_k, spectrum_flat, dump_dir, spectrum_out);
    for (auto& r : recovers) {
      if (!r->app->parsed()) continue;
      json defaults = common_defaults(r->flat);
      defaults.update({{"target_spectrum", ""},
                       {"target_mesh", ""},
                       {"ground_truth", ""},
                       {"init", r->flat ? "ellipse" : "sphere"},
                       {"init_mesh", ""},
                       {"n", r->flat ? 400 : 1000},
                       {"aspect", 1.5},
                       {"known_connectivity", false},
                       {"weyl_scale", true}});
      return cmd_recover(resolve(defaults, r->config, r->overrides), r->flat, r->out);
    }
    if (style->parsed()) {
      json defaults = common_defaults(false);
      defaults.update({{"source", ""}, {"target", ""}});
      return cmd_style(resolve(defaults, style_config, style_overrides), style_out);
    }
    if (match->parsed()) {
      json defaults = common_defaults(false);
      defaults.update({{"x", ""},
                       {"y", ""},
                       {"ground_truth", ""},
                       {"baseline", false},
                       {"basis_size", 30},
                       {"wks_energies", 100},
                       {"wks_sigma", 7.0},
                       {"fmap_weight", 1e-3}});
      return cmd_match(resolve(defaults, match_config, match_overrides), match_out);
    }
    if (eval_iou->parsed()) return cmd_eval_iou(iou_a, iou_b, no_align);
    if (validate_cmd->parsed()) return cmd_validate(validate_path);
    if (make_shape->parsed()) return cmd_make_shape(shape_kind, shape_n, shape_seed, shape_out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const json::exception& e) {
    std::cerr << "bad config value: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return kExitAbort;
  } catch (const DegenerateError& e) {
    std::cerr << "degenerate input: " << e.what() << '\n';
    return kExitAbort;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
