#include "isospec/optimize.hpp"

#include "isospec/flatremesh.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace isospec {

AdamState::AdamState(const AdamConfig& cfg, Eigen::Index rows, Eigen::Index cols) : config(cfg) { reset(rows, cols); }

void AdamState::reset(Eigen::Index rows, Eigen::Index cols) {
  step = 0;
  m = Eigen::MatrixXd::Zero(rows, cols);
  v = Eigen::MatrixXd::Zero(rows, cols);
}

void adam_step(AdamState& state, Eigen::MatrixXd& variable, const Eigen::MatrixXd& gradient) {
  if (gradient.rows() != variable.rows() || gradient.cols() != variable.cols()) {
    throw std::invalid_argument("adam_step: gradient shape does not match the variable");
  }
  if (state.m.rows() != variable.rows() || state.m.cols() != variable.cols()) {
    throw std::invalid_argument("adam_step: moment shape does not match the variable");
  }
  if (!gradient.allFinite()) throw NumericalAbort("adam_step: non-finite gradient");
  const AdamConfig& c = state.config;
  ++state.step;
  state.m = c.beta1 * state.m + (1.0 - c.beta1) * gradient;
  state.v = c.beta2 * state.v + (1.0 - c.beta2) * gradient.cwiseAbs2();
  const double bias1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  variable.array() -= c.learning_rate * (state.m.array() / bias1) / ((state.v.array() / bias2).sqrt() + c.epsilon);
}

double cosine_weight(double w0, long step, long horizon) {
  if (horizon < 1) throw std::invalid_argument("cosine_weight: horizon must be >= 1");
  const double t = static_cast<double>(std::min(std::max(step, 0L), horizon)) / static_cast<double>(horizon);
  return w0 * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

RegWeights decayed_weights(const RegWeights& w0, long step, long horizon) {
  // The flip penalty keeps its weight: the spectrum uses unsigned areas, so once it fades a
  // folded mesh can match the target eigenvalues while no longer being an embedding.
  return {cosine_weight(w0.edge, step, horizon), w0.flip,
          cosine_weight(w0.smooth, step, horizon), cosine_weight(w0.volume, step, horizon)};
}

void ScheduleConfig::check() const {
  if (total_steps < 1) throw std::invalid_argument("total_steps must be >= 1");
  if (boundary_block < 1) throw std::invalid_argument("boundary_block must be >= 1");
  if (retriangulate_period < 1) throw std::invalid_argument("retriangulate_period must be >= 1");
  if (relax_sweeps < 0) throw std::invalid_argument("relax_sweeps must be >= 0");
  if (decay_horizon < 0) throw std::invalid_argument("decay_horizon must be >= 0");
  if (checkpoint_every < 0) throw std::invalid_argument("checkpoint_every must be >= 0");
}

ScheduleConfig default_schedule(bool flat) {
  ScheduleConfig s;
  s.total_steps = flat ? 2000 : 3000;
  s.adam.learning_rate = flat ? kFlatLearningRate : kSurfaceLearningRate;
  s.retriangulate = flat;
  return s;
}

void OptTrace::write_csv(std::ostream& out) const {
  out << "step,data,reg_edge,reg_flip,reg_smooth,reg_vol,total,event\n";
  out << std::setprecision(17);
  for (const TraceRecord& r : records) {
    out << r.step << ',' << r.data << ',' << r.reg_edge << ',' << r.reg_flip << ',' << r.reg_smooth << ','
        << r.reg_volume << ',' << r.total << ',';
    for (std::size_t i = 0; i < r.events.size(); ++i) out << (i ? "+" : "") << r.events[i];
    out << '\n';
  }
}

void OptTrace::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write trace to " + path);
  write_csv(out);
}

namespace {

TraceRecord make_record(int step, const EnergyBreakdown& e) {
  TraceRecord r;
  r.step = step;
  r.data = e.data_term;
  r.reg_edge = e.reg_edge;
  r.reg_flip = e.reg_flip;
  r.reg_smooth = e.reg_smooth;
  r.reg_volume = e.reg_volume;
  r.total = e.total;
  r.weights = e.weights;
  return r;
}

bool converged(double data, double initial, const ScheduleConfig& s) {
  return data <= s.rel_exit * initial || data <= s.abs_exit;
}

int interior_count(const MeshTopology& topo) {
  int count = 0;
  for (int v = 0; v < topo.n_vertices(); ++v) count += topo.is_boundary_vertex(v) ? 0 : 1;
  return count;
}

}  // namespace

FlatResult optimize_flat(const MeshTopology& topology, const VertexMatrix& v0, const TargetSpectrum& target,
                         const EnergyConfig& energy, const ScheduleConfig& schedule) {
  schedule.check();
  if (v0.cols() != 2) throw std::invalid_argument("optimize_flat requires a 2D embedding");
  if (topology.is_closed()) throw std::invalid_argument("optimize_flat requires at least one boundary loop");
  EnergyConfig cfg = energy;
  cfg.flat_mode = true;
  cfg.displacement_mode = false;

  FlatResult result;
  result.topology = topology;
  result.vertices = v0;
  EnergyModel model(result.topology, target, cfg);
  AdamState adam(schedule.adam, v0.rows(), 2);
  const int n_interior = interior_count(topology);
  std::uint64_t remesh_seed = schedule.seed;

  auto remesh = [&]() {
    RetriangulationResult r = retriangulate(result.topology, result.vertices, n_interior, remesh_seed++);
    result.topology = std::move(r.topology);
    result.vertices = relax_interior(result.topology, r.vertices, schedule.relax_sweeps);
    model = EnergyModel(result.topology, target, cfg);
    adam.reset(result.vertices.rows(), 2);
    ++result.retriangulations;
  };

  auto evaluate = [&](const RegWeights& w, TraceRecord* pending) {
    try {
      return model.evaluate(result.vertices, w);
    } catch (const DegenerateError& e) {
      if (!schedule.retriangulate) throw OptimizationAborted(std::string("degenerate mesh: ") + e.what(), result.trace);
    }
    try {
      remesh();
      if (pending) pending->events.push_back(trace_event::retriangulate);
      return model.evaluate(result.vertices, w);
    } catch (const Error& e) {
      throw OptimizationAborted(std::string("unrecoverable degeneracy after retriangulation: ") + e.what(),
                                result.trace);
    }
  };

  const long horizon = schedule.horizon();
  for (int step = 0; step < schedule.total_steps; ++step) {
    const RegWeights w = decayed_weights(cfg.weights, step, horizon);
    TraceRecord pending;
    EnergyBreakdown e = evaluate(w, &pending);
    TraceRecord record = make_record(step, e);
    record.events = pending.events;
    if (step == 0) result.initial_data = e.data_term;
    if (converged(e.data_term, result.initial_data, schedule)) {
      result.trace.records.push_back(std::move(record));
      break;
    }
    for (int v = 0; v < result.topology.n_vertices(); ++v) {
      if (!result.topology.is_boundary_vertex(v)) e.gradient.row(v).setZero();
    }
    try {
      adam_step(adam, result.vertices, e.gradient);
    } catch (const NumericalAbort& err) {
      result.trace.records.push_back(std::move(record));
      throw OptimizationAborted(err.what(), result.trace);
    }
    record.events.push_back(trace_event::boundary_step);
    if ((step + 1) % schedule.boundary_block == 0) {
      result.vertices = relax_interior(result.topology, result.vertices, schedule.relax_sweeps);
      record.events.push_back(trace_event::interior_relax);
    }
    if (schedule.retriangulate && (step + 1) % schedule.retriangulate_period == 0) {
      try {
        remesh();
      } catch (const Error& err) {
        result.trace.records.push_back(std::move(record));
        throw OptimizationAborted(std::string("retriangulation failed: ") + err.what(), result.trace);
      }
      record.events.push_back(trace_event::retriangulate);
    }
    result.trace.records.push_back(std::move(record));
    if (schedule.checkpoint && schedule.checkpoint_every > 0 && (step + 1) % schedule.checkpoint_every == 0) {
      schedule.checkpoint(step + 1, result.topology, result.vertices);
    }
  }

  try {
    const EnergyBreakdown fin = model.evaluate(result.vertices, decayed_weights(cfg.weights, horizon, horizon));
    result.final_data = fin.data_term;
    result.final_eigenvalues = fin.eigenvalues;
  } catch (const Error& e) {
    throw OptimizationAborted(std::string("final evaluation failed: ") + e.what(), result.trace);
  }
  return result;
}

SurfaceResult optimize_surface(const MeshTopology& topology, const VertexMatrix& v_base, const TargetSpectrum& target,
                               const EnergyConfig& energy, const ScheduleConfig& schedule) {
  schedule.check();
  if (v_base.cols() != 3) throw std::invalid_argument("optimize_surface requires a 3D embedding");
  EnergyConfig cfg = energy;
  cfg.flat_mode = false;
  cfg.displacement_mode = true;
  const EnergyModel model(topology, target, cfg, v_base);

  SurfaceResult result;
  result.displacement = Eigen::MatrixXd::Zero(v_base.rows(), 3);
  AdamState adam(schedule.adam, v_base.rows(), 3);
  const long horizon = schedule.horizon();

  auto evaluate = [&](const RegWeights& w) {
    try {
      return model.evaluate(result.displacement, w);
    } catch (const Error& e) {
      throw OptimizationAborted(std::string("energy evaluation failed: ") + e.what(), result.trace);
    }
  };

  for (int step = 0; step < schedule.total_steps; ++step) {
    const EnergyBreakdown e = evaluate(decayed_weights(cfg.weights, step, horizon));
    TraceRecord record = make_record(step, e);
    if (step == 0) result.initial_data = e.data_term;
    if (converged(e.data_term, result.initial_data, schedule)) {
      result.trace.records.push_back(std::move(record));
      break;
    }
    try {
      adam_step(adam, result.displacement, e.gradient);
    } catch (const NumericalAbort& err) {
      result.trace.records.push_back(std::move(record));
      throw OptimizationAborted(err.what(), result.trace);
    }
    record.events.push_back(trace_event::surface_step);
    result.trace.records.push_back(std::move(record));
    if (schedule.checkpoint && schedule.checkpoint_every > 0 && (step + 1) % schedule.checkpoint_every == 0) {
      schedule.checkpoint(step + 1, topology, v_base + result.displacement);
    }
  }

  const EnergyBreakdown fin = evaluate(decayed_weights(cfg.weights, horizon, horizon));
  result.final_data = fin.data_term;
  result.final_eigenvalues = fin.eigenvalues;
  result.vertices = v_base + result.displacement;
  return result;
}

}  // namespace isospec
