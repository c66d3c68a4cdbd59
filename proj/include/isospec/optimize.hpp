#pragma once

#include "isospec/energy.hpp"
#include "isospec/errors.hpp"
#include "isospec/mesh.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace isospec {

struct AdamConfig {
  double learning_rate = 5e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

inline constexpr double kFlatLearningRate = 5e-3;
inline constexpr double kSurfaceLearningRate = 1e-3;

struct AdamState {
  AdamConfig config;
  long step = 0;
  Eigen::MatrixXd m;  // first moment, shape of the variable
  Eigen::MatrixXd v;  // second moment, shape of the variable

  AdamState() = default;
  AdamState(const AdamConfig& cfg, Eigen::Index rows, Eigen::Index cols);
  /// Zero moments and step counter for a variable of the given shape.
  void reset(Eigen::Index rows, Eigen::Index cols);
};

/// One bias-corrected Adam update of `variable` in place. Throws NumericalAbort when the
/// gradient has non-finite entries and std::invalid_argument on shape mismatch.
void adam_step(AdamState& state, Eigen::MatrixXd& variable, const Eigen::MatrixXd& gradient);

/// w0 (1 + cos(pi min(step, horizon) / horizon)) / 2.
double cosine_weight(double w0, long step, long horizon);

/// Cosine decay of the edge, smoothness and volume weights; the flip weight stays constant.
RegWeights decayed_weights(const RegWeights& w0, long step, long horizon);

struct ScheduleConfig {
  int total_steps = 2000;
  /// Flat mode: Adam steps on the boundary rows between two interior relaxations.
  int boundary_block = 10;
  int relax_sweeps = 20;
  /// Flat mode: boundary steps between retriangulations.
  int retriangulate_period = 200;
  bool retriangulate = true;
  /// Cosine decay horizon in steps; 0 means total_steps.
  int decay_horizon = 0;
  /// Stop once the data term falls to this fraction of its initial value.
  double rel_exit = 1e-6;
  /// Stop once the (normalized) data term falls below this value.
  double abs_exit = 1e-12;
  AdamConfig adam;
  std::uint64_t seed = 1;
  /// Called every `checkpoint_every` steps (0 disables) with the current mesh.
  int checkpoint_every = 0;
  std::function<void(int step, const MeshTopology&, const VertexMatrix&)> checkpoint;

  int horizon() const { return decay_horizon > 0 ? decay_horizon : total_steps; }
  /// Throws std::invalid_argument when a count is < 1.
  void check() const;
};

/// Step budget and learning rate of a mode: 2000 steps at 5e-3 flat, 3000 at 1e-3 surface.
ScheduleConfig default_schedule(bool flat);

namespace trace_event {
inline constexpr const char* boundary_step = "boundary_step";
inline constexpr const char* interior_relax = "interior_relax";
inline constexpr const char* retriangulate = "retriangulate";
inline constexpr const char* surface_step = "surface_step";
}  // namespace trace_event

/// Energy at the start of a step, the weights it was formed with, and what the step did.
struct TraceRecord {
  int step = 0;
  double data = 0.0;
  double reg_edge = 0.0;
  double reg_flip = 0.0;
  double reg_smooth = 0.0;
  double reg_volume = 0.0;
  double total = 0.0;
  RegWeights weights;
  std::vector<std::string> events;
};

struct OptTrace {
  std::vector<TraceRecord> records;

  /// Header `step,data,reg_edge,reg_flip,reg_smooth,reg_vol,total,event`; several events of
  /// one step are joined with '+'.
  void write_csv(std::ostream& out) const;
  void write_csv(const std::string& path) const;
};

/// NumericalAbort raised from inside an optimization, with the trace up to the failure.
class OptimizationAborted : public NumericalAbort {
 public:
  OptimizationAborted(const std::string& what, OptTrace trace) : NumericalAbort(what), trace_(std::move(trace)) {}
  const OptTrace& trace() const { return trace_; }

 private:
  OptTrace trace_;
};

struct FlatResult {
  MeshTopology topology;
  VertexMatrix vertices;
  OptTrace trace;
  double initial_data = 0.0;
  double final_data = 0.0;
  Eigen::VectorXd final_eigenvalues;
  int retriangulations = 0;
};

struct SurfaceResult {
  VertexMatrix vertices;
  Eigen::MatrixXd displacement;
  OptTrace trace;
  double initial_data = 0.0;
  double final_data = 0.0;
  Eigen::VectorXd final_eigenvalues;
};

///
/// Alternating minimization for flat shapes.
///
/// Each step is an Adam update of the boundary rows only (interior gradient rows are
/// masked). After every `boundary_block` steps the interior is relaxed; after every
/// `retriangulate_period` steps the region is retriangulated with the same boundary and
/// interior count, and the Adam moments restart. A step whose energy evaluation hits a
/// degenerate triangle triggers an immediate retriangulation when enabled and aborts
/// otherwise.
///
FlatResult optimize_flat(const MeshTopology& topology, const VertexMatrix& v0, const TargetSpectrum& target,
                         const EnergyConfig& energy, const ScheduleConfig& schedule);

/// Adam on a displacement field D with V = V_base + D, starting from D = 0.
SurfaceResult optimize_surface(const MeshTopology& topology, const VertexMatrix& v_base, const TargetSpectrum& target,
                               const EnergyConfig& energy, const ScheduleConfig& schedule);

}  // namespace isospec
