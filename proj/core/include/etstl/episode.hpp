#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "etstl/controller.hpp"
#include "etstl/formula.hpp"
#include "etstl/monitor.hpp"
#include "etstl/plant.hpp"
#include "etstl/sequencer.hpp"

namespace etstl {

struct EpisodeConfig {
  Plant plant;
  SequentialFormula formula;
  Vector x0;
  SmoothingConfig smoothing;
  std::vector<SynthesisConfig> synthesis;
  SynthesisConfig default_synthesis;
  TriggerConfig trigger;
  double gain = 1.0;
  double dt = 0.01;
  /// Last simulated time; defaults to the formula horizon.
  std::optional<double> horizon;
  /// Seconds simulated after the final jump. Ignored when run_to_horizon.
  double tail = 0.0;
  /// Keep simulating the terminal mode until the horizon so the monitor
  /// sees every window.
  bool run_to_horizon = false;
  std::uint64_t seed = 0;
  /// Semantics of the post-run monitor check.
  MonitorSemantics monitor_semantics = MonitorSemantics::Smooth;
};

struct Trajectory {
  double dt = 0.0;
  std::vector<double> times;
  Matrix states;  // n x samples
  Matrix inputs;  // m x samples, held input applied after each sample
  std::vector<double> rho_active;
  std::vector<double> gamma;
  std::vector<double> rho_max;
  std::vector<int> mode;

  std::size_t size() const { return times.size(); }
  SignalView view() const { return {times, states}; }
};

enum class RunStatus { Satisfied, TaskFailure, FunnelViolation, TriggerFloor, Infeasible };

std::string_view to_string(RunStatus status);

struct RunMetrics {
  long samples = 0;
  long triggers = 0;
  double reduction = 0.0;
  /// Same ratio over the samples up to the final jump.
  long samples_to_satisfaction = 0;
  long triggers_to_satisfaction = 0;
  double reduction_to_satisfaction = 0.0;
  bool satisfied = false;
  RunStatus status = RunStatus::Satisfied;
  std::string failure;
  double failure_time = 0.0;
  /// Monitor value of the formula at t = 0; NaN when the run stopped before
  /// the last window closed.
  double rho_theta = 0.0;
  bool monitor_covered = false;
  double min_margin = 0.0;
  long funnel_violations = 0;
  /// max over samples of ||u(x(t), t) - u_hat(t)||_inf.
  double max_deviation = 0.0;
  long deviation_violations = 0;
  double min_inter_event = 0.0;
  double min_delta = 0.0;
  double max_abs_eps = 0.0;
  double wall_time = 0.0;
  double end_time = 0.0;
};

struct EpisodeResult {
  Trajectory trajectory;
  RunMetrics metrics;
  std::vector<TriggerEvent> events;
  std::vector<JumpRecord> jumps;
  std::vector<FunnelParams> funnels;
  std::vector<AtomicTask> tasks;
};

/// Simulates one closed-loop run. Task failures, funnel violations and
/// trigger-floor hits end the run early and are reported in the metrics; the
/// trajectory up to that point is kept.
EpisodeResult run_episode(const EpisodeConfig& cfg);

}  // namespace etstl
