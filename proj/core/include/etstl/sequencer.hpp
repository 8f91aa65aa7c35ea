#pragma once

#include <optional>
#include <vector>

#include "etstl/controller.hpp"
#include "etstl/formula.hpp"
#include "etstl/funnel.hpp"

namespace etstl {

struct SequencerConfig {
  SmoothingConfig smoothing;
  /// Per-task overrides, indexed by task; tasks beyond the list use
  /// `default_synthesis`.
  std::vector<SynthesisConfig> synthesis;
  SynthesisConfig default_synthesis;
  double gain = 1.0;
  ActuationFn actuation;
  /// Slack on window endpoint comparisons.
  double time_tolerance = 1e-9;

  const SynthesisConfig& synthesis_for(std::size_t task) const;
};

struct HybridState {
  int q = 1;                 // 1..N, N+1 once every task is done
  double local_time = 0.0;   // reset at each jump
  double delta = 0.0;        // sum of local times at past jumps
  /// Time since the active funnel was synthesized. Keeps running in the
  /// terminal mode, where the last funnel stays in force.
  double funnel_time = 0.0;
  FunnelParams funnel;
  bool absolute_time = true;     // p
  std::vector<bool> always;      // m_q per task
};

struct JumpRecord {
  int from_mode = 0;
  double time = 0.0;        // global
  double local_time = 0.0;  // local clock value consumed by the jump
  double rho = 0.0;         // smoothed robustness of the finished task
  double delta_after = 0.0;
};

/// Local-time window [start - p Delta, end - p Delta] of task q (0-based).
Interval local_window(const AtomicTask& task, double delta);

/// Hybrid sequencing of the atomic tasks of a sequential formula.
class Sequencer {
 public:
  Sequencer(const SequentialFormula& theta, SequencerConfig cfg);

  /// q = 1, Delta = 0, funnel for task 1 synthesized at x0.
  const HybridState& init(const Vector& x0);

  /// Advances the clocks to global time t.
  void flow_to(double t);

  /// Applies the jump map when (x, local time) lies in the jump set of the
  /// active task. Throws TaskFailure once an Eventually task's t_star has
  /// passed without satisfaction.
  std::optional<JumpRecord> jump_if_due(const Vector& x);

  /// Continuous law of the active mode (mode N+1 reuses task N).
  const FeedbackLaw& active_law() const { return law_; }
  Vector active_control(const Vector& x) const;

  const HybridState& state() const { return state_; }
  const std::vector<AtomicTask>& tasks() const { return tasks_; }
  int task_count() const { return static_cast<int>(tasks_.size()); }
  bool finished() const { return state_.q == task_count() + 1; }
  const AtomicTask& active_task() const;
  const std::vector<JumpRecord>& jumps() const { return jumps_; }
  /// Funnel synthesized for each task so far.
  const std::vector<FunnelParams>& funnels() const { return funnels_; }

 private:
  void synthesize(const Vector& x);

  std::vector<AtomicTask> tasks_;
  SequencerConfig cfg_;
  HybridState state_;
  FeedbackLaw law_;
  double time_ = 0.0;
  double funnel_start_ = 0.0;
  std::vector<JumpRecord> jumps_;
  std::vector<FunnelParams> funnels_;
};

}  // namespace etstl
