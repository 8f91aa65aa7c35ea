#pragma once

#include <span>

#include "etstl/formula.hpp"
#include "etstl/robustness.hpp"

namespace etstl {

enum class MonitorSemantics {
  Exact,   // min over conjunction literals
  Smooth,  // log-sum-exp under-approximation, as used by the controller
};

struct MonitorOptions {
  MonitorSemantics semantics = MonitorSemantics::Exact;
  SmoothingConfig smoothing;
};

/// Sampled signal: strictly increasing `times`, `states` with one column per
/// sample.
struct SignalView {
  std::span<const double> times;
  const Matrix& states;
};

/// Sample times within this distance of a window endpoint count as inside.
double window_tolerance(double t);

/// Index range [first, last) of samples in the closed window [lo, hi]. Throws
/// WindowNotCovered when the samples do not span the window or none fall in it.
std::pair<std::size_t, std::size_t> window_samples(std::span<const double> times,
                                                   double lo, double hi);

double monitor_robustness(const Conjunction& psi, TemporalOp op,
                          const Interval& window, const SignalView& signal,
                          double t, const MonitorOptions& opts = {});

double monitor_robustness(const TemporalFormula& phi, const SignalView& signal,
                          double t, const MonitorOptions& opts = {});

/// Conjunction of atomic tasks: min over each task's window value.
double monitor_robustness(const std::vector<AtomicTask>& tasks,
                          const SignalView& signal, double t,
                          const MonitorOptions& opts = {});

/// Atom sequences directly; chains through their normalized windows.
double monitor_robustness(const SequentialFormula& theta,
                          const SignalView& signal, double t,
                          const MonitorOptions& opts = {});

}  // namespace etstl
