#include "etstl/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "etstl/error.hpp"

namespace etstl {

double window_tolerance(double t) { return 1e-9 * std::max(1.0, std::abs(t)); }

std::pair<std::size_t, std::size_t> window_samples(std::span<const double> times,
                                                   double lo, double hi) {
  const double tol = window_tolerance(hi);
  if (times.empty() || times.front() > lo + tol || times.back() < hi - tol) {
    std::ostringstream os;
    os << "samples do not cover window [" << lo << ", " << hi << "]";
    if (!times.empty()) os << " (signal spans [" << times.front() << ", " << times.back() << "])";
    throw WindowNotCovered(os.str());
  }
  auto first = std::lower_bound(times.begin(), times.end(), lo - tol);
  auto last = std::upper_bound(first, times.end(), hi + tol);
  if (first == last) {
    std::ostringstream os;
    os << "no sample falls inside window [" << lo << ", " << hi << "]";
    throw WindowNotCovered(os.str());
  }
  return {static_cast<std::size_t>(first - times.begin()),
          static_cast<std::size_t>(last - times.begin())};
}

double monitor_robustness(const Conjunction& psi, TemporalOp op,
                          const Interval& window, const SignalView& signal,
                          double t, const MonitorOptions& opts) {
  auto [first, last] = window_samples(signal.times, t + window.lo, t + window.hi);
  const bool always = op == TemporalOp::Always;
  double acc = always ? std::numeric_limits<double>::infinity()
                      : -std::numeric_limits<double>::infinity();
  Vector x(signal.states.rows());
  for (std::size_t k = first; k < last; ++k) {
    x = signal.states.col(static_cast<Eigen::Index>(k));
    double v = opts.semantics == MonitorSemantics::Exact
                   ? exact_robustness(psi, x)
                   : smooth_robustness(psi, x, opts.smoothing);
    acc = always ? std::min(acc, v) : std::max(acc, v);
  }
  return acc;
}

double monitor_robustness(const TemporalFormula& phi, const SignalView& signal,
                          double t, const MonitorOptions& opts) {
  return monitor_robustness(phi.body, phi.op, phi.interval, signal, t, opts);
}

double monitor_robustness(const std::vector<AtomicTask>& tasks,
                          const SignalView& signal, double t,
                          const MonitorOptions& opts) {
  double acc = std::numeric_limits<double>::infinity();
  for (const auto& task : tasks) {
    acc = std::min(acc, monitor_robustness(task.psi, task.op, task.window,
                                           signal, t, opts));
  }
  return acc;
}

double monitor_robustness(const SequentialFormula& theta,
                          const SignalView& signal, double t,
                          const MonitorOptions& opts) {
  return monitor_robustness(normalize_sequential(theta), signal, t, opts);
}

}  // namespace etstl
