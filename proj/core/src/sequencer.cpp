#include "etstl/sequencer.hpp"

#include <algorithm>
#include <sstream>

#include "etstl/error.hpp"

namespace etstl {

const SynthesisConfig& SequencerConfig::synthesis_for(std::size_t task) const {
  return task < synthesis.size() ? synthesis[task] : default_synthesis;
}

Interval local_window(const AtomicTask& task, double delta) {
  Interval w = task.schedule;
  if (task.absolute_time) {
    w.lo -= delta;
    w.hi -= delta;
  }
  return w;
}

Sequencer::Sequencer(const SequentialFormula& theta, SequencerConfig cfg)
    : tasks_(normalize_sequential(theta)), cfg_(std::move(cfg)) {
  if (tasks_.empty()) throw FormulaError("formula has no temporal tasks");
  if (!cfg_.actuation) throw Error("sequencer needs an actuation map");
}

const HybridState& Sequencer::init(const Vector& x0) {
  state_ = HybridState{};
  state_.absolute_time = tasks_.front().absolute_time;
  for (const auto& t : tasks_) state_.always.push_back(t.always());
  time_ = 0.0;
  jumps_.clear();
  funnels_.clear();
  synthesize(x0);
  return state_;
}

void Sequencer::synthesize(const Vector& x) {
  const std::size_t idx = static_cast<std::size_t>(state_.q - 1);
  const AtomicTask& task = tasks_[idx];
  FunnelParams fp;
  try {
    fp = synthesize_funnel(task, x, cfg_.synthesis_for(idx), cfg_.smoothing, state_.delta);
  } catch (const InfeasibleSynthesis& e) {
    std::ostringstream os;
    os << "task " << state_.q << " at t=" << time_ << ": " << e.what();
    throw InfeasibleSynthesis(os.str());
  }
  law_ = FeedbackLaw{task.psi, fp, cfg_.smoothing, cfg_.gain, cfg_.actuation};
  state_.funnel = fp;
  state_.funnel_time = 0.0;
  funnel_start_ = time_;
  funnels_.push_back(fp);
}

void Sequencer::flow_to(double t) {
  time_ = t;
  state_.local_time = t - state_.delta;
  state_.funnel_time = t - funnel_start_;
}

const AtomicTask& Sequencer::active_task() const {
  int idx = std::min(state_.q, task_count()) - 1;
  return tasks_[static_cast<std::size_t>(idx)];
}

Vector Sequencer::active_control(const Vector& x) const {
  return law_(x, state_.funnel_time);
}

std::optional<JumpRecord> Sequencer::jump_if_due(const Vector& x) {
  if (finished()) return std::nullopt;
  const AtomicTask& task = active_task();
  const double tau = state_.local_time;
  const double tol = cfg_.time_tolerance;
  const Interval win = local_window(task, state_.delta);
  const double rho = smooth_robustness(task.psi, x, cfg_.smoothing);
  const FunnelParams& fp = state_.funnel;

  bool due = false;
  if (task.always()) {
    due = tau >= win.hi - tol;
  } else {
    bool in_time = tau >= win.lo - tol && tau <= fp.t_star + tol;
    due = in_time && rho > fp.r && rho < fp.rho_max;
    if (!due && tau > fp.t_star + tol) {
      std::ostringstream os;
      os << "task " << state_.q << " not satisfied by its deadline (local t_star=" << fp.t_star
         << ", global t=" << time_ << ", rho=" << rho << ", r=" << fp.r << ")";
      throw TaskFailure(os.str(), time_);
    }
  }
  if (!due) return std::nullopt;

  JumpRecord rec;
  rec.from_mode = state_.q;
  rec.time = time_;
  rec.local_time = tau;
  rec.rho = rho;
  state_.delta += tau;
  state_.local_time = 0.0;
  state_.q += 1;
  rec.delta_after = state_.delta;
  jumps_.push_back(rec);
  if (!finished()) synthesize(x);
  return rec;
}

}  // namespace etstl
