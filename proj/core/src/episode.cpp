#include "etstl/episode.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "etstl/error.hpp"

namespace etstl {

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Satisfied: return "satisfied";
    case RunStatus::TaskFailure: return "task_failure";
    case RunStatus::FunnelViolation: return "funnel_violation";
    case RunStatus::TriggerFloor: return "trigger_floor";
    case RunStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

namespace {

void validate(const EpisodeConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw Error("dt must be positive");
  if (cfg.x0.size() != cfg.plant.state_dim) {
    throw Error("initial state has dimension " + std::to_string(cfg.x0.size()) +
                ", plant expects " + std::to_string(cfg.plant.state_dim));
  }
  if (!cfg.plant.actuation) throw Error("plant has no actuation map");
  if (!(cfg.plant.noise_bound >= 0.0)) throw Error("noise bound must be >= 0");
  if (!(cfg.gain > 0.0)) throw Error("control gain must be positive");
  if (!(cfg.tail >= 0.0)) throw Error("tail must be >= 0");
  if (cfg.horizon && !(*cfg.horizon > 0.0)) throw Error("horizon must be positive");
  check_dimension(cfg.formula, static_cast<std::size_t>(cfg.plant.state_dim));
  cfg.trigger.validate();
}

}  // namespace

EpisodeResult run_episode(const EpisodeConfig& cfg) {
  const auto wall_start = std::chrono::steady_clock::now();
  validate(cfg);

  const int n = cfg.plant.state_dim;
  const int m = cfg.plant.input_dim;
  const double horizon = cfg.horizon.value_or(formula_horizon(cfg.formula));
  const long last_step = static_cast<long>(std::floor(horizon / cfg.dt + 1e-9));

  SequencerConfig scfg;
  scfg.smoothing = cfg.smoothing;
  scfg.synthesis = cfg.synthesis;
  scfg.default_synthesis = cfg.default_synthesis;
  scfg.gain = cfg.gain;
  scfg.actuation = cfg.plant.actuation;
  Sequencer seq(cfg.formula, scfg);
  EventTriggeredController ctl(cfg.trigger);
  NoiseSource noise(cfg.seed);

  EpisodeResult res;
  res.tasks = seq.tasks();
  Trajectory& traj = res.trajectory;
  RunMetrics& met = res.metrics;
  traj.dt = cfg.dt;
  traj.states.resize(n, last_step + 1);
  traj.inputs.resize(m, last_step + 1);
  met.min_margin = std::numeric_limits<double>::infinity();

  Vector x = cfg.x0;
  Vector u(m);
  std::optional<double> terminal_since;
  double t = 0.0;
  long k = 0;

  auto record = [&](double rho, double gamma, double rho_max) {
    Eigen::Index col = static_cast<Eigen::Index>(traj.times.size());
    traj.times.push_back(t);
    traj.states.col(col) = x;
    traj.inputs.col(col) = ctl.has_event() ? ctl.held_input() : Vector::Zero(m);
    traj.rho_active.push_back(rho);
    traj.gamma.push_back(gamma);
    traj.rho_max.push_back(rho_max);
    traj.mode.push_back(seq.state().q);
  };

  try {
    seq.init(x);
    for (k = 0; k <= last_step; ++k) {
      t = static_cast<double>(k) * cfg.dt;
      seq.flow_to(t);

      // Containment under the funnel that governed the last step.
      {
        const FeedbackLaw& law = seq.active_law();
        double tf = seq.state().funnel_time;
        double rho = smooth_robustness(law.psi, x, cfg.smoothing);
        double margin = law.funnel.margin(rho, tf);
        met.min_margin = std::min(met.min_margin, margin);
        if (!(margin > 0.0)) {
          ++met.funnel_violations;
          record(rho, law.funnel.perf(tf), law.funnel.rho_max);
          double xi = (rho - law.funnel.rho_max) / law.funnel.perf(tf);
          std::ostringstream os;
          os << "funnel violated in mode " << seq.state().q << " at t=" << t << " (rho=" << rho
             << ", bounds (" << law.funnel.lower(tf) << ", " << law.funnel.rho_max << "))";
          throw FunnelViolation(os.str(), xi, t);
        }
      }

      if (seq.jump_if_due(x)) {
        if (seq.finished()) terminal_since = t;
        ctl.fire(seq.active_law(), x, t, seq.state().funnel_time, TriggerCause::ModeSwitch,
                 seq.state().q);
      } else if (auto cause = ctl.should_trigger(x, t)) {
        ctl.fire(seq.active_law(), x, t, seq.state().funnel_time, *cause, seq.state().q);
      }

      const FeedbackLaw& law = seq.active_law();
      const double tf = seq.state().funnel_time;
      TransformedError te = law.evaluate(x, tf, u);
      double rho = te.e + law.funnel.rho_max;
      record(rho, law.funnel.perf(tf), law.funnel.rho_max);
      met.max_abs_eps = std::max(met.max_abs_eps, std::abs(te.eps));
      double dev = (u - ctl.held_input()).lpNorm<Eigen::Infinity>();
      met.max_deviation = std::max(met.max_deviation, dev);
      if (dev > cfg.trigger.delta_u) ++met.deviation_violations;

      if (terminal_since && !cfg.run_to_horizon &&
          t - *terminal_since >= cfg.tail - 1e-9) {
        break;
      }
      if (k == last_step) {
        if (!seq.finished()) {
          throw TaskFailure("horizon " + std::to_string(horizon) +
                                " reached before every task completed",
                            t);
        }
        break;
      }
      Vector w = noise.sample(n, cfg.plant.noise_bound);
      x = step_rk4(cfg.plant, x, ctl.held_input(), w, cfg.dt);
    }
    met.status = RunStatus::Satisfied;
  } catch (const FunnelViolation& e) {
    met.status = RunStatus::FunnelViolation;
    met.failure = e.what();
    met.failure_time = t;
  } catch (const TaskFailure& e) {
    met.status = RunStatus::TaskFailure;
    met.failure = e.what();
    met.failure_time = e.time();
  } catch (const TriggerFloorError& e) {
    met.status = RunStatus::TriggerFloor;
    met.failure = e.what();
    met.failure_time = t;
  } catch (const InfeasibleSynthesis& e) {
    met.status = RunStatus::Infeasible;
    met.failure = e.what();
    met.failure_time = t;
  }

  const auto samples = static_cast<Eigen::Index>(traj.times.size());
  traj.states.conservativeResize(n, samples);
  traj.inputs.conservativeResize(m, samples);

  res.events = ctl.events();
  res.jumps = seq.jumps();
  res.funnels = seq.funnels();

  met.samples = static_cast<long>(samples);
  met.triggers = static_cast<long>(res.events.size());
  met.reduction = met.samples > 0
                      ? 1.0 - static_cast<double>(met.triggers) / static_cast<double>(met.samples)
                      : 0.0;
  met.end_time = traj.times.empty() ? 0.0 : traj.times.back();

  if (seq.finished()) {
    const double t_done = res.jumps.back().time;
    met.samples_to_satisfaction = static_cast<long>(
        std::upper_bound(traj.times.begin(), traj.times.end(), t_done + 1e-9) -
        traj.times.begin());
    met.triggers_to_satisfaction = static_cast<long>(
        std::count_if(res.events.begin(), res.events.end(),
                      [&](const TriggerEvent& e) { return e.time <= t_done + 1e-9; }));
    met.reduction_to_satisfaction =
        1.0 - static_cast<double>(met.triggers_to_satisfaction) /
                  static_cast<double>(met.samples_to_satisfaction);
  }

  met.min_inter_event = std::numeric_limits<double>::infinity();
  met.min_delta = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < res.events.size(); ++i) {
    met.min_delta = std::min(met.min_delta, res.events[i].delta);
    if (i > 0) {
      met.min_inter_event =
          std::min(met.min_inter_event, res.events[i].time - res.events[i - 1].time);
    }
  }

  met.rho_theta = std::numeric_limits<double>::quiet_NaN();
  met.satisfied = false;
  if (met.status == RunStatus::Satisfied) {
    MonitorOptions mo;
    mo.semantics = cfg.monitor_semantics;
    mo.smoothing = cfg.smoothing;
    try {
      met.rho_theta = monitor_robustness(cfg.formula, traj.view(), 0.0, mo);
      met.monitor_covered = true;
    } catch (const WindowNotCovered&) {
      met.monitor_covered = false;
    }
    met.satisfied = !met.monitor_covered || met.rho_theta > 0.0;
    if (!met.satisfied) met.failure = "monitor reports rho_theta <= 0";
  }

  met.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start)
                      .count();
  return res;
}

}  // namespace etstl
