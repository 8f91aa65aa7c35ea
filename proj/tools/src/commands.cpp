#include "etstl_cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "etstl/io.hpp"
#include "etstl/monitor.hpp"
#include "etstl/optimize.hpp"

namespace etstl::cli {

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_summary(std::ostream& out, const RunMetrics& m) {
  out << "status=" << to_string(m.status) << " satisfied=" << (m.satisfied ? "true" : "false")
      << " rho_theta=" << format_double(m.rho_theta) << " triggers=" << m.triggers
      << " samples=" << m.samples << " reduction=" << format_double(m.reduction)
      << " wall_time_s=" << format_double(m.wall_time) << '\n';
  if (!m.failure.empty()) out << "failure: " << m.failure << '\n';
}

// Config and formula errors map to exit 2; anything else escaping is internal.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "formula parse error: " << e.what() << '\n';
    return kConfigError;
  } catch (const FormulaError& e) {
    err << "formula error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InfeasibleSynthesis& e) {
    err << "infeasible: " << e.what() << '\n';
    return kTaskFailure;
  } catch (const WindowNotCovered& e) {
    err << "monitor: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace

int exit_code_for(const RunMetrics& m) {
  switch (m.status) {
    case RunStatus::FunnelViolation: return kViolation;
    case RunStatus::TaskFailure:
    case RunStatus::TriggerFloor:
    case RunStatus::Infeasible: return kTaskFailure;
    case RunStatus::Satisfied: break;
  }
  if (m.funnel_violations > 0 || m.deviation_violations > 0) return kViolation;
  return m.satisfied ? kOk : kTaskFailure;
}

void write_run_outputs(const std::filesystem::path& dir, const EpisodeResult& result) {
  std::filesystem::create_directories(dir);
  write_trajectory_csv(dir / "trajectory.csv", result.trajectory);
  write_events_csv(dir / "events.csv", result.events);
  write_key_values(dir / "metrics.txt", metrics_entries(result));
  write_plot_data_csv(dir / "plot_data.csv", result.trajectory);
}

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    ScenarioConfig sc = load_scenario(opts.scenario);
    if (opts.seed) sc.seed = *opts.seed;
    if (opts.dt) {
      if (!(*opts.dt > 0.0)) throw ConfigError("--dt must be positive");
      sc.dt = *opts.dt;
    }
    std::filesystem::path dir = opts.out;
    if (dir.empty()) dir = sc.output_dir.empty() ? "out" : sc.output_dir;
    EpisodeConfig cfg = to_episode(sc);
    EpisodeResult res = run_episode(cfg);
    write_run_outputs(dir, res);
    print_summary(out, res.metrics);
    return exit_code_for(res.metrics);
  });
}

int cmd_optimize(const std::filesystem::path& formula_file, std::optional<double> eta,
                 std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    SequentialFormula theta = parse_formula(read_text(formula_file));
    SmoothingConfig smoothing;
    if (eta) {
      if (!(*eta > 0.0)) throw ConfigError("--eta must be positive");
      smoothing.eta = *eta;
    }
    auto tasks = normalize_sequential(theta);
    const std::size_t dim = required_dimension(theta);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      auto t0 = std::chrono::steady_clock::now();
      OptimizationResult r = optimize_robustness(tasks[i].psi, smoothing,
                                                 default_start(tasks[i].psi, dim));
      double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      out << "task" << i + 1 << " rho_opt=" << format_double(r.rho_opt)
          << " iterations=" << r.iterations << " seconds=" << format_double(secs) << " x_star=";
      for (Eigen::Index j = 0; j < r.x_star.size(); ++j) {
        out << (j ? "," : "") << format_double(r.x_star[j]);
      }
      out << '\n';
    }
    return kOk;
  });
}

int cmd_monitor(const MonitorCommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    SequentialFormula theta = parse_formula(read_text(opts.formula));
    Trajectory traj;
    try {
      traj = read_trajectory_csv(opts.trajectory);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    check_dimension(theta, static_cast<std::size_t>(traj.states.rows()));
    MonitorOptions mo;
    mo.semantics = opts.exact ? MonitorSemantics::Exact : MonitorSemantics::Smooth;
    if (!(opts.eta > 0.0)) throw ConfigError("--eta must be positive");
    mo.smoothing.eta = opts.eta;
    double rho = monitor_robustness(theta, traj.view(), opts.at, mo);
    out << "rho=" << format_double(rho) << " satisfied=" << (rho > 0.0 ? "true" : "false") << '\n';
    return kOk;
  });
}

PaperReport reproduce_paper(int extra_seeds) {
  ScenarioConfig sc = parse_scenario_text(paper_scenario_text());
  EpisodeConfig cfg = to_episode(sc);
  PaperReport rep;

  auto tasks = normalize_sequential(cfg.formula);
  const auto dim = static_cast<std::size_t>(cfg.plant.state_dim);
  for (const auto& task : tasks) {
    auto t0 = std::chrono::steady_clock::now();
    rep.optima.push_back(
        optimize_robustness(task.psi, cfg.smoothing, default_start(task.psi, dim)));
    rep.optimize_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }

  rep.run = run_episode(cfg);
  for (int k = 0; k < extra_seeds; ++k) {
    EpisodeConfig c = cfg;
    c.seed = sc.seed + 1 + static_cast<std::uint64_t>(k);
    rep.seeds.push_back(c.seed);
    rep.seed_runs.push_back(run_episode(c).metrics);
  }
  return rep;
}

int cmd_reproduce_paper(const std::filesystem::path& out_dir, int seeds,
                        std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (seeds < 0) throw ConfigError("--seeds must be >= 0");
    const PaperThresholds th;
    PaperReport rep = reproduce_paper(seeds);
    write_run_outputs(out_dir, rep.run);

    bool ok = true;
    auto check = [&](bool pass, const std::string& what) {
      out << (pass ? "ok    " : "MISS  ") << what << '\n';
      ok = ok && pass;
    };
    const double targets[] = {th.rho_opt1, th.rho_opt2};
    for (std::size_t i = 0; i < rep.optima.size() && i < 2; ++i) {
      double v = rep.optima[i].rho_opt;
      std::ostringstream os;
      os << "rho_opt(psi" << i + 1 << ") = " << format_double(v) << " (target "
         << targets[i] << " +- " << th.rho_opt_tol << ", " << rep.optimize_seconds[i] << " s)";
      check(std::abs(v - targets[i]) <= th.rho_opt_tol && rep.optimize_seconds[i] < th.opt_seconds,
            os.str());
    }
    const RunMetrics& m = rep.run.metrics;
    print_summary(out, m);
    check(exit_code_for(m) == kOk, "run satisfied without violations");
    {
      std::ostringstream os;
      os << "rho_theta = " << format_double(m.rho_theta) << " in (" << th.rho_theta_lo << ", "
         << th.rho_theta_hi << ")";
      check(m.rho_theta > th.rho_theta_lo && m.rho_theta < th.rho_theta_hi, os.str());
    }
    {
      std::ostringstream os;
      os << "reduction = " << 100.0 * m.reduction << " % (" << m.triggers << " of " << m.samples
         << " samples), need >= " << 100.0 * th.reduction << " %";
      check(m.reduction >= th.reduction, os.str());
    }
    {
      std::ostringstream os;
      os << "wall time = " << m.wall_time << " s, need < " << th.run_seconds << " s";
      check(m.wall_time < th.run_seconds, os.str());
    }
    for (std::size_t k = 0; k < rep.seed_runs.size(); ++k) {
      const RunMetrics& s = rep.seed_runs[k];
      std::ostringstream os;
      os << "seed " << rep.seeds[k] << ": " << to_string(s.status)
         << " rho_theta=" << format_double(s.rho_theta)
         << " reduction=" << format_double(s.reduction);
      check(exit_code_for(s) == kOk, os.str());
    }
    return ok ? kOk : kThresholdMiss;
  });
}

}  // namespace etstl::cli
