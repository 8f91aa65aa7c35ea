#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "etstl/episode.hpp"
#include "etstl/optimize.hpp"
#include "etstl_cli/scenario.hpp"

namespace etstl::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kConfigError = 2,
  kTaskFailure = 3,
  kViolation = 4,
  kThresholdMiss = 5,
};

/// 0 only for a satisfied run without funnel or deviation violations.
int exit_code_for(const RunMetrics& m);

/// trajectory.csv, events.csv, metrics.txt and plot_data.csv.
void write_run_outputs(const std::filesystem::path& dir, const EpisodeResult& result);

struct RunOptions {
  std::filesystem::path scenario;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
};

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);

int cmd_optimize(const std::filesystem::path& formula_file, std::optional<double> eta,
                 std::ostream& out, std::ostream& err);

struct MonitorCommandOptions {
  std::filesystem::path trajectory;
  std::filesystem::path formula;
  double at = 0.0;
  bool exact = true;
  double eta = 1.0;
};

int cmd_monitor(const MonitorCommandOptions& opts, std::ostream& out, std::ostream& err);

/// Thresholds checked by reproduce-paper.
struct PaperThresholds {
  double rho_opt1 = 1.86;
  double rho_opt2 = 3.89;
  double rho_opt_tol = 0.02;
  double opt_seconds = 5.0;
  double rho_theta_lo = 0.5;
  double rho_theta_hi = 1.8;
  double reduction = 0.90;
  double run_seconds = 60.0;
};

struct PaperReport {
  std::vector<OptimizationResult> optima;
  std::vector<double> optimize_seconds;
  EpisodeResult run;
  /// Extra seeds, when requested.
  std::vector<RunMetrics> seed_runs;
  std::vector<std::uint64_t> seeds;
};

PaperReport reproduce_paper(int extra_seeds);

int cmd_reproduce_paper(const std::filesystem::path& out_dir, int seeds,
                        std::ostream& out, std::ostream& err);

}  // namespace etstl::cli
