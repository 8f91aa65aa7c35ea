#include <iostream>

#include <CLI11.hpp>

#include "etstl_cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace etstl::cli;
  CLI::App app{"Event-triggered STL funnel control"};
  app.require_subcommand(1);

  RunOptions run;
  std::uint64_t seed = 0;
  double dt = 0.0;
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario file");
  run_cmd->add_option("--scenario", run.scenario, "Scenario JSON")->required();
  run_cmd->add_option("--out", run.out, "Output directory");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Noise seed override");
  auto* dt_opt = run_cmd->add_option("--dt", dt, "Step size override");

  std::filesystem::path formula;
  double eta = 1.0;
  auto* opt_cmd = app.add_subcommand("optimize", "Maximize smoothed robustness per task");
  opt_cmd->add_option("--formula", formula, "File with the formula text")->required();
  auto* eta_opt = opt_cmd->add_option("--eta", eta, "Smoothing parameter");

  MonitorCommandOptions mon;
  std::string semantics = "exact";
  auto* mon_cmd = app.add_subcommand("monitor", "Robustness of a recorded trajectory");
  mon_cmd->add_option("--trajectory", mon.trajectory, "trajectory.csv")->required();
  mon_cmd->add_option("--formula", mon.formula, "File with the formula text")->required();
  mon_cmd->add_option("--at", mon.at, "Evaluation time");
  mon_cmd->add_option("--semantics", semantics, "exact or smooth")
      ->check(CLI::IsMember({"exact", "smooth"}));
  mon_cmd->add_option("--eta", mon.eta, "Smoothing parameter for smooth semantics");

  std::filesystem::path paper_out = "paper_out";
  int seeds = 0;
  auto* paper_cmd = app.add_subcommand("reproduce-paper", "Run the bundled multi-robot scenario");
  paper_cmd->add_option("--out", paper_out, "Output directory");
  paper_cmd->add_option("--seeds", seeds, "Extra noise seeds to run after the main one");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  if (*run_cmd) {
    if (*seed_opt) run.seed = seed;
    if (*dt_opt) run.dt = dt;
    return cmd_run(run, std::cout, std::cerr);
  }
  if (*opt_cmd) {
    return cmd_optimize(formula, *eta_opt ? std::optional<double>(eta) : std::nullopt, std::cout,
                        std::cerr);
  }
  if (*mon_cmd) {
    mon.exact = semantics == "exact";
    return cmd_monitor(mon, std::cout, std::cerr);
  }
  return cmd_reproduce_paper(paper_out, seeds, std::cout, std::cerr);
}
