#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "eotlab/error.hpp"

int main(int argc, char** argv) {
  using namespace eotlab::cli;

  CLI::App app{"Entropic optimal transport experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  RunOptions run;
  std::string out_dir;
  double epsilon = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides [output] dir)");
    sub->add_option("--threads", run.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--verbose", run.verbose, "progress on standard error");
  };
  auto* solve = app.add_subcommand("solve", "solve one (instance, eps) and write solution.csv");
  add_common(solve);
  solve->add_option("--epsilon", epsilon, "eps (default: smallest of the schedule)")->check(CLI::PositiveNumber);
  auto* sweep = app.add_subcommand("sweep", "run the eps sweep and write sweep.csv and summary.txt");
  add_common(sweep);
  auto* detach = app.add_subcommand("detach", "detachment certificates and the convex-ball bound");
  add_common(detach);

  auto* report = app.add_subcommand("report", "aggregate summary.txt files into report.csv");
  std::string report_dir;
  report->add_option("dir", report_dir, "directory holding sweep outputs");
  report->add_option("--out", out_dir, "same as the positional directory");
  report->add_flag("--verbose", run.verbose);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExecutionError;
  }

  if (report->parsed()) {
    const std::string dir = report_dir.empty() ? out_dir : report_dir;
    if (dir.empty()) {
      std::cerr << "eotlab: report needs a directory\n";
      return kExecutionError;
    }
    return cmd_report(dir, std::cout, std::cerr);
  }

  if (!out_dir.empty()) run.out_dir = out_dir;
  if (epsilon > 0.0) run.epsilon = epsilon;
  ExperimentConfig config;
  try {
    config = load_config(config_path);
  } catch (const eotlab::Error& e) {
    std::cerr << "eotlab: " << config_path << ": " << e.what() << '\n';
    return kExecutionError;
  }
  if (solve->parsed()) return cmd_solve(config, run, std::cerr);
  if (sweep->parsed()) return cmd_sweep(config, run, std::cerr);
  return cmd_detach(config, run, std::cerr);
}
