// Command-line front end: manifest-driven trajectories, stationary solves,
// parameter sweeps, and the numerical self-check suite.
//
// Exit codes: 0 success, 1 invalid input (manifest or arguments),
// 2 numerical failure, 3 self-check failure.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "panelflow/errors.hpp"
#include "panelflow/io.hpp"
#include "panelflow/manifest.hpp"
#include "panelflow/runner.hpp"
#include "panelflow/verify.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "panelflow: clamped plate in subsonic flow via a delayed-potential "
      "reduction — simulate, solve stationary states, sweep, self-check"};
  app.require_subcommand(1);

  std::string manifest_path;
  int jobs = 0;
  bool quick = false;
  bool json_only = false;
  unsigned seed = 2024;
  std::string report_path;

  CLI::App* sim = app.add_subcommand(
      "simulate", "Run one trajectory; write diagnostics records and the final state snapshot");
  sim->add_option("manifest", manifest_path, "Experiment manifest (JSON)")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* stat = app.add_subcommand(
      "stationary", "Solve for equilibria from the manifest's seeds; write the catalog");
  stat->add_option("manifest", manifest_path, "Experiment manifest (JSON)")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Run the cartesian parameter sweep; write per-cell outputs and the merged summary");
  sweep->add_option("manifest", manifest_path, "Experiment manifest (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--jobs", jobs, "Worker threads (default: picked from hardware)");

  CLI::App* verify =
      app.add_subcommand("verify", "Run the numerical self-checks and report pass/fail");
  verify->add_flag("--quick", quick, "Smaller grids and fewer samples");
  verify->add_option("--seed", seed, "Base seed for randomized checks");
  verify->add_option("--report", report_path, "Also write the JSON report to this file");
  verify->add_flag("--json", json_only, "Print the JSON report instead of log lines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // help is success; any parse problem is invalid input
  }

  try {
    if (sim->parsed()) {
      panelflow::run_simulate(panelflow::load_manifest(manifest_path), &std::cout);
    } else if (stat->parsed()) {
      panelflow::run_stationary(panelflow::load_manifest(manifest_path), &std::cout);
    } else if (sweep->parsed()) {
      panelflow::run_sweep(panelflow::load_manifest(manifest_path), &std::cout, jobs);
    } else if (verify->parsed()) {
      const panelflow::VerifyReport report =
          panelflow::run_verify({quick, seed}, json_only ? nullptr : &std::cout);
      const std::string doc = panelflow::verify_report_json(report);
      if (json_only) std::cout << doc;
      if (!report_path.empty()) panelflow::write_text_file(report_path, doc);
      if (!report.all_passed()) {
        std::cerr << "verification failed\n";
        return 3;
      }
    }
  } catch (const panelflow::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const panelflow::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
