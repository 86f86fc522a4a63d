// Command-line front end: igst run <config> [--out DIR] [--levels N]
// [--solver direct|iterative] [--check]. IGST_THREADS sets the assembly threads.

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

#include "igst/cli.hpp"
#include "igst/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Space-time isogeometric solver for quasi-static poroelasticity"};
  app.require_subcommand(1);

  std::string config_path, out_dir, solver;
  int levels = 0;
  bool check = false;
  CLI::App* run = app.add_subcommand("run", "Run an experiment described by a YAML config");
  run->add_option("config", config_path, "Run config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory (overrides the config)");
  run->add_option("--levels", levels, "Refinement levels 2, 4, ..., 2^N for convergence runs")
      ->check(CLI::Range(1, 12));
  run->add_option("--solver", solver, "Linear solver")->check(CLI::IsMember({"direct", "iterative"}));
  run->add_flag("--check", check, "Exit nonzero when a configured check fails");

  CLI11_PARSE(app, argc, argv);

  try {
    igst::RunConfig config = igst::load_config(config_path);
    if (!out_dir.empty()) config.out = out_dir;
    if (levels > 0) {
      if (config.mode != "convergence") throw igst::ConfigError("--levels applies to convergence runs");
      config.levels = igst::dyadic_levels(levels);
    }
    if (!solver.empty()) config.solver.kind = igst::solver_kind_from_string(solver);
    if (check && config.checks.empty()) throw igst::ConfigError("--check given but the config has no checks");

    const auto start = std::chrono::steady_clock::now();
    const igst::RunOutcome outcome = igst::execute(config);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    for (const std::string& line : outcome.summary) std::cout << line << '\n';
    for (const auto& f : outcome.files) std::cout << "wrote " << f.string() << '\n';
    std::cout << "elapsed " << seconds << " s\n";
    if (check) {
      for (const igst::CheckResult& c : outcome.checks)
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
      if (!outcome.all_passed()) {
        std::cerr << "igst: " << "one or more checks failed\n";
        return 2;
      }
    }
  } catch (const igst::Error& e) {
    std::cerr << "igst: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
