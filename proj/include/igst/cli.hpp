#pragma once

// Run configurations (YAML) and their execution: convergence sweeps, line-cut
// benchmarks and equal/mixed stability reports, with optional assertions.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "igst/benchmarks.hpp"

namespace igst {

struct ParamOverrides {
  std::optional<double> c0, lambda, mu, k, b;

  void apply(MaterialParams& p) const;
  bool empty() const { return !c0 && !lambda && !mu && !k && !b; }
};

/// Assertions evaluated after a run; unset entries are skipped.
struct CheckSpec {
  std::optional<double> min_order;             ///< last observed h-norm order
  std::optional<double> max_coercivity_ratio;  ///< max/min sampled coercivity across levels
  std::optional<double> max_relative_l2;       ///< series with a reference
  std::vector<double> relative_l2_times;       ///< empty: every output time
  std::vector<std::string> relative_l2_fields; ///< empty: every output field
  bool deviation_largest_at_earliest = false;
  std::optional<double> min_tv_ratio;          ///< TV(p) equal over mixed
  bool mixed_std_u2_larger = false;

  bool empty() const;
};

struct RunConfig {
  std::string name;
  std::string mode;  ///< convergence | benchmark | stability
  std::string case_name;
  Degrees degrees;
  ParamOverrides params;
  std::vector<int> levels{2, 4, 8, 16};
  int spatial_spans = 20;
  int time_spans = 100;
  std::vector<double> times;
  std::string time_unit = "1";  ///< "1" or "pi_over_beta"
  std::vector<std::string> fields{"p"};
  std::optional<Cut> cut;
  int stability_r_p = 1;
  double stability_time = 1.0;
  AssemblyOptions assembly;
  SolverOptions solver;
  int norm_points = 0;
  int coercivity_samples = 0;
  std::shared_ptr<const SpaceTimeMap> geometry;
  CheckSpec checks;
  std::filesystem::path out = "results";
};

/// Parses YAML text; `default_name` is used when the config has no name.
RunConfig parse_config(const std::string& yaml, const std::string& default_name = "run");
RunConfig load_config(const std::filesystem::path& path);

/// Spans 2, 4, ..., 2^n.
std::vector<int> dyadic_levels(int n);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunOutcome {
  std::vector<std::filesystem::path> files;
  std::vector<CheckResult> checks;
  std::vector<std::string> summary;

  bool all_passed() const;
};

/// Runs the configured experiment, writing CSV and SVG files below config.out.
RunOutcome execute(const RunConfig& config);

}  // namespace igst
