#pragma once

// Problem setups for the shipped experiments and the runners behind the CLI
// and the acceptance suite: convergence sweeps, line cuts against reference
// solutions, and equal/mixed degree contrasts.

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "igst/analytic.hpp"
#include "igst/assembly.hpp"
#include "igst/norms.hpp"
#include "igst/solver.hpp"

namespace igst {

struct Degrees {
  int r_u = 2;
  int r_p = 1;
  int r_T = 1;
  int spatial_continuity = -1;   ///< -1 selects C^{r-1}
  int temporal_continuity = -1;

  void validate() const;
  bool mixed() const { return r_u == r_p + 1; }
};

/// Degrees r_u = r_p + 1 or r_u = r_p, with r_T = r_p.
Degrees mixed_degrees(int r_p);
Degrees equal_degrees(int r);

/// A boundary value problem on a fixed domain, independent of the mesh.
struct CaseSetup {
  std::string name;
  MaterialParams params;
  ProblemData data;
  std::vector<BoundaryRegion> dirichlet_u;
  std::vector<BoundaryRegion> dirichlet_p;
  std::vector<std::pair<double, double>> extents;
  double final_time = 1.0;
  /// Replaces the box map of `extents` when set; its final time must match.
  std::shared_ptr<const SpaceTimeMap> geometry;
};

CaseSetup manufactured_setup(const MaterialParams& params);
CaseSetup terzaghi_setup(const TerzaghiCase& c);
/// Needs the spatial mesh width so the source cell matches a mesh cell.
CaseSetup barry_mercer_setup(const BarryMercerCase& c, double h_S);

enum class LayerKind { LowPermeability, LowCompressibility };

/// Unit square with a horizontal layer layer_lo < y < layer_hi; rollers and
/// no flux on the left, bottom and right sides; p = 0 and a downward unit load
/// for x >= 0.5 on the top.
struct LayerCase {
  LayerKind kind = LayerKind::LowPermeability;
  double layer_lo = 0.25;
  double layer_hi = 0.75;
  double k_layer = 1e-8;       ///< used by LowPermeability
  double lambda_layer = 1e8;   ///< used by LowCompressibility
  MaterialParams params;       ///< background: c0 = 0, lambda = mu = k = b = 1

  LayerCase();
  explicit LayerCase(LayerKind kind);
};

CaseSetup layer_setup(const LayerCase& c);

/// Case by config name: manufactured, terzaghi, barry_mercer, layer_low_perm, layer_low_compr.
bool known_case(const std::string& name);

/// Uniform mesh with n spans per spatial direction and m in time, on the box or
/// by uniform subdivision of the coarse spans of the setup's geometry.
Mesh case_mesh(const CaseSetup& setup, int spatial_spans, int time_spans);

struct Discretization {
  std::shared_ptr<const DiscreteSpace> u;
  std::shared_ptr<const DiscreteSpace> p;
};

Discretization discretize(const CaseSetup& setup, const Mesh& mesh, const Degrees& degrees);

struct RunResult {
  SolutionField solution;
  SolveReport report;
  double h_S = 0;
  double h_T = 0;
  int dofs = 0;
};

RunResult run_case(const CaseSetup& setup, const Mesh& mesh, const Degrees& degrees,
                   const AssemblyOptions& assembly = {}, const SolverOptions& solver = {});

/// Exact (u, p) of the manufactured solution as norm fields.
FieldPair manufactured_fields(const ManufacturedCase& c);

struct ConvergenceOptions {
  Degrees degrees;
  MaterialParams params;
  std::vector<int> spans{2, 4, 8, 16};  ///< spans per direction, space and time alike
  AssemblyOptions assembly;
  SolverOptions solver;
  int norm_points = 0;
  /// Random vectors for the per-level coercivity estimate (0 skips it).
  int coercivity_samples = 0;
  std::shared_ptr<const SpaceTimeMap> geometry;
};

struct ConvergenceRow {
  double h_S = 0;
  double h_T = 0;
  int r_u = 0;
  int r_p = 0;
  int r_T = 0;
  double c0 = 0;
  double norm_h = 0;
  double norm_L2_p = 0;
  double norm_L2_u = 0;
  /// Order in the h-norm against the previous level; NaN on the first row.
  double observed_order = 0;
  double coercivity = 0;  ///< NaN when not sampled
  int dofs = 0;
  double relative_residual = 0;
};

/// Runs the manufactured case per level; on_row sees each row as it completes.
std::vector<ConvergenceRow> run_convergence(
    const ConvergenceOptions& options,
    const std::function<void(const ConvergenceRow&)>& on_row = {});

/// log(e_coarse / e_fine) / log(h_coarse / h_fine)
double observed_order(double e_coarse, double e_fine, double h_coarse, double h_fine);

/// Straight segment in Omega sampled at `samples` equally spaced points.
struct Cut {
  Vec from;
  Vec to;
  int samples = 101;

  double length() const;
  Vec point(int i) const;
  double arc(int i) const;  ///< arc length from `from`
};

/// Values of component `component` of the pressure ("p") or displacement
/// ("u") along the cut at time t.
std::vector<double> sample_cut(const SolutionField& s, const std::string& field, int component,
                               const Cut& cut, double t);

double total_variation(const std::vector<double>& v);
double standard_deviation(const std::vector<double>& v);
/// Trapezoidal relative L2 difference ||a - b|| / ||b|| on equally spaced samples.
double relative_l2(const std::vector<double>& a, const std::vector<double>& b);
double max_abs_difference(const std::vector<double>& a, const std::vector<double>& b);
/// Trapezoidal L2 norm of a - b, samples spaced by ds.
double l2_difference(const std::vector<double>& a, const std::vector<double>& b, double ds);

/// Consistency residual ||S c - R||_2 of the Greville interpolant of the
/// manufactured solution on n spans per direction.
double interpolant_residual(const MaterialParams& params, const Degrees& degrees, int spans,
                            const AssemblyOptions& assembly = {});

/// Sampled coercivity of S against the h-norm Gram matrix for the
/// manufactured boundary conditions (loads disabled).
double sampled_coercivity(const MaterialParams& params, const Degrees& degrees, int spans,
                          int samples, std::uint64_t seed = 1);

/// One line plot: numerical values and optional reference along a cut.
struct CutSeries {
  std::string field;  ///< "p", "u1", "u2"
  double t = 0;
  std::vector<double> s;
  std::vector<double> numeric;
  std::vector<double> reference;  ///< empty without a reference
};

struct BenchmarkOptions {
  std::string case_name;
  Degrees degrees;
  int spatial_spans = 20;
  int time_spans = 100;
  std::vector<double> times;
  std::vector<std::string> fields{"p"};
  std::optional<Cut> cut;  ///< default cut of the case when empty
  AssemblyOptions assembly;
  SolverOptions solver;
  /// Parameter overrides on top of the case defaults.
  std::function<void(MaterialParams&)> adjust;
  std::shared_ptr<const SpaceTimeMap> geometry;
};

struct BenchmarkResult {
  RunResult run;
  std::vector<CutSeries> series;
};

BenchmarkResult run_benchmark(const BenchmarkOptions& options);

/// Builds the setup of a named case, applying parameter overrides; the
/// spatial mesh width is needed by barry_mercer.
CaseSetup named_setup(const std::string& name, const std::function<void(MaterialParams&)>& adjust,
                      double h_S);
Cut default_cut(const std::string& case_name);

struct StabilityRow {
  std::string label;  ///< "equal" or "mixed"
  Degrees degrees;
  double tv_p = 0;
  double overshoot = 0;  ///< max p_h minus the physical bound of the case
  double std_u2 = 0;     ///< spread of u2 inside the layer (NaN outside layer cases)
};

struct StabilityOptions {
  BenchmarkOptions base;  ///< degrees are replaced by the equal/mixed pair
  int r_p = 1;
  double time = 1.0;
};

struct StabilityReport {
  std::vector<StabilityRow> rows;
  std::vector<CutSeries> series;  ///< p (and u2 for layers) per degree choice
};

StabilityReport run_stability_report(const StabilityOptions& options);

}  // namespace igst
