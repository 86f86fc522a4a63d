#include "igst/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace igst {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

std::vector<BoundaryRegion> all_sides(BoundaryTag tag, int d) {
  std::vector<BoundaryRegion> r;
  for (int k = 0; k < d; ++k)
    for (int side = 0; side < 2; ++side) r.push_back(BoundaryRegion::spatial(tag, k, side));
  return r;
}

}  // namespace

void Degrees::validate() const {
  if (r_u < 1 || r_p < 1 || r_T < 1) throw InvalidArgument("degrees must be at least 1");
}

Degrees mixed_degrees(int r_p) { return {r_p + 1, r_p, r_p, -1, -1}; }
Degrees equal_degrees(int r) { return {r, r, r, -1, -1}; }

CaseSetup manufactured_setup(const MaterialParams& params) {
  const ManufacturedCase mc = manufactured_data(params);
  CaseSetup s;
  s.name = "manufactured";
  s.params = params;
  s.data = mc.data();
  s.dirichlet_u = all_sides(BoundaryTag::DisplacementDirichlet, 2);
  s.dirichlet_p = all_sides(BoundaryTag::PressureDirichlet, 2);
  s.dirichlet_u.push_back(BoundaryRegion::initial());
  s.dirichlet_p.push_back(BoundaryRegion::initial());
  s.extents = {{0.0, 1.0}, {0.0, 1.0}};
  s.final_time = 1.0;
  return s;
}

CaseSetup terzaghi_setup(const TerzaghiCase& c) {
  c.params.validate();
  CaseSetup s;
  s.name = "terzaghi";
  s.params = c.params;
  const double F = c.F;
  s.data.traction = [F](const Vec&, double) { return Eigen::VectorXd::Constant(1, F); };
  s.data.natural = {BoundaryRegion::spatial(BoundaryTag::Traction, 0, 0)};
  s.dirichlet_u = {BoundaryRegion::spatial(BoundaryTag::DisplacementDirichlet, 0, 1),
                   BoundaryRegion::initial()};
  s.dirichlet_p = {BoundaryRegion::spatial(BoundaryTag::PressureDirichlet, 0, 0),
                   BoundaryRegion::initial()};
  s.extents = {{0.0, c.L}};
  s.final_time = 1.0;
  return s;
}

CaseSetup barry_mercer_setup(const BarryMercerCase& c, double h_S) {
  c.params.validate();
  const DiracApprox delta = dirac_approx(h_S, c.x0);
  const double beta = c.beta();
  CaseSetup s;
  s.name = "barry_mercer";
  s.params = c.params;
  s.data.g = [delta, beta](const Vec& x, double t) { return 2 * beta * delta(x) * std::sin(beta * t); };
  using BT = BoundaryTag;
  s.dirichlet_u = {BoundaryRegion::spatial(BT::DisplacementDirichlet, 1, 0, 0, 1, 1u),
                   BoundaryRegion::spatial(BT::DisplacementDirichlet, 1, 1, 0, 1, 1u),
                   BoundaryRegion::spatial(BT::DisplacementDirichlet, 0, 0, 0, 1, 2u),
                   BoundaryRegion::spatial(BT::DisplacementDirichlet, 0, 1, 0, 1, 2u),
                   BoundaryRegion::initial()};
  s.dirichlet_p = all_sides(BT::PressureDirichlet, 2);
  s.dirichlet_p.push_back(BoundaryRegion::initial());
  s.extents = {{0.0, 1.0}, {0.0, 1.0}};
  s.final_time = 1.5 * std::numbers::pi / beta;
  return s;
}

LayerCase::LayerCase() {
  params.c0 = 0.0;
  params.lambda = 1.0;
  params.mu = 1.0;
  params.k = 1.0;
  params.b = 1.0;
}

LayerCase::LayerCase(LayerKind k) : LayerCase() { kind = k; }

CaseSetup layer_setup(const LayerCase& c) {
  c.params.validate();
  if (!(c.layer_lo > 0 && c.layer_lo < c.layer_hi && c.layer_hi < 1))
    throw InvalidArgument("layer must lie strictly inside the unit square");
  CaseSetup s;
  s.name = c.kind == LayerKind::LowPermeability ? "layer_low_perm" : "layer_low_compr";
  s.params = c.params;
  const Eigen::Vector3d outside(c.params.lambda, c.params.mu, c.params.k);
  Eigen::Vector3d inside = outside;
  if (c.kind == LayerKind::LowPermeability) inside(2) = c.k_layer;
  else inside(0) = c.lambda_layer;
  if (!(inside(2) > 0) || !(inside(0) >= 0)) throw InvalidArgument("invalid layer coefficients");
  const double lo = c.layer_lo, hi = c.layer_hi;
  s.params.field = [outside, inside, lo, hi](const Vec& x) {
    return x(1) > lo && x(1) < hi ? inside : outside;
  };
  using BT = BoundaryTag;
  s.data.traction = [](const Vec&, double) {
    Eigen::VectorXd t(2);
    t << 0.0, -1.0;
    return t;
  };
  s.data.natural = {BoundaryRegion::spatial(BT::Traction, 1, 1, 0.5, 1.0)};
  // Rollers fix the normal displacement component; zero flux is the natural default.
  s.dirichlet_u = {BoundaryRegion::spatial(BT::DisplacementDirichlet, 0, 0, 0, 1, 1u),
                   BoundaryRegion::spatial(BT::DisplacementDirichlet, 0, 1, 0, 1, 1u),
                   BoundaryRegion::spatial(BT::DisplacementDirichlet, 1, 0, 0, 1, 2u),
                   BoundaryRegion::initial()};
  s.dirichlet_p = {BoundaryRegion::spatial(BT::PressureDirichlet, 1, 1), BoundaryRegion::initial()};
  s.extents = {{0.0, 1.0}, {0.0, 1.0}};
  s.final_time = 1.0;
  return s;
}

bool known_case(const std::string& name) {
  return name == "manufactured" || name == "terzaghi" || name == "barry_mercer" ||
         name == "layer_low_perm" || name == "layer_low_compr";
}

Mesh case_mesh(const CaseSetup& setup, int spatial_spans, int time_spans) {
  if (spatial_spans < 1 || time_spans < 1) throw InvalidArgument("span counts must be positive");
  if (!setup.geometry)
    return box_mesh(setup.extents, setup.final_time,
                    std::vector<int>(setup.extents.size(), spatial_spans), time_spans);
  const SpaceTimeMap& map = *setup.geometry;
  if (map.dim() != static_cast<int>(setup.extents.size()))
    throw ConfigError("geometry dimension does not match the case");
  if (std::abs(map.final_time() - setup.final_time) > 1e-12 * setup.final_time)
    throw ConfigError("geometry final time does not match the case");
  const Mesh coarse = coarse_mesh(map);
  std::vector<int> factors;
  for (int k = 0; k < map.dim(); ++k) {
    if (spatial_spans % coarse.spans(k) != 0)
      throw ConfigError("span count must be a multiple of the geometry's knot spans");
    factors.push_back(spatial_spans / coarse.spans(k));
  }
  factors.push_back(time_spans);
  return refine(coarse, factors);
}

Discretization discretize(const CaseSetup& setup, const Mesh& mesh, const Degrees& degrees) {
  degrees.validate();
  const int d = mesh.dim();
  Discretization out;
  out.u = std::make_shared<const DiscreteSpace>(
      build_space(mesh, degrees.r_u, degrees.r_T, d, setup.dirichlet_u, degrees.spatial_continuity,
                  degrees.temporal_continuity));
  out.p = std::make_shared<const DiscreteSpace>(
      build_space(mesh, degrees.r_p, degrees.r_T, 1, setup.dirichlet_p, degrees.spatial_continuity,
                  degrees.temporal_continuity));
  return out;
}

RunResult run_case(const CaseSetup& setup, const Mesh& mesh, const Degrees& degrees,
                   const AssemblyOptions& assembly, const SolverOptions& solver) {
  const Discretization disc = discretize(setup, mesh, degrees);
  RunResult r;
  r.h_S = mesh.h_S();
  r.h_T = mesh.h_T();
  const SparseSystem sys = assemble(setup.params, setup.data, *disc.u, *disc.p, r.h_T, assembly);
  r.dofs = sys.size();
  SolveResult sol = solve(sys, solver);
  r.report = sol.report;
  r.solution = make_solution(disc.u, disc.p, sol.x);
  return r;
}

FieldPair manufactured_fields(const ManufacturedCase& c) {
  return {physical_field(2, [c](const Vec& x, double t) { return c.displacement(x, t); }),
          physical_field(1, [c](const Vec& x, double t) { return c.pressure(x, t); })};
}

double observed_order(double e_coarse, double e_fine, double h_coarse, double h_fine) {
  if (!(e_coarse > 0 && e_fine > 0 && h_coarse > 0 && h_fine > 0 && h_coarse != h_fine))
    throw InvalidArgument("observed order needs positive errors and distinct mesh sizes");
  return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

std::vector<ConvergenceRow> run_convergence(const ConvergenceOptions& options,
                                            const std::function<void(const ConvergenceRow&)>& on_row) {
  options.degrees.validate();
  if (options.spans.empty()) throw InvalidArgument("convergence sweep needs at least one level");
  CaseSetup setup = manufactured_setup(options.params);
  setup.geometry = options.geometry;
  const FieldPair exact = manufactured_fields(manufactured_data(options.params));
  std::vector<ConvergenceRow> rows;
  for (int n : options.spans) {
    const Mesh mesh = case_mesh(setup, n, n);
    const Discretization disc = discretize(setup, mesh, options.degrees);
    const double h_T = mesh.h_T();
    const SparseSystem sys = assemble(setup.params, setup.data, *disc.u, *disc.p, h_T, options.assembly);
    const SolveResult sol = solve(sys, options.solver);
    const SolutionField s = make_solution(disc.u, disc.p, sol.x);

    ConvergenceRow row;
    row.h_S = mesh.h_S();
    row.h_T = h_T;
    row.r_u = options.degrees.r_u;
    row.r_p = options.degrees.r_p;
    row.r_T = options.degrees.r_T;
    row.c0 = options.params.c0;
    const auto norms = error_norms(s, exact, {"h", "L2_p", "L2_u"},
                                   {options.params.c0, h_T, options.norm_points});
    row.norm_h = norms.at("h");
    row.norm_L2_p = norms.at("L2_p");
    row.norm_L2_u = norms.at("L2_u");
    row.observed_order = rows.empty() ? nan
                                      : observed_order(rows.back().norm_h, row.norm_h,
                                                       rows.back().h_S, row.h_S);
    row.coercivity = nan;
    if (options.coercivity_samples > 0) {
      const auto N = coercivity_gram(*disc.u, *disc.p, options.params.c0, h_T);
      row.coercivity = check_coercivity(sys.matrix, N, options.coercivity_samples);
    }
    row.dofs = sys.size();
    row.relative_residual = sol.report.relative_residual;
    rows.push_back(row);
    if (on_row) on_row(row);
  }
  return rows;
}

double Cut::length() const { return (to - from).norm(); }

Vec Cut::point(int i) const {
  if (samples < 2 || i < 0 || i >= samples) throw InvalidArgument("cut sample out of range");
  const double s = static_cast<double>(i) / (samples - 1);
  return from + s * (to - from);
}

double Cut::arc(int i) const { return length() * static_cast<double>(i) / (samples - 1); }

std::vector<double> sample_cut(const SolutionField& s, const std::string& field, int component,
                               const Cut& cut, double t) {
  if (field != "p" && field != "u") throw InvalidArgument("unknown field '" + field + "'");
  const int comps = field == "p" ? 1 : s.space_u->components();
  if (component < 0 || component >= comps) throw InvalidArgument("component out of range");
  std::vector<double> v(static_cast<std::size_t>(cut.samples));
  for (int i = 0; i < cut.samples; ++i) {
    const Vec x = cut.point(i);
    const FieldSample f = field == "p" ? s.pressure(x, t) : s.displacement(x, t);
    v[static_cast<std::size_t>(i)] = f.value(component);
  }
  return v;
}

double total_variation(const std::vector<double>& v) {
  double tv = 0;
  for (std::size_t i = 1; i < v.size(); ++i) tv += std::abs(v[i] - v[i - 1]);
  return tv;
}

double standard_deviation(const std::vector<double>& v) {
  if (v.empty()) throw InvalidArgument("standard deviation of an empty sample");
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double s = 0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size()));
}

double l2_difference(const std::vector<double>& a, const std::vector<double>& b, double ds) {
  if (a.size() != b.size() || a.size() < 2) throw InvalidArgument("samples must match in size");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double w = (i == 0 || i + 1 == a.size()) ? 0.5 : 1.0;
    s += w * (a[i] - b[i]) * (a[i] - b[i]);
  }
  return std::sqrt(s * ds);
}

double relative_l2(const std::vector<double>& a, const std::vector<double>& b) {
  const std::vector<double> zero(b.size(), 0.0);
  const double nb = l2_difference(b, zero, 1.0);
  if (!(nb > 0)) throw InvalidArgument("reference has zero norm");
  return l2_difference(a, b, 1.0) / nb;
}

double max_abs_difference(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw InvalidArgument("samples must match in size");
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double interpolant_residual(const MaterialParams& params, const Degrees& degrees, int spans,
                            const AssemblyOptions& assembly) {
  const CaseSetup setup = manufactured_setup(params);
  const ManufacturedCase mc = manufactured_data(params);
  const Mesh mesh = case_mesh(setup, spans, spans);
  const Discretization disc = discretize(setup, mesh, degrees);
  const SparseSystem sys = assemble(setup.params, setup.data, *disc.u, *disc.p, mesh.h_T(), assembly);
  const Eigen::VectorXd cu = greville_interpolate(
      *disc.u, [&mc](const Vec& x, double t) { return mc.displacement(x, t).value; });
  const Eigen::VectorXd cp = greville_interpolate(
      *disc.p, [&mc](const Vec& x, double t) { return mc.pressure(x, t).value; });
  Eigen::VectorXd c(sys.size());
  c << disc.u->restrict_to_free(cu), disc.p->restrict_to_free(cp);
  return (sys.matrix * c - sys.rhs).norm();
}

double sampled_coercivity(const MaterialParams& params, const Degrees& degrees, int spans, int samples,
                          std::uint64_t seed) {
  const CaseSetup setup = manufactured_setup(params);
  const Mesh mesh = case_mesh(setup, spans, spans);
  const Discretization disc = discretize(setup, mesh, degrees);
  AssemblyOptions opts;
  opts.terms = kAllTerms & ~(kLoadU | kLoadP);
  const SparseSystem sys = assemble(setup.params, setup.data, *disc.u, *disc.p, mesh.h_T(), opts);
  const auto N = coercivity_gram(*disc.u, *disc.p, params.c0, mesh.h_T());
  return check_coercivity(sys.matrix, N, samples, seed);
}

CaseSetup named_setup(const std::string& name, const std::function<void(MaterialParams&)>& adjust,
                      double h_S) {
  if (name == "manufactured") {
    MaterialParams p;
    if (adjust) adjust(p);
    return manufactured_setup(p);
  }
  if (name == "terzaghi") {
    TerzaghiCase c;
    c.params.c0 = 0.2;
    c.params.lambda = 1.0;
    c.params.mu = 1.0;
    c.params.k = 0.2;
    c.params.b = 1.0;
    if (adjust) adjust(c.params);
    return terzaghi_setup(c);
  }
  if (name == "barry_mercer") {
    BarryMercerCase c;
    if (adjust) adjust(c.params);
    return barry_mercer_setup(c, h_S);
  }
  if (name == "layer_low_perm" || name == "layer_low_compr") {
    LayerCase c(name == "layer_low_perm" ? LayerKind::LowPermeability : LayerKind::LowCompressibility);
    if (adjust) adjust(c.params);
    return layer_setup(c);
  }
  throw ConfigError("unknown case '" + name + "'");
}

Cut default_cut(const std::string& case_name) {
  Cut c;
  if (case_name == "terzaghi") {
    c.from = Vec::Constant(1, 0.0);
    c.to = Vec::Constant(1, 1.0);
    c.samples = 201;
  } else if (case_name == "barry_mercer" || case_name == "manufactured") {
    c.from = Vec::Constant(2, 0.0);
    c.to = Vec::Constant(2, 1.0);
    c.samples = 201;
  } else if (case_name == "layer_low_perm" || case_name == "layer_low_compr") {
    c.from = Vec(2);
    c.from << 0.75, 0.0;
    c.to = Vec(2);
    c.to << 0.75, 1.0;
    c.samples = 201;
  } else {
    throw ConfigError("unknown case '" + case_name + "'");
  }
  return c;
}

namespace {

// Reference values along a cut, empty when the case has none.
std::vector<double> reference_values(const std::string& case_name, const CaseSetup& setup,
                                     const std::string& field, const Cut& cut, double t) {
  std::vector<double> ref;
  if (case_name == "terzaghi" && field == "p") {
    TerzaghiCase c;
    c.params = setup.params;
    for (int i = 0; i < cut.samples; ++i) ref.push_back(c.pressure(cut.point(i)(0), t));
  } else if (case_name == "manufactured") {
    const ManufacturedCase mc = manufactured_data(setup.params);
    for (int i = 0; i < cut.samples; ++i) {
      const Vec x = cut.point(i);
      if (field == "p") ref.push_back(mc.pressure(x, t).value(0));
      else ref.push_back(mc.displacement(x, t).value(field == "u1" ? 0 : 1));
    }
  } else if (case_name == "barry_mercer") {
    BarryMercerCase c;
    c.params = setup.params;
    for (int i = 0; i < cut.samples; ++i) {
      const Vec x = cut.point(i);
      const BarryMercerValue v = barry_mercer_reference(x(0), x(1), t, c, c.terms);
      ref.push_back(field == "p" ? v.p : field == "u1" ? v.u1 : v.u2);
    }
  }
  return ref;
}

CutSeries cut_series(const std::string& case_name, const CaseSetup& setup, const SolutionField& s,
                     const std::string& field, const Cut& cut, double t) {
  CutSeries cs;
  cs.field = field;
  cs.t = t;
  for (int i = 0; i < cut.samples; ++i) cs.s.push_back(cut.arc(i));
  if (field == "p") cs.numeric = sample_cut(s, "p", 0, cut, t);
  else if (field == "u1") cs.numeric = sample_cut(s, "u", 0, cut, t);
  else if (field == "u2") cs.numeric = sample_cut(s, "u", 1, cut, t);
  else throw ConfigError("unknown output field '" + field + "'");
  cs.reference = reference_values(case_name, setup, field, cut, t);
  return cs;
}

}  // namespace

BenchmarkResult run_benchmark(const BenchmarkOptions& options) {
  if (!known_case(options.case_name)) throw ConfigError("unknown case '" + options.case_name + "'");
  // The source cell of barry_mercer has the width of a mesh cell of the unit square.
  CaseSetup setup = named_setup(options.case_name, options.adjust, 1.0 / options.spatial_spans);
  setup.geometry = options.geometry;
  const Cut cut = options.cut ? *options.cut : default_cut(options.case_name);
  if (cut.from.size() != static_cast<Eigen::Index>(setup.extents.size()) ||
      cut.to.size() != cut.from.size() || cut.samples < 2)
    throw ConfigError("cut does not match the spatial dimension of the case");
  const Mesh mesh = case_mesh(setup, options.spatial_spans, options.time_spans);
  BenchmarkResult out;
  out.run = run_case(setup, mesh, options.degrees, options.assembly, options.solver);
  for (double t : options.times) {
    if (!(t >= 0 && t <= setup.final_time * (1 + 1e-12))) throw ConfigError("output time outside (0, T)");
    for (const std::string& f : options.fields)
      out.series.push_back(cut_series(options.case_name, setup, out.run.solution, f, cut, t));
  }
  return out;
}

StabilityReport run_stability_report(const StabilityOptions& options) {
  const std::string& name = options.base.case_name;
  if (name != "terzaghi" && name != "layer_low_perm" && name != "layer_low_compr")
    throw ConfigError("stability reports need terzaghi or a layer case");
  const bool layer = name != "terzaghi";
  StabilityReport rep;
  for (const auto& [label, deg] :
       {std::pair{std::string("equal"), equal_degrees(options.r_p)},
        std::pair{std::string("mixed"), mixed_degrees(options.r_p)}}) {
    BenchmarkOptions b = options.base;
    b.degrees = deg;
    b.times = {options.time};
    b.fields = layer ? std::vector<std::string>{"p", "u2"} : std::vector<std::string>{"p"};
    const BenchmarkResult r = run_benchmark(b);
    StabilityRow row;
    row.label = label;
    row.degrees = deg;
    const CutSeries& p = r.series.front();
    row.tv_p = total_variation(p.numeric);
    const double pmax = *std::max_element(p.numeric.begin(), p.numeric.end());
    double bound = 1.0;
    if (!layer) {
      const CaseSetup setup = named_setup(name, b.adjust, 1.0 / b.spatial_spans);
      TerzaghiCase tc;
      tc.params = setup.params;
      bound = tc.load_factor();
    }
    row.overshoot = pmax - bound;
    row.std_u2 = nan;
    if (layer) {
      const LayerCase lc;
      const CutSeries& u2 = r.series.back();
      std::vector<double> inside;
      const Cut cut = b.cut ? *b.cut : default_cut(name);
      for (int i = 0; i < cut.samples; ++i) {
        const double y = cut.point(i)(1);
        if (y > lc.layer_lo && y < lc.layer_hi) inside.push_back(u2.numeric[static_cast<std::size_t>(i)]);
      }
      row.std_u2 = standard_deviation(inside);
    }
    rep.rows.push_back(row);
    for (CutSeries s : r.series) {
      s.field = label + "_" + s.field;
      rep.series.push_back(std::move(s));
    }
  }
  return rep;
}

}  // namespace igst
