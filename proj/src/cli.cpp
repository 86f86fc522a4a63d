#include "igst/cli.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "igst/report.hpp"

namespace igst {

void ParamOverrides::apply(MaterialParams& p) const {
  if (c0) p.c0 = *c0;
  if (lambda) p.lambda = *lambda;
  if (mu) p.mu = *mu;
  if (k) p.k = *k;
  if (b) p.b = *b;
}

bool CheckSpec::empty() const {
  return !min_order && !max_coercivity_ratio && !max_relative_l2 && !deviation_largest_at_earliest &&
         !min_tv_ratio && !mixed_std_u2_larger;
}

bool RunOutcome::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::vector<int> dyadic_levels(int n) {
  if (n < 1 || n > 12) throw ConfigError("levels must be between 1 and 12");
  std::vector<int> spans;
  for (int l = 1; l <= n; ++l) spans.push_back(1 << l);
  return spans;
}

namespace {

std::string where(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  if (m.is_null()) return "";
  return " (line " + std::to_string(m.line + 1) + ")";
}

void only_keys(const YAML::Node& map, const std::string& section, std::set<std::string> allowed) {
  if (!map.IsMap()) throw ConfigError("'" + section + "' must be a mapping" + where(map));
  for (const auto& kv : map) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + key + "' in " + section + where(kv.first));
  }
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& what) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("invalid value for '" + what + "'" + where(n));
  }
}

template <typename T>
std::vector<T> list(const YAML::Node& n, const std::string& what) {
  if (!n.IsSequence()) throw ConfigError("'" + what + "' must be a list" + where(n));
  std::vector<T> out;
  for (const auto& e : n) out.push_back(scalar<T>(e, what));
  return out;
}

Vec point(const YAML::Node& n, const std::string& what) {
  const auto v = list<double>(n, what);
  if (v.empty() || v.size() > 2) throw ConfigError("'" + what + "' needs 1 or 2 coordinates" + where(n));
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void read_degrees(const YAML::Node& n, Degrees& d) {
  only_keys(n, "degrees", {"r_u", "r_p", "r_T", "spatial_continuity", "temporal_continuity", "mixed"});
  if (n["r_u"]) d.r_u = scalar<int>(n["r_u"], "r_u");
  if (n["r_p"]) d.r_p = scalar<int>(n["r_p"], "r_p");
  if (n["r_T"]) d.r_T = scalar<int>(n["r_T"], "r_T");
  if (n["spatial_continuity"]) d.spatial_continuity = scalar<int>(n["spatial_continuity"], "spatial_continuity");
  if (n["temporal_continuity"])
    d.temporal_continuity = scalar<int>(n["temporal_continuity"], "temporal_continuity");
  if (d.r_u < 1 || d.r_p < 1 || d.r_T < 1) throw ConfigError("degrees must be at least 1");
  if (n["mixed"] && scalar<bool>(n["mixed"], "mixed") && !d.mixed())
    throw ConfigError("mixed degrees need r_u = r_p + 1");
}

void read_params(const YAML::Node& n, ParamOverrides& p) {
  only_keys(n, "params", {"c0", "lambda", "mu", "k", "b"});
  if (n["c0"]) p.c0 = scalar<double>(n["c0"], "c0");
  if (n["lambda"]) p.lambda = scalar<double>(n["lambda"], "lambda");
  if (n["mu"]) p.mu = scalar<double>(n["mu"], "mu");
  if (n["k"]) p.k = scalar<double>(n["k"], "k");
  if (n["b"]) p.b = scalar<double>(n["b"], "b");
}

// Single-patch NURBS map: per-direction degree and full knot vector, control
// points in lexicographic order (direction 0 fastest), optional weights, T.
std::shared_ptr<const SpaceTimeMap> read_geometry(const YAML::Node& n) {
  only_keys(n, "geometry", {"degrees", "knots", "control_points", "weights", "T"});
  if (!n["degrees"] || !n["knots"] || !n["control_points"] || !n["T"])
    throw ConfigError("geometry needs degrees, knots, control_points and T" + where(n));
  const auto degrees = list<int>(n["degrees"], "geometry.degrees");
  const YAML::Node knots = n["knots"];
  if (!knots.IsSequence() || knots.size() != degrees.size())
    throw ConfigError("geometry needs one knot vector per degree" + where(knots));
  std::vector<KnotVector<double>> dirs;
  for (std::size_t i = 0; i < degrees.size(); ++i)
    dirs.emplace_back(list<double>(knots[i], "geometry.knots"), degrees[i]);
  std::optional<Eigen::VectorXd> weights;
  if (n["weights"]) {
    const auto w = list<double>(n["weights"], "geometry.weights");
    weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  }
  TensorBasisd basis(std::move(dirs), weights);
  const YAML::Node cp = n["control_points"];
  if (!cp.IsSequence() || static_cast<int>(cp.size()) != basis.size())
    throw ConfigError("control point count does not match the basis" + where(cp));
  const int d = basis.dim();
  Eigen::MatrixXd pts(basis.size(), d);
  for (int i = 0; i < basis.size(); ++i) {
    const auto row = list<double>(cp[static_cast<std::size_t>(i)], "geometry.control_points");
    if (static_cast<int>(row.size()) != d) throw ConfigError("control point has the wrong dimension");
    for (int j = 0; j < d; ++j) pts(i, j) = row[static_cast<std::size_t>(j)];
  }
  return std::make_shared<const SpaceTimeMap>(std::move(basis), std::move(pts),
                                              scalar<double>(n["T"], "geometry.T"));
}

void read_checks(const YAML::Node& n, CheckSpec& c) {
  only_keys(n, "check",
            {"min_order", "max_coercivity_ratio", "max_relative_l2", "relative_l2_times", "relative_l2_fields",
             "deviation_largest_at_earliest", "min_tv_ratio", "mixed_std_u2_larger"});
  if (n["min_order"]) c.min_order = scalar<double>(n["min_order"], "min_order");
  if (n["max_coercivity_ratio"])
    c.max_coercivity_ratio = scalar<double>(n["max_coercivity_ratio"], "max_coercivity_ratio");
  if (n["max_relative_l2"]) c.max_relative_l2 = scalar<double>(n["max_relative_l2"], "max_relative_l2");
  if (n["relative_l2_times"]) c.relative_l2_times = list<double>(n["relative_l2_times"], "relative_l2_times");
  if (n["relative_l2_fields"])
    c.relative_l2_fields = list<std::string>(n["relative_l2_fields"], "relative_l2_fields");
  if (n["deviation_largest_at_earliest"])
    c.deviation_largest_at_earliest = scalar<bool>(n["deviation_largest_at_earliest"], "deviation_largest_at_earliest");
  if (n["min_tv_ratio"]) c.min_tv_ratio = scalar<double>(n["min_tv_ratio"], "min_tv_ratio");
  if (n["mixed_std_u2_larger"])
    c.mixed_std_u2_larger = scalar<bool>(n["mixed_std_u2_larger"], "mixed_std_u2_larger");
}

}  // namespace

RunConfig parse_config(const std::string& yaml, const std::string& default_name) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  only_keys(root, "config",
            {"name", "mode", "case", "degrees", "params", "levels", "mesh", "output", "stability",
             "assembly", "solver", "norms", "geometry", "check", "out"});
  RunConfig c;
  c.name = root["name"] ? scalar<std::string>(root["name"], "name") : default_name;
  if (!root["mode"]) throw ConfigError("config needs a mode");
  c.mode = scalar<std::string>(root["mode"], "mode");
  if (c.mode != "convergence" && c.mode != "benchmark" && c.mode != "stability")
    throw ConfigError("mode must be convergence, benchmark or stability");
  c.case_name = root["case"] ? scalar<std::string>(root["case"], "case") : "manufactured";
  if (!known_case(c.case_name)) throw ConfigError("unknown case '" + c.case_name + "'");
  if (c.mode == "convergence" && c.case_name != "manufactured")
    throw ConfigError("convergence sweeps need the manufactured case");

  if (root["degrees"]) read_degrees(root["degrees"], c.degrees);
  if (root["params"]) read_params(root["params"], c.params);
  if (const YAML::Node lv = root["levels"]) {
    if (lv.IsSequence()) {
      c.levels = list<int>(lv, "levels");
      if (c.levels.empty() || std::any_of(c.levels.begin(), c.levels.end(), [](int s) { return s < 1; }))
        throw ConfigError("levels must be positive span counts");
    } else {
      c.levels = dyadic_levels(scalar<int>(lv, "levels"));
    }
  }
  if (const YAML::Node m = root["mesh"]) {
    only_keys(m, "mesh", {"spatial_spans", "time_spans"});
    if (m["spatial_spans"]) c.spatial_spans = scalar<int>(m["spatial_spans"], "spatial_spans");
    if (m["time_spans"]) c.time_spans = scalar<int>(m["time_spans"], "time_spans");
    if (c.spatial_spans < 1 || c.time_spans < 1) throw ConfigError("mesh spans must be positive");
  }
  if (const YAML::Node o = root["output"]) {
    only_keys(o, "output", {"times", "time_unit", "fields", "cut"});
    if (o["times"]) c.times = list<double>(o["times"], "times");
    if (o["time_unit"]) c.time_unit = scalar<std::string>(o["time_unit"], "time_unit");
    if (c.time_unit != "1" && c.time_unit != "pi_over_beta")
      throw ConfigError("time_unit must be 1 or pi_over_beta");
    if (c.time_unit == "pi_over_beta" && c.case_name != "barry_mercer")
      throw ConfigError("time_unit pi_over_beta needs the barry_mercer case");
    if (o["fields"]) c.fields = list<std::string>(o["fields"], "fields");
    for (const std::string& f : c.fields)
      if (f != "p" && f != "u1" && f != "u2") throw ConfigError("unknown output field '" + f + "'");
    if (const YAML::Node cut = o["cut"]) {
      only_keys(cut, "cut", {"from", "to", "samples"});
      if (!cut["from"] || !cut["to"]) throw ConfigError("cut needs from and to" + where(cut));
      Cut k;
      k.from = point(cut["from"], "cut.from");
      k.to = point(cut["to"], "cut.to");
      if (cut["samples"]) k.samples = scalar<int>(cut["samples"], "cut.samples");
      if (k.from.size() != k.to.size() || k.samples < 2) throw ConfigError("invalid cut" + where(cut));
      c.cut = k;
    }
  }
  if (const YAML::Node s = root["stability"]) {
    only_keys(s, "stability", {"r_p", "time"});
    if (s["r_p"]) c.stability_r_p = scalar<int>(s["r_p"], "stability.r_p");
    if (s["time"]) c.stability_time = scalar<double>(s["time"], "stability.time");
    if (c.stability_r_p < 1) throw ConfigError("stability.r_p must be at least 1");
  }
  if (const YAML::Node a = root["assembly"]) {
    only_keys(a, "assembly", {"upwind_scale", "quadrature_points", "threads"});
    if (a["upwind_scale"]) c.assembly.upwind_scale = scalar<double>(a["upwind_scale"], "upwind_scale");
    if (a["quadrature_points"])
      c.assembly.quadrature_points = scalar<int>(a["quadrature_points"], "quadrature_points");
    if (a["threads"]) c.assembly.threads = scalar<int>(a["threads"], "threads");
  }
  if (const YAML::Node s = root["solver"]) {
    only_keys(s, "solver", {"kind", "tol", "max_iter", "restart"});
    if (s["kind"]) c.solver.kind = solver_kind_from_string(scalar<std::string>(s["kind"], "solver.kind"));
    if (s["tol"]) c.solver.tol = scalar<double>(s["tol"], "solver.tol");
    if (s["max_iter"]) c.solver.max_iter = scalar<int>(s["max_iter"], "solver.max_iter");
    if (s["restart"]) c.solver.restart = scalar<int>(s["restart"], "solver.restart");
  }
  if (const YAML::Node n = root["norms"]) {
    only_keys(n, "norms", {"points", "coercivity_samples"});
    if (n["points"]) c.norm_points = scalar<int>(n["points"], "norms.points");
    if (n["coercivity_samples"])
      c.coercivity_samples = scalar<int>(n["coercivity_samples"], "norms.coercivity_samples");
  }
  if (root["geometry"]) c.geometry = read_geometry(root["geometry"]);
  if (root["check"]) read_checks(root["check"], c.checks);
  if (root["out"]) c.out = scalar<std::string>(root["out"], "out");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path.stem().string());
}

namespace {

std::function<void(MaterialParams&)> adjuster(const ParamOverrides& p) {
  if (p.empty()) return {};
  return [p](MaterialParams& m) { p.apply(m); };
}

std::string time_tag(int i) { return "t" + std::to_string(i); }

// Factor from configured times to model times.
double time_scale(const RunConfig& c) {
  if (c.time_unit != "pi_over_beta") return 1.0;
  BarryMercerCase bm;
  c.params.apply(bm.params);
  return std::numbers::pi / bm.beta();
}

BenchmarkOptions benchmark_options(const RunConfig& c) {
  BenchmarkOptions b;
  b.case_name = c.case_name;
  b.degrees = c.degrees;
  b.spatial_spans = c.spatial_spans;
  b.time_spans = c.time_spans;
  b.times = c.times;
  b.fields = c.fields;
  b.cut = c.cut;
  b.assembly = c.assembly;
  b.solver = c.solver;
  b.adjust = adjuster(c.params);
  b.geometry = c.geometry;
  for (double& t : b.times) t *= time_scale(c);
  return b;
}

std::string describe(double v) { return format_number(v); }

void convergence(const RunConfig& c, RunOutcome& out) {
  ConvergenceOptions o;
  o.degrees = c.degrees;
  c.params.apply(o.params);
  o.spans = c.levels;
  o.assembly = c.assembly;
  o.solver = c.solver;
  o.norm_points = c.norm_points;
  o.coercivity_samples = c.coercivity_samples;
  if (c.checks.max_coercivity_ratio && o.coercivity_samples == 0) o.coercivity_samples = 20;
  o.geometry = c.geometry;

  const auto csv = c.out / (c.name + ".csv");
  std::vector<ConvergenceRow> rows;
  auto flush = [&] { write_text(csv, convergence_table(rows).to_csv()); };
  try {
    run_convergence(o, [&](const ConvergenceRow& r) {
      rows.push_back(r);
      flush();
    });
  } catch (...) {
    flush();
    throw;
  }
  const auto svg = c.out / (c.name + ".svg");
  write_text(svg, render_svg(convergence_plot(rows)));
  out.files = {csv, svg};
  for (const ConvergenceRow& r : rows)
    out.summary.push_back("h_S=" + describe(r.h_S) + " dofs=" + std::to_string(r.dofs) +
                          " norm_h=" + describe(r.norm_h) + " order=" + describe(r.observed_order) +
                          (std::isnan(r.coercivity) ? "" : " coercivity=" + describe(r.coercivity)));

  if (c.checks.min_order) {
    const double order = rows.size() > 1 ? rows.back().observed_order : std::nan("");
    out.checks.push_back({"min_order", order >= *c.checks.min_order,
                          "observed " + describe(order) + ", required " + describe(*c.checks.min_order)});
  }
  if (c.checks.max_coercivity_ratio) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const ConvergenceRow& r : rows) {
      lo = std::min(lo, r.coercivity);
      hi = std::max(hi, r.coercivity);
    }
    const bool ok = lo > 0 && hi / lo < *c.checks.max_coercivity_ratio;
    out.checks.push_back({"max_coercivity_ratio", ok,
                          "min " + describe(lo) + ", max " + describe(hi)});
  }
}

std::string series_stem(const RunConfig& c, const CutSeries& s, int time_index) {
  return c.name + "_" + s.field + "_" + time_tag(time_index);
}

void emit_series(const RunConfig& c, const std::vector<CutSeries>& series,
                 const std::vector<double>& times, RunOutcome& out) {
  for (const CutSeries& s : series) {
    const auto it = std::find(times.begin(), times.end(), s.t);
    const int ti = static_cast<int>(it - times.begin());
    const std::string stem = series_stem(c, s, ti);
    const auto csv = c.out / (stem + ".csv");
    const auto svg = c.out / (stem + ".svg");
    write_text(csv, series_table(s).to_csv());
    write_text(svg, render_svg(series_plot(s, c.case_name + ": " + s.field + " at t = " + describe(s.t))));
    out.files.push_back(csv);
    out.files.push_back(svg);
  }
}

void benchmark(const RunConfig& c, RunOutcome& out) {
  const BenchmarkOptions b = benchmark_options(c);
  if (b.times.empty()) throw ConfigError("benchmark runs need output times");
  const BenchmarkResult r = run_benchmark(b);
  emit_series(c, r.series, b.times, out);
  out.summary.push_back("dofs=" + std::to_string(r.run.dofs) + " solver=" + r.run.report.method +
                        " relative_residual=" + describe(r.run.report.relative_residual));

  std::vector<std::pair<double, double>> deviation;  // (t, max deviation)
  for (const CutSeries& s : r.series) {
    if (s.reference.empty()) continue;
    const double rel = relative_l2(s.numeric, s.reference);
    const double dev = max_abs_difference(s.numeric, s.reference);
    out.summary.push_back(s.field + " t=" + describe(s.t) + " relative_l2=" + describe(rel) +
                          " max_deviation=" + describe(dev));
    if (s.field == "p" || c.fields.size() == 1) deviation.emplace_back(s.t, dev);
    if (!c.checks.max_relative_l2) continue;
    const auto& sel = c.checks.relative_l2_times;
    const auto& fields = c.checks.relative_l2_fields;
    const bool field_selected =
        fields.empty() || std::find(fields.begin(), fields.end(), s.field) != fields.end();
    const bool selected = field_selected && (sel.empty() || std::any_of(sel.begin(), sel.end(), [&](double t) {
                            return std::abs(t * time_scale(c) - s.t) <= 1e-12 * std::max(1.0, s.t);
                          }));
    if (selected)
      out.checks.push_back({"relative_l2 " + s.field + " t=" + describe(s.t), rel <= *c.checks.max_relative_l2,
                            describe(rel) + " against " + describe(*c.checks.max_relative_l2)});
  }
  if (c.checks.max_relative_l2 && deviation.empty())
    throw ConfigError("max_relative_l2 needs a case with a reference solution");
  if (c.checks.deviation_largest_at_earliest) {
    if (deviation.size() < 2) throw ConfigError("deviation check needs two or more output times");
    const auto earliest = std::min_element(deviation.begin(), deviation.end());
    const auto largest = std::max_element(deviation.begin(), deviation.end(),
                                          [](const auto& a, const auto& b) { return a.second < b.second; });
    out.checks.push_back({"deviation_largest_at_earliest", earliest == largest,
                          "largest deviation " + describe(largest->second) + " at t=" + describe(largest->first)});
  }
}

void stability(const RunConfig& c, RunOutcome& out) {
  StabilityOptions o;
  o.base = benchmark_options(c);
  o.r_p = c.stability_r_p;
  o.time = c.stability_time;
  const StabilityReport rep = run_stability_report(o);
  const auto csv = c.out / (c.name + "_stability.csv");
  write_text(csv, stability_table(rep.rows).to_csv());
  out.files.push_back(csv);
  emit_series(c, rep.series, {o.time}, out);
  for (const StabilityRow& r : rep.rows)
    out.summary.push_back(r.label + ": tv_p=" + describe(r.tv_p) + " overshoot=" + describe(r.overshoot) +
                          " std_u2=" + describe(r.std_u2));
  const StabilityRow& eq = rep.rows.at(0);
  const StabilityRow& mx = rep.rows.at(1);
  if (c.checks.min_tv_ratio) {
    const double ratio = eq.tv_p / mx.tv_p;
    out.checks.push_back({"min_tv_ratio", ratio >= *c.checks.min_tv_ratio,
                          "TV equal/mixed " + describe(ratio) + ", required " + describe(*c.checks.min_tv_ratio)});
  }
  if (c.checks.mixed_std_u2_larger) {
    if (std::isnan(eq.std_u2)) throw ConfigError("mixed_std_u2_larger needs a layer case");
    out.checks.push_back({"mixed_std_u2_larger", mx.std_u2 > eq.std_u2,
                          "mixed " + describe(mx.std_u2) + ", equal " + describe(eq.std_u2)});
  }
}

}  // namespace

RunOutcome execute(const RunConfig& config) {
  RunOutcome out;
  if (config.mode == "convergence") convergence(config, out);
  else if (config.mode == "benchmark") benchmark(config, out);
  else if (config.mode == "stability") stability(config, out);
  else throw ConfigError("unknown mode '" + config.mode + "'");
  return out;
}

}  // namespace igst
