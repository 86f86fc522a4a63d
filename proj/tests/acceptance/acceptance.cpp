// Acceptance criteria 1-10: one PASS/FAIL line each, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "igst/analytic.hpp"
#include "igst/benchmarks.hpp"
#include "igst/norms.hpp"
#include "igst/splines.hpp"

using namespace igst;

namespace {

constexpr double pi = std::numbers::pi;
int failures = 0;

void report(int id, bool ok, const std::string& detail, double seconds) {
  std::printf("%s criterion %d: %s (%.1f s)\n", ok ? "PASS" : "FAIL", id, detail.c_str(), seconds);
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <typename F>
void criterion(int id, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  std::ostringstream detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail << "error: " << e.what();
  }
  report(id, ok, detail.str(), std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

std::vector<ConvergenceRow> sweep(const Degrees& degrees, double c0, int coercivity_samples) {
  ConvergenceOptions o;
  o.degrees = degrees;
  o.params.c0 = c0;
  o.spans = {2, 4, 8, 16};
  o.coercivity_samples = coercivity_samples;
  return run_convergence(o);
}

std::string orders(const std::vector<ConvergenceRow>& rows) {
  std::ostringstream os;
  for (std::size_t i = 1; i < rows.size(); ++i) os << (i > 1 ? " " : "") << rows[i].observed_order;
  return os.str();
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// Mixed sweeps shared by criteria 1 and 2.
std::vector<ConvergenceRow> mixed_c1[2], mixed_c0[2];

bool convergence(std::ostream& d) {
  bool ok = true;
  for (int r_p : {1, 2}) {
    mixed_c1[r_p - 1] = sweep(mixed_degrees(r_p), 1.0, 0);
    const double q = mixed_c1[r_p - 1].back().observed_order;
    ok = ok && q >= r_p - 0.2;
    d << "r_p=" << r_p << " orders [" << orders(mixed_c1[r_p - 1]) << "] need >= " << r_p - 0.2 << "; ";
  }
  return ok;
}

bool c0_zero(std::ostream& d) {
  bool ok = true;
  for (int r_p : {1, 2}) {
    mixed_c0[r_p - 1] = sweep(mixed_degrees(r_p), 0.0, 20);
    double min_mu = std::numeric_limits<double>::infinity();
    for (const auto& r : mixed_c0[r_p - 1]) min_mu = std::min(min_mu, r.coercivity);
    const double q0 = mixed_c0[r_p - 1].back().observed_order;
    const double q1 = mixed_c1[r_p - 1].empty() ? NAN : mixed_c1[r_p - 1].back().observed_order;
    ok = ok && min_mu > 0 && std::abs(q0 - q1) <= 0.2;
    d << "r_p=" << r_p << " min mu " << min_mu << ", order " << q0 << " vs " << q1 << "; ";
  }
  return ok;
}

bool equal_degree(std::ostream& d) {
  const auto rows = sweep(equal_degrees(2), 1.0, 0);
  d << "orders [" << orders(rows) << "] need >= 1.6";
  return rows.back().observed_order >= 1.6;
}

bool coercivity(std::ostream& d) {
  bool ok = true;
  for (double c0 : {0.0, 1.0}) {
    MaterialParams p;
    p.c0 = c0;
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    d << "c0=" << c0 << " mu";
    for (int n : {2, 4, 8}) {
      const double mu = sampled_coercivity(p, mixed_degrees(1), n, 200);
      lo = std::min(lo, mu);
      hi = std::max(hi, mu);
      d << " " << mu;
    }
    ok = ok && lo > 0 && hi / lo < 2;
    d << " ratio " << hi / lo << "; ";
  }
  return ok;
}

bool consistency(std::ostream& d) {
  std::vector<double> res;
  for (int n : {2, 4, 8, 16}) res.push_back(interpolant_residual(MaterialParams{}, mixed_degrees(1), n));
  bool ok = true;
  d << "residuals";
  for (double r : res) d << " " << r;
  d << ", orders";
  for (std::size_t i = 1; i < res.size(); ++i) {
    const double q = observed_order(res[i - 1], res[i], 1.0 / (1 << i), 1.0 / (1 << (i + 1)));
    ok = ok && q > 0;
    d << " " << q;
  }
  return ok;
}

bool multistep(std::ostream& d) {
  const auto c = derive_multistep_coefficients<Rational>();
  const bool exact = c.alpha[0] == Rational(-3, 4) && c.alpha[1] == Rational(1) && c.alpha[2] == Rational(-1, 4) &&
                     c.beta[0] == Rational(1, 3) && c.beta[1] == Rational(1, 3) && c.beta[2] == Rational(-1, 6);
  const double e1 = multistep_truncation_error(1.0, 0.1), e2 = multistep_truncation_error(1.0, 0.05),
               e3 = multistep_truncation_error(1.0, 0.025);
  const double s1 = std::log2(std::abs(e1 / e2)), s2 = std::log2(std::abs(e2 / e3));
  d << "alpha (" << c.alpha[0] << ", " << c.alpha[1] << ", " << c.alpha[2] << ") beta (" << c.beta[0] << ", "
    << c.beta[1] << ", " << c.beta[2] << "), slopes " << s1 << " " << s2;
  return exact && std::abs(s1 - 3) <= 0.1 && std::abs(s2 - 3) <= 0.1;
}

bool terzaghi(std::ostream& d) {
  BenchmarkOptions o;
  o.case_name = "terzaghi";
  o.degrees = equal_degrees(1);
  o.spatial_spans = 20;
  o.time_spans = 100;
  o.times = {0.05, 0.5, 1.0};
  o.cut = Cut{Vec::Constant(1, 0.0), Vec::Constant(1, 1.0), 201};
  o.adjust = [](MaterialParams& p) {
    p.c0 = 0.2;
    p.lambda = 1;
    p.mu = 1;
    p.k = 0.2;
  };
  const BenchmarkResult r = run_benchmark(o);
  bool ok = true;
  std::vector<double> dev;
  for (const CutSeries& s : r.series) {
    dev.push_back(max_abs_difference(s.numeric, s.reference));
    if (s.t > 0.1) {
      const double rel = relative_l2(s.numeric, s.reference);
      ok = ok && rel <= 0.05;
      d << "rel L2(t=" << s.t << ") " << rel << "; ";
    }
  }
  d << "max deviation " << dev[0] << " " << dev[1] << " " << dev[2];
  return ok && dev[0] > dev[1] && dev[0] > dev[2];
}

bool barry_mercer(std::ostream& d) {
  const BarryMercerCase bm;
  const double beta = bm.beta();
  const Cut diagonal{vec2(0, 0), vec2(1, 1), 201};
  // Midpoints of a diagonal window around x0, never on x0 itself.
  const Cut window{vec2(0.1525, 0.1525), vec2(0.3475, 0.3475), 40};
  SolverOptions solver;
  solver.kind = SolverKind::Iterative;
  solver.tol = 1e-10;
  bool ok = true;
  std::vector<double> near_error[2];
  for (int n : {34, 66}) {
    const CaseSetup setup = named_setup("barry_mercer", {}, 1.0 / n);
    const Mesh mesh = case_mesh(setup, n, 18);
    const RunResult run = run_case(setup, mesh, equal_degrees(1), {}, solver);
    for (double tu : {0.5, 1.5}) {
      const double t = tu * pi / beta;
      if (n == 34) {
        const std::vector<double> u1 = sample_cut(run.solution, "u", 0, diagonal, t);
        std::vector<double> ref;
        for (int i = 0; i < diagonal.samples; ++i) {
          const Vec x = diagonal.point(i);
          ref.push_back(barry_mercer_reference(x(0), x(1), t, bm, bm.terms).u1);
        }
        const double rel = relative_l2(u1, ref);
        ok = ok && rel <= 0.1;
        d << "u1 rel L2(t=" << tu << " pi/beta) " << rel << "; ";
      }
      const std::vector<double> p = sample_cut(run.solution, "p", 0, window, t);
      std::vector<double> ref;
      for (int i = 0; i < window.samples; ++i) {
        const Vec x = window.point(i);
        ref.push_back(barry_mercer_reference(x(0), x(1), t, bm, bm.terms).p);
      }
      near_error[n == 34 ? 0 : 1].push_back(l2_difference(p, ref, window.length() / (window.samples - 1)));
    }
  }
  for (std::size_t i = 0; i < 2; ++i) {
    ok = ok && near_error[1][i] < near_error[0][i];
    d << "p error near x0 (t=" << (i ? 1.5 : 0.5) << " pi/beta) " << near_error[0][i] << " -> " << near_error[1][i]
      << "; ";
  }
  return ok;
}

bool contrasts(std::ostream& d) {
  SolverOptions iterative;
  iterative.kind = SolverKind::Iterative;
  iterative.tol = 1e-10;

  StabilityOptions a;
  a.base.case_name = "terzaghi";
  a.base.spatial_spans = 40;
  a.base.time_spans = 100;
  a.base.cut = Cut{Vec::Constant(1, 0.0), Vec::Constant(1, 1.0), 201};
  a.base.adjust = [](MaterialParams& p) {
    p.c0 = 1e-7;
    p.k = 1e-7;
  };
  const StabilityReport ra = run_stability_report(a);
  const double ratio = ra.rows[0].tv_p / ra.rows[1].tv_p;
  d << "(a) TV equal/mixed " << ratio << "; ";

  StabilityOptions b;
  b.base.case_name = "layer_low_perm";
  b.base.spatial_spans = 40;
  b.base.time_spans = 5;
  b.base.cut = Cut{vec2(0.75, 0), vec2(0.75, 1), 201};
  b.base.solver = iterative;
  const StabilityReport rb = run_stability_report(b);
  d << "(b) TV equal " << rb.rows[0].tv_p << " mixed " << rb.rows[1].tv_p << "; ";

  StabilityOptions c = b;
  c.base.case_name = "layer_low_compr";
  const StabilityReport rc = run_stability_report(c);
  d << "(c) std u2 equal " << rc.rows[0].std_u2 << " mixed " << rc.rows[1].std_u2;

  return ratio >= 3 && rb.rows[1].tv_p < rb.rows[0].tv_p && rc.rows[1].std_u2 > rc.rows[0].std_u2;
}

bool unit_oracles(std::ostream& d) {
  double worst = 0;
  auto track = [&worst](double e) { worst = std::max(worst, std::abs(e)); };
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);

  // Splines: partition of unity, local support, derivatives, knot insertion.
  const KnotVectord kv = KnotVectord::from_breakpoints({0.0, 0.2, 0.45, 0.7, 1.0}, 3, 1);
  const double h = 1e-3;
  for (int s = 0; s < 200; ++s) {
    const double z = U(gen);
    const auto b = eval_basis(kv, z);
    track(b.values.sum() - 1);
    if (b.first != kv.find_span(z) - kv.degree()) track(1);
    const int span = kv.find_span(z);
    if (z - 2 * h > 0 && z + 2 * h < 1 && kv.find_span(z - 2 * h) == span && kv.find_span(z + 2 * h) == span) {
      // Five-point stencil, exact for cubics inside a span.
      const auto dd = eval_basis_derivs(kv, z, 1);
      for (int j = 0; j <= kv.degree(); ++j) {
        auto f = [&](double y) { return eval_basis(kv, y).values(j); };
        const double fd = (-f(z + 2 * h) + 8 * f(z + h) - 8 * f(z - h) + f(z - 2 * h)) / (12 * h);
        track(dd.ders(1, j) - fd);
      }
    }
  }
  const auto ins = insert_knot(kv, 0.33);
  Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(kv.size(), -1, 2).array().sin();
  const Eigen::VectorXd cr = ins.transfer * c;
  for (int s = 0; s < 100; ++s) {
    const double z = U(gen);
    const auto a = eval_basis(kv, z), b = eval_basis(ins.knots, z);
    track(a.values.dot(c.segment(a.first, 4)) - b.values.dot(cr.segment(b.first, 4)));
  }

  // Gauss rules integrate x^k, k <= 2n - 1, exactly.
  for (int n = 1; n <= 8; ++n) {
    const auto q = gauss_rule(n);
    for (int k = 0; k < 2 * n; ++k) {
      double sum = 0;
      for (int i = 0; i < n; ++i) sum += q.weights[i] * std::pow(q.points[i], k);
      track(sum - 1.0 / (k + 1));
    }
  }

  // Closed-form norms of p = x y t on the unit square, T = 1.
  const Mesh mesh = box_mesh({{0.0, 1.0}, {0.0, 1.0}}, 1.0, {2, 2}, 3);
  FieldPair fp;
  fp.u = zero_field(2, 2);
  fp.p = physical_field(1, [](const Vec& x, double t) {
    FieldSample s{Eigen::VectorXd::Constant(1, x(0) * x(1) * t), Eigen::MatrixXd(1, 2),
                  Eigen::VectorXd::Constant(1, x(0) * x(1)), Eigen::MatrixXd(1, 2)};
    s.grad << x(1) * t, x(0) * t;
    s.grad_dt << x(1), x(0);
    return s;
  });
  const HNormTerms terms = h_norm_terms(fp, mesh);
  track(terms.dt_p_L2 - 1.0 / 9);
  track(terms.p_final_L2 - 1.0 / 9);
  track(terms.grad_p_L2 - 2.0 / 9);

  // Dirac approximation has unit mass on the uniform grid.
  for (int n : {10, 34, 66}) {
    const DiracApprox da = dirac_approx(1.0 / n, vec2(0.25, 0.25));
    double mass = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) mass += da(vec2((i + 0.5) / n, (j + 0.5) / n)) / (double(n) * n);
    track(mass - 1);
  }
  d << "largest deviation " << worst << " need <= 1e-10";
  return worst <= 1e-10;
}

}  // namespace

int main() {
  criterion(1, convergence);
  criterion(2, c0_zero);
  criterion(3, equal_degree);
  criterion(4, coercivity);
  criterion(5, consistency);
  criterion(6, multistep);
  criterion(7, terzaghi);
  criterion(8, barry_mercer);
  criterion(9, contrasts);
  criterion(10, unit_oracles);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
