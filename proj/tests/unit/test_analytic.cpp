#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "igst/analytic.hpp"
#include "igst/benchmarks.hpp"

using namespace igst;

namespace {

constexpr double pi = std::numbers::pi;

// Forward-mode dual number; nesting Dual<Dual<double>> gives mixed derivatives.
template <typename T>
struct Dual {
  T v{}, d{};
};

template <typename T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.d + b.d}; }
template <typename T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
template <typename T>
Dual<T> operator*(double a, const Dual<T>& b) { return {a * b.v, a * b.d}; }
template <typename T>
Dual<T> operator-(const Dual<T>& a, double b) { return {a.v - b, a.d}; }
template <typename T>
Dual<T> sin(const Dual<T>& a) {
  using std::cos;
  using std::sin;
  return {sin(a.v), cos(a.v) * a.d};
}
template <typename T>
Dual<T> cos(const Dual<T>& a) {
  using std::cos;
  using std::sin;
  return {cos(a.v), -1.0 * (sin(a.v) * a.d)};
}
template <typename T>
Dual<T> exp(const Dual<T>& a) {
  using std::exp;
  const T e = exp(a.v);
  return {e, e * a.d};
}

using D1 = Dual<double>;
using D2 = Dual<D1>;
using D3 = Dual<D2>;

// Manufactured solution for any scalar type: components 0, 1 are u, 2 is p.
template <typename S>
S exact(int which, const S& x, const S& y, const S& t) {
  using std::exp;
  using std::sin;
  const S s = sin(pi * x) * sin(pi * y);
  if (which == 0) return s * sin(pi * t);
  if (which == 1) return s * (exp(t) - 1.0);
  return s * sin(0.5 * pi * t);
}

struct Point {
  double x, y, t;
};

double coord(const Point& p, int k) { return k == 0 ? p.x : k == 1 ? p.y : p.t; }
double seed(int k, int dir) { return k == dir ? 1.0 : 0.0; }

double d1(int which, const Point& p, int i) {
  D1 v[3];
  for (int k = 0; k < 3; ++k) v[k] = {coord(p, k), seed(k, i)};
  return exact(which, v[0], v[1], v[2]).d;
}

double d2(int which, const Point& p, int i, int j) {
  D2 v[3];
  for (int k = 0; k < 3; ++k) v[k] = {{coord(p, k), seed(k, i)}, {seed(k, j), 0.0}};
  return exact(which, v[0], v[1], v[2]).d.d;
}

double d3(int which, const Point& p, int i, int j, int l) {
  D3 v[3];
  for (int k = 0; k < 3; ++k)
    v[k] = {{{coord(p, k), seed(k, i)}, {seed(k, j), 0.0}}, {{seed(k, l), 0.0}, {0.0, 0.0}}};
  return exact(which, v[0], v[1], v[2]).d.d.d;
}

// f_i = -sum_j d_j sigma_ij + b d_i p with sigma = mu (grad u + grad u^T) + lambda div u I;
// With time_derivative set, every term is differentiated once more in t.
Eigen::Vector2d force_oracle(const MaterialParams& m, const Point& p, bool time_derivative) {
  auto D2 = [&](int w, int i, int j) { return time_derivative ? d3(w, p, i, j, 2) : d2(w, p, i, j); };
  auto D1 = [&](int w, int i) { return time_derivative ? d2(w, p, i, 2) : d1(w, p, i); };
  Eigen::Vector2d f;
  for (int i = 0; i < 2; ++i) {
    double div_sigma = 0;
    for (int j = 0; j < 2; ++j) div_sigma += m.mu * (D2(i, j, j) + D2(j, i, j));
    div_sigma += m.lambda * (D2(0, 0, i) + D2(1, 1, i));
    f(i) = -div_sigma + m.b * D1(2, i);
  }
  return f;
}

double source_oracle(const MaterialParams& m, const Point& p) {
  return m.c0 * d1(2, p, 2) + m.b * (d2(0, p, 0, 2) + d2(1, p, 1, 2)) - m.k * (d2(2, p, 0, 0) + d2(2, p, 1, 1));
}

std::vector<Point> random_points(int n, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) pts.push_back({U(gen), U(gen), U(gen)});
  return pts;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST(Manufactured, DataSatisfiesTheStrongForm) {
  MaterialParams m;
  m.c0 = 0.3;
  m.lambda = 2.5;
  m.mu = 0.7;
  m.k = 1.9;
  m.b = 0.6;
  const ManufacturedCase mc = manufactured_data(m);
  for (const Point& p : random_points(50, 1)) {
    const Vec x = vec2(p.x, p.y);
    const Eigen::Vector2d f = force_oracle(m, p, false), df = force_oracle(m, p, true);
    const double scale = 1.0 + f.norm();
    EXPECT_LT((mc.f(x, p.t) - f).norm(), 1e-10 * scale);
    EXPECT_LT((mc.df(x, p.t) - df).norm(), 1e-10 * (1.0 + df.norm()));
    const double g = source_oracle(m, p);
    EXPECT_NEAR(mc.g(x, p.t), g, 1e-10 * (1.0 + std::abs(g)));
  }
}

TEST(Manufactured, FieldDerivativesMatchAutoDiff) {
  const ManufacturedCase mc = manufactured_data(MaterialParams{});
  for (const Point& p : random_points(20, 2)) {
    const Vec x = vec2(p.x, p.y);
    const FieldSample u = mc.displacement(x, p.t), q = mc.pressure(x, p.t);
    for (int c = 0; c < 2; ++c) {
      EXPECT_NEAR(u.value(c), exact<double>(c, p.x, p.y, p.t), 1e-14);
      EXPECT_NEAR(u.dt(c), d1(c, p, 2), 1e-12);
      for (int k = 0; k < 2; ++k) {
        EXPECT_NEAR(u.grad(c, k), d1(c, p, k), 1e-12);
        EXPECT_NEAR(u.grad_dt(c, k), d2(c, p, k, 2), 1e-11);
      }
    }
    EXPECT_NEAR(q.grad(0, 1), d1(2, p, 1), 1e-12);
    EXPECT_NEAR(q.grad_dt(0, 0), d2(2, p, 0, 2), 1e-11);
  }
}

TEST(Manufactured, VanishesOnTheBoundaryAndInitially) {
  const ManufacturedCase mc = manufactured_data(MaterialParams{});
  for (double s : {0.0, 0.3, 1.0}) {
    EXPECT_NEAR(mc.displacement(vec2(s, 0.0), 0.4).value.norm(), 0.0, 1e-15);
    EXPECT_NEAR(mc.pressure(vec2(1.0, s), 0.4).value(0), 0.0, 1e-15);
    EXPECT_NEAR(mc.displacement(vec2(s, 0.5), 0.0).value.norm(), 0.0, 1e-15);
  }
  MaterialParams varying;
  varying.field = [](const Vec&) { return Eigen::Vector3d(1, 1, 1); };
  EXPECT_THROW(manufactured_data(varying), InvalidArgument);
}

TEST(Terzaghi, Constants) {
  TerzaghiCase c;
  c.params.c0 = 0.2;
  c.params.lambda = 1.0;
  c.params.mu = 1.0;
  c.params.k = 0.2;
  c.params.b = 1.0;
  // M = 3, c0 M + b^2 = 1.6
  EXPECT_NEAR(c.load_factor(), 1.0 / 1.6, 1e-15);
  EXPECT_NEAR(c.consolidation(), 0.2 * 3.0 / 1.6, 1e-15);
}

TEST(Terzaghi, BoundaryAndInitialBehaviour) {
  TerzaghiCase c;
  c.params.c0 = 0.2;
  c.params.k = 0.2;
  c.L = 2.0;
  for (double t : {0.01, 0.3, 2.0}) {
    EXPECT_NEAR(c.pressure(0.0, t), 0.0, 1e-14);
    EXPECT_NEAR(c.pressure_dx(c.L, t), 0.0, 1e-12);
  }
  // Undrained response p = p0 away from the drained end at early times.
  EXPECT_NEAR(c.pressure(1.0, 1e-3), c.load_factor(), 1e-6);
  EXPECT_THROW(c.pressure(0.5, 0.0), InvalidArgument);
  EXPECT_THROW(c.pressure(2.5, 0.1), InvalidArgument);
}

TEST(Terzaghi, SeriesSolvesTheDiffusionEquation) {
  TerzaghiCase c;
  c.params.c0 = 0.2;
  c.params.k = 0.2;
  const double cv = c.consolidation();
  for (double x : {0.2, 0.5, 0.9})
    for (double t : {0.1, 0.5}) {
      const double h = 1e-4;
      const double pt = (c.pressure(x, t + h) - c.pressure(x, t - h)) / (2 * h);
      const double pxx = (c.pressure_dx(x + h, t) - c.pressure_dx(x - h, t)) / (2 * h);
      EXPECT_NEAR(pt, cv * pxx, 1e-6);
      const double px = (c.pressure(x + h, t) - c.pressure(x - h, t)) / (2 * h);
      EXPECT_NEAR(c.pressure_dx(x, t), px, 1e-7);
    }
}

TEST(Terzaghi, SeriesAgreesWithAFineSolve) {
  BenchmarkOptions o;
  o.case_name = "terzaghi";
  o.degrees = equal_degrees(2);
  o.spatial_spans = 20;
  o.time_spans = 400;
  o.times = {0.5, 1.0};
  o.cut = Cut{Vec::Constant(1, 0.0), Vec::Constant(1, 1.0), 101};
  const BenchmarkResult r = run_benchmark(o);
  for (const CutSeries& s : r.series) EXPECT_LT(max_abs_difference(s.numeric, s.reference), 2e-3) << "t=" << s.t;
}

TEST(BarryMercer, ReferenceAgreesWithThePlainSeries) {
  const BarryMercerCase c;
  const double t = 0.5 * pi / c.beta();
  for (const Vec& x : {vec2(0.7, 0.4), vec2(0.1, 0.9), vec2(0.5, 0.5)}) {
    const BarryMercerValue ref = barry_mercer_reference(x(0), x(1), t, c, c.terms);
    const BarryMercerValue s = barry_mercer_series(x(0), x(1), t, c, 800);
    EXPECT_NEAR(s.p, ref.p, 1e-6 * std::abs(ref.p));
    EXPECT_NEAR(s.u1, ref.u1, 1e-6 * std::abs(ref.u1));
    EXPECT_NEAR(s.u2, ref.u2, 1e-6 * std::abs(ref.u2));
  }
}

TEST(BarryMercer, TruncationErrorDecreasesWithTerms) {
  const BarryMercerCase c;
  const double t = 1.5 * pi / c.beta();
  const BarryMercerValue ref = barry_mercer_reference(0.6, 0.3, t, c, c.terms);
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {50, 100, 200, 400}) {
    const double err = std::abs(barry_mercer_series(0.6, 0.3, t, c, n).p - ref.p);
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(BarryMercer, SymmetryAcrossTheDiagonal) {
  const BarryMercerCase c;
  ASSERT_EQ(c.x0(0), c.x0(1));
  const double t = 0.5 * pi / c.beta();
  for (const Vec& x : {vec2(0.7, 0.4), vec2(0.2, 0.6), vec2(0.33, 0.91)}) {
    const BarryMercerValue a = barry_mercer_reference(x(0), x(1), t, c, c.terms);
    const BarryMercerValue b = barry_mercer_reference(x(1), x(0), t, c, c.terms);
    EXPECT_NEAR(a.p, b.p, 1e-10 * std::abs(a.p));
    EXPECT_NEAR(a.u1, b.u2, 1e-10 * std::abs(a.u1));
    EXPECT_NEAR(a.u2, b.u1, 1e-10 * std::abs(a.u2));
  }
}

TEST(BarryMercer, BoundaryConditions) {
  const BarryMercerCase c;
  const double t = 0.5 * pi / c.beta();
  for (double s : {0.1, 0.5, 0.8}) {
    EXPECT_NEAR(barry_mercer_reference(s, 0.0, t, c, c.terms).p, 0.0, 1e-12);
    EXPECT_NEAR(barry_mercer_reference(s, 1.0, t, c, c.terms).u1, 0.0, 1e-12);
    EXPECT_NEAR(barry_mercer_reference(0.0, s, t, c, c.terms).u2, 0.0, 1e-12);
  }
}

TEST(Dirac, UnitMassOnTheSourceCell) {
  for (int n : {10, 34, 66}) {
    const DiracApprox d = dirac_approx(1.0 / n, vec2(0.25, 0.25));
    EXPECT_NEAR(d.density, double(n) * n, 1e-9);
    // Midpoint quadrature over the uniform grid.
    double mass = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) mass += d(vec2((i + 0.5) / n, (j + 0.5) / n)) / (double(n) * n);
    EXPECT_NEAR(mass, 1.0, 1e-12);
  }
  const DiracApprox a = dirac_approx(1.0 / 34, vec2(0.25, 0.25)), b = dirac_approx(1.0 / 102, vec2(0.25, 0.25));
  EXPECT_NEAR(b.density / a.density, 9.0, 1e-12);
  EXPECT_FALSE(a.contains(vec2(0.25 + 0.6 / 34, 0.25)));
  EXPECT_TRUE(a.contains(vec2(0.25 + 0.4 / 34, 0.25 - 0.4 / 34)));
}

TEST(Dirac, RejectsMisalignedGrids) {
  EXPECT_THROW(dirac_approx(0.25, vec2(0.25, 0.25)), InvalidArgument);
  EXPECT_THROW(dirac_approx(0.0, vec2(0.25, 0.25)), InvalidArgument);
  EXPECT_THROW(dirac_approx(2.0, vec2(0.5, 0.5)), InvalidArgument);
  EXPECT_THROW(dirac_approx(0.1, vec2(0.05, 1.05)), InvalidArgument);
}

TEST(Multistep, CoefficientsAreExact) {
  const auto c = derive_multistep_coefficients<Rational>();
  EXPECT_EQ(c.alpha[0], Rational(-3, 4));
  EXPECT_EQ(c.alpha[1], Rational(1));
  EXPECT_EQ(c.alpha[2], Rational(-1, 4));
  EXPECT_EQ(c.beta[0], Rational(1, 3));
  EXPECT_EQ(c.beta[1], Rational(1, 3));
  EXPECT_EQ(c.beta[2], Rational(-1, 6));
  const auto d = derive_multistep_coefficients<double>();
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(d.alpha[j], static_cast<double>(c.alpha[j]), 1e-15);
    EXPECT_NEAR(d.beta[j], static_cast<double>(c.beta[j]), 1e-15);
  }
}

TEST(Multistep, TruncationErrorIsThirdOrder) {
  const double e1 = multistep_truncation_error(1.0, 0.1), e2 = multistep_truncation_error(1.0, 0.05),
               e3 = multistep_truncation_error(1.0, 0.025);
  EXPECT_NEAR(std::log2(std::abs(e1 / e2)), 3.0, 0.1);
  EXPECT_NEAR(std::log2(std::abs(e2 / e3)), 3.0, 0.1);
}

TEST(Multistep, AdvanceSolvesTheRecursion) {
  const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(1, 1);
  const Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(1, 1);
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(1, 2.5);
  EXPECT_NEAR(multistep_reduction(M, Z, 0.1).advance(M, Z, 0.1, c, c)(0), 2.5, 1e-14);

  // One step of w' = -w from exact values: local error O(dt^4).
  const Eigen::MatrixXd A = -M;
  std::vector<double> err;
  for (double dt : {0.1, 0.05, 0.025}) {
    const Eigen::VectorXd w0 = Eigen::VectorXd::Ones(1), w1 = Eigen::VectorXd::Constant(1, std::exp(-dt));
    err.push_back(std::abs(multistep_reduction(M, A, dt).advance(M, A, dt, w0, w1)(0) - std::exp(-2 * dt)));
  }
  EXPECT_NEAR(std::log2(err[0] / err[1]), 4.0, 0.15);
  EXPECT_NEAR(std::log2(err[1] / err[2]), 4.0, 0.15);
  EXPECT_NEAR(multistep_reduction(M, A, 0.1).step_matrix(0, 0), -0.25 - 0.1 / 6, 1e-15);
}

TEST(Multistep, CharacteristicRootsAreOneAndThree) {
  // alpha_0 + alpha_1 z + alpha_2 z^2 = -(z - 1)(z - 3) / 4: consistent, but
  // marching step by step is not zero-stable.
  const auto c = derive_multistep_coefficients<Rational>();
  for (Rational z : {Rational(1), Rational(3)}) EXPECT_EQ(c.alpha[0] + c.alpha[1] * z + c.alpha[2] * z * z, Rational(0));
  EXPECT_EQ(c.beta[0] + c.beta[1] + c.beta[2], c.alpha[1] + c.alpha[2] * Rational(2));
}

TEST(Multistep, SingularStepMatrixIsRejected) {
  // -M/4 + dt A/6 vanishes for A = 3/(2 dt) M.
  const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_THROW(multistep_reduction(M, 3.0 * M, 0.5), SingularMatrix);
  EXPECT_THROW(multistep_reduction(M, M, 0.0), InvalidArgument);
}
