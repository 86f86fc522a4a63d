#include "igst/analytic.hpp"

#include <Eigen/LU>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

namespace igst {

namespace {

constexpr double pi = std::numbers::pi;

struct TimeFactors {
  double a, da, e, de, c, dc, dda, dde, ddc;
};

TimeFactors time_factors(double t) {
  return {std::sin(pi * t),      pi * std::cos(pi * t),           std::exp(t) - 1, std::exp(t),
          std::sin(0.5 * pi * t), 0.5 * pi * std::cos(0.5 * pi * t), -pi * pi * std::sin(pi * t),
          std::exp(t),            -0.25 * pi * pi * std::sin(0.5 * pi * t)};
}

// Body force for time factors (a, e, c) of u1, u2, p.
Eigen::VectorXd force(const MaterialParams& m, const Vec& x, double a, double e, double c) {
  const double sx = std::sin(pi * x(0)), cx = std::cos(pi * x(0));
  const double sy = std::sin(pi * x(1)), cy = std::cos(pi * x(1));
  const double S = sx * sy, C = cx * cy, pi2 = pi * pi;
  Eigen::VectorXd f(2);
  f(0) = 2 * m.mu * pi2 * S * a - (m.lambda + m.mu) * (-pi2 * S * a + pi2 * C * e) + m.b * pi * cx * sy * c;
  f(1) = 2 * m.mu * pi2 * S * e - (m.lambda + m.mu) * (pi2 * C * a - pi2 * S * e) + m.b * pi * sx * cy * c;
  return f;
}

FieldSample sine_field(const Vec& x, const std::vector<double>& v, const std::vector<double>& dv) {
  const double sx = std::sin(pi * x(0)), cx = std::cos(pi * x(0));
  const double sy = std::sin(pi * x(1)), cy = std::cos(pi * x(1));
  const double S = sx * sy;
  const Eigen::Vector2d gS(pi * cx * sy, pi * sx * cy);
  const auto n = static_cast<Eigen::Index>(v.size());
  FieldSample s{Eigen::VectorXd(n), Eigen::MatrixXd(n, 2), Eigen::VectorXd(n), Eigen::MatrixXd(n, 2)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto j = static_cast<std::size_t>(i);
    s.value(i) = S * v[j];
    s.dt(i) = S * dv[j];
    s.grad.row(i) = v[j] * gS.transpose();
    s.grad_dt.row(i) = dv[j] * gS.transpose();
  }
  return s;
}

// Green's function sum_q 2 sin(q pi y0) sin(q pi y) / ((q pi)^2 + k^2) and
// its companion sum_q 2 sin sin / ((q pi)^2 + k^2)^2 = -g'(k) / (2k).
struct Green {
  double g = 0;
  double h = 0;
};

Green green(double kappa, double y, double y0) {
  const double a = std::min(y, y0), b = 1.0 - std::max(y, y0), d = std::abs(y - y0);
  if (a <= 0.0 || b <= 0.0) return {};
  const double ea = -std::expm1(-2 * kappa * a), eb = -std::expm1(-2 * kappa * b);
  const double e1 = -std::expm1(-2 * kappa);
  Green out;
  out.g = std::exp(-kappa * d) * ea * eb / (2 * kappa * e1);
  const double dlng = -d + 2 * a * std::exp(-2 * kappa * a) / ea + 2 * b * std::exp(-2 * kappa * b) / eb -
                      1.0 / kappa - 2 * std::exp(-2 * kappa) / e1;
  out.h = -out.g * dlng / (2 * kappa);
  return out;
}

// Sums f(n) for n >= 1 until the envelope exp(-n pi dist) / n is negligible.
template <typename F>
double lead_sum(double dist, F&& f) {
  const long cap = 400000;
  const long nmax = dist > 0 ? std::min(cap, static_cast<long>(40.0 / (pi * dist)) + 50) : cap;
  double s = 0;
  for (long n = 1; n <= nmax; ++n) s += f(static_cast<double>(n));
  return s;
}

template <typename Scalar>
using Poly = std::vector<Scalar>;

template <typename Scalar>
Poly<Scalar> mul(const Poly<Scalar>& a, const Poly<Scalar>& b) {
  Poly<Scalar> c(a.size() + b.size() - 1, Scalar(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

template <typename Scalar>
Scalar integrate01(const Poly<Scalar>& p) {
  Scalar s(0);
  for (std::size_t i = 0; i < p.size(); ++i) s += p[i] / Scalar(static_cast<std::int64_t>(i + 1));
  return s;
}

}  // namespace

FieldSample ManufacturedCase::displacement(const Vec& x, double t) const {
  const TimeFactors f = time_factors(t);
  return sine_field(x, {f.a, f.e}, {f.da, f.de});
}

FieldSample ManufacturedCase::pressure(const Vec& x, double t) const {
  const TimeFactors f = time_factors(t);
  return sine_field(x, {f.c}, {f.dc});
}

Eigen::VectorXd ManufacturedCase::f(const Vec& x, double t) const {
  const TimeFactors s = time_factors(t);
  return force(params, x, s.a, s.e, s.c);
}

Eigen::VectorXd ManufacturedCase::df(const Vec& x, double t) const {
  const TimeFactors s = time_factors(t);
  return force(params, x, s.da, s.de, s.dc);
}

double ManufacturedCase::g(const Vec& x, double t) const {
  const TimeFactors s = time_factors(t);
  const double sx = std::sin(pi * x(0)), cx = std::cos(pi * x(0));
  const double sy = std::sin(pi * x(1)), cy = std::cos(pi * x(1));
  const double S = sx * sy;
  return params.c0 * S * s.dc + params.b * (pi * cx * sy * s.da + pi * sx * cy * s.de) +
         2 * params.k * pi * pi * S * s.c;
}

ProblemData ManufacturedCase::data() const {
  ProblemData d;
  const ManufacturedCase self = *this;
  d.f = [self](const Vec& x, double t) { return self.f(x, t); };
  d.df = [self](const Vec& x, double t) { return self.df(x, t); };
  d.g = [self](const Vec& x, double t) { return self.g(x, t); };
  return d;
}

ManufacturedCase manufactured_data(const MaterialParams& params) {
  params.validate();
  if (params.field) throw InvalidArgument("manufactured data needs constant coefficients");
  return ManufacturedCase{params};
}

double TerzaghiCase::load_factor() const {
  const double M = params.lambda + 2 * params.mu;
  return F * params.b / (params.c0 * M + params.b * params.b);
}

double TerzaghiCase::consolidation() const {
  const double M = params.lambda + 2 * params.mu;
  return params.k * M / (params.c0 * M + params.b * params.b);
}

double TerzaghiCase::pressure(double x, double t) const {
  if (!(t > 0)) throw InvalidArgument("consolidation series needs t > 0");
  if (x < -1e-12 || x > L * (1 + 1e-12)) throw InvalidArgument("point outside the column");
  const double cv = consolidation();
  double s = 0;
  for (int m = 0; m < terms; ++m) {
    const double j = 2 * m + 1;
    s += std::sin(j * pi * x / (2 * L)) * std::exp(-j * j * pi * pi * cv * t / (4 * L * L)) / j;
  }
  return load_factor() * 4 / pi * s;
}

double TerzaghiCase::pressure_dx(double x, double t) const {
  if (!(t > 0)) throw InvalidArgument("consolidation series needs t > 0");
  const double cv = consolidation();
  double s = 0;
  for (int m = 0; m < terms; ++m) {
    const double j = 2 * m + 1;
    s += std::cos(j * pi * x / (2 * L)) * (pi / (2 * L)) *
         std::exp(-j * j * pi * pi * cv * t / (4 * L * L));
  }
  return load_factor() * 4 / pi * s;
}

BarryMercerCase::BarryMercerCase() : x0(Vec::Constant(2, 0.25)) {
  params.c0 = 0.0;
  params.lambda = 1e4 / 0.88;
  params.mu = 1e5 / 2.2;
  params.k = 0.01;
  params.b = 1.0;
}

double BarryMercerCase::beta() const { return (params.lambda + 2 * params.mu) * params.k; }

BarryMercerValue barry_mercer_series(double x, double y, double t, const BarryMercerCase& c,
                                     int terms) {
  if (terms < 1) throw InvalidArgument("series needs at least one term");
  const double M = c.params.lambda + 2 * c.params.mu, bt = c.beta() * t;
  const double sb = std::sin(bt), cb = std::cos(bt);
  BarryMercerValue v;
  for (int n = 1; n <= terms; ++n)
    for (int q = 1; q <= terms; ++q) {
      const double lam = pi * pi * (n * n + q * q);
      const double F = (lam * sb - cb + std::exp(-lam * bt)) / (lam * lam + 1);
      const double s = std::sin(n * pi * c.x0(0)) * std::sin(q * pi * c.x0(1));
      v.p += 8 * M * s * F * std::sin(n * pi * x) * std::sin(q * pi * y);
      v.u1 -= 8 * n * pi * s * F / lam * std::cos(n * pi * x) * std::sin(q * pi * y);
      v.u2 -= 8 * q * pi * s * F / lam * std::sin(n * pi * x) * std::cos(q * pi * y);
    }
  return v;
}

BarryMercerValue barry_mercer_reference(double x, double y, double t, const BarryMercerCase& c,
                                        int terms) {
  if (terms < 1) throw InvalidArgument("series needs at least one term");
  const double M = c.params.lambda + 2 * c.params.mu, bt = c.beta() * t;
  const double sb = std::sin(bt), cb = std::cos(bt);
  const double x0 = c.x0(0), y0 = c.x0(1);
  BarryMercerValue v;

  // Parts decaying like 1/lambda and 1/lambda^2, summed over q (resp. n) in closed form.
  v.p = 4 * M * lead_sum(std::abs(y - y0), [&](double n) {
          const Green gr = green(n * pi, y, y0);
          return std::sin(n * pi * x0) * std::sin(n * pi * x) * (sb * gr.g - cb * gr.h);
        });
  v.u1 = -4 * sb * lead_sum(std::abs(y - y0), [&](double n) {
           return n * pi * std::sin(n * pi * x0) * std::cos(n * pi * x) * green(n * pi, y, y0).h;
         });
  v.u2 = -4 * sb * lead_sum(std::abs(x - x0), [&](double q) {
           return q * pi * std::sin(q * pi * y0) * std::cos(q * pi * y) * green(q * pi, x, x0).h;
         });

  for (int n = 1; n <= terms; ++n)
    for (int q = 1; q <= terms; ++q) {
      const double lam = pi * pi * (n * n + q * q);
      const double ex = std::exp(-lam * bt);
      const double den = lam * lam * (lam * lam + 1);
      const double rp = (-lam * sb + cb + lam * lam * ex) / den;
      const double ru = (-lam * cb + lam * ex - sb) / den;
      const double s = std::sin(n * pi * x0) * std::sin(q * pi * y0);
      v.p += 8 * M * s * rp * std::sin(n * pi * x) * std::sin(q * pi * y);
      v.u1 -= 8 * n * pi * s * ru * std::cos(n * pi * x) * std::sin(q * pi * y);
      v.u2 -= 8 * q * pi * s * ru * std::sin(n * pi * x) * std::cos(q * pi * y);
    }
  return v;
}

bool DiracApprox::contains(const Vec& x) const {
  for (Eigen::Index k = 0; k < center.size(); ++k)
    if (std::abs(x(k) - center(k)) > 0.5 * h) return false;
  return true;
}

DiracApprox dirac_approx(double h, const Vec& x0) {
  if (!(h > 0 && h <= 1)) throw InvalidArgument("cell width must lie in (0,1]");
  for (Eigen::Index k = 0; k < x0.size(); ++k) {
    const double cells = x0(k) / h - 0.5;
    if (std::abs(cells - std::round(cells)) > 1e-9 || x0(k) <= 0 || x0(k) >= 1) {
      std::ostringstream os;
      os << "source point is not the centre of a cell of width " << h;
      throw InvalidArgument(os.str());
    }
  }
  return {x0, h, std::pow(h, -static_cast<double>(x0.size()))};
}

template <typename Scalar>
MultistepCoefficients<Scalar> derive_multistep_coefficients() {
  const Scalar one(1), zero(0);
  // Reference coordinate s in [0,1] on the elements left and right of node k.
  // Hats phi_{k-1}, phi_k, phi_{k+1}; derivatives are per unit step.
  const std::array<Poly<Scalar>, 3> left_val{Poly<Scalar>{one, -one}, Poly<Scalar>{zero, one},
                                             Poly<Scalar>{zero}};
  const std::array<Poly<Scalar>, 3> left_der{Poly<Scalar>{-one}, Poly<Scalar>{one}, Poly<Scalar>{zero}};
  const std::array<Poly<Scalar>, 3> right_val{Poly<Scalar>{zero}, Poly<Scalar>{one, -one},
                                              Poly<Scalar>{zero, one}};
  const std::array<Poly<Scalar>, 3> right_der{Poly<Scalar>{zero}, Poly<Scalar>{-one}, Poly<Scalar>{one}};
  // Test function phi_k + dt phi_k'.
  const Poly<Scalar> test_left{one, one};         // 1 + s
  const Poly<Scalar> test_right{zero, -one};      // (1 - s) - 1

  MultistepCoefficients<Scalar> c;
  for (std::size_t j = 0; j < 3; ++j) {
    c.alpha[j] = integrate01(mul(left_der[j], test_left)) + integrate01(mul(right_der[j], test_right));
    c.beta[j] = integrate01(mul(left_val[j], test_left)) + integrate01(mul(right_val[j], test_right));
  }
  const Scalar scale = c.alpha[1];
  for (std::size_t j = 0; j < 3; ++j) {
    c.alpha[j] = c.alpha[j] / scale;
    c.beta[j] = c.beta[j] / scale;
  }
  return c;
}

template MultistepCoefficients<Rational> derive_multistep_coefficients<Rational>();
template MultistepCoefficients<double> derive_multistep_coefficients<double>();

MultistepReduction multistep_reduction(const Eigen::MatrixXd& M, const Eigen::MatrixXd& A, double dt) {
  if (M.rows() != M.cols() || A.rows() != M.rows() || A.cols() != M.cols())
    throw InvalidArgument("M and A must be square of equal size");
  if (!(dt > 0)) throw InvalidArgument("time step must be positive");
  MultistepReduction r;
  r.exact = derive_multistep_coefficients<Rational>();
  r.step_matrix = static_cast<double>(r.exact.alpha[2]) * M - dt * static_cast<double>(r.exact.beta[2]) * A;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(r.step_matrix);
  if (!lu.isInvertible()) throw SingularMatrix(-1, "step matrix of the two-step recursion is singular");
  return r;
}

Eigen::VectorXd MultistepReduction::advance(const Eigen::MatrixXd& M, const Eigen::MatrixXd& A,
                                            double dt, const Eigen::VectorXd& w_prev,
                                            const Eigen::VectorXd& w_curr) const {
  auto op = [&](std::size_t j) {
    return Eigen::MatrixXd(static_cast<double>(exact.alpha[j]) * M - dt * static_cast<double>(exact.beta[j]) * A);
  };
  const Eigen::VectorXd rhs = -(op(0) * w_prev + op(1) * w_curr);
  return step_matrix.fullPivLu().solve(rhs);
}

double multistep_truncation_error(double t, double dt) {
  const auto c = derive_multistep_coefficients<Rational>();
  double tau = 0;
  for (std::size_t j = 0; j < 3; ++j) {
    const double w = std::exp(-(t + (static_cast<double>(j) - 1.0) * dt));
    tau += static_cast<double>(c.alpha[j]) * w + dt * static_cast<double>(c.beta[j]) * w;
  }
  return tau / dt;
}

}  // namespace igst
