#pragma once

// Reference solutions and derived data for the benchmark problems, and the
// two-step recursion obtained from linear-in-time upwind testing.

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <numeric>
#include <ostream>

#include "igst/assembly.hpp"

namespace igst {

/// Smooth solution on the unit square, T = 1:
/// u = S (sin(pi t), e^t - 1), p = S sin(pi t / 2), S = sin(pi x) sin(pi y).
struct ManufacturedCase {
  MaterialParams params;

  FieldSample displacement(const Vec& x, double t) const;
  FieldSample pressure(const Vec& x, double t) const;
  /// Body force f = -div sigma~ and its time derivative.
  Eigen::VectorXd f(const Vec& x, double t) const;
  Eigen::VectorXd df(const Vec& x, double t) const;
  /// Source g = d_t(c0 p + b div u) - div(K grad p).
  double g(const Vec& x, double t) const;

  ProblemData data() const;
};

ManufacturedCase manufactured_data(const MaterialParams& params);

/// One-dimensional consolidation of a column (0, L): drained, loaded end at
/// x = 0 (traction t_n = F), fixed impermeable end at x = L.
struct TerzaghiCase {
  MaterialParams params;
  double L = 1.0;
  double F = 1.0;
  int terms = 200;  ///< number of odd Fourier modes

  double load_factor() const;       ///< p0 = F b / (c0 M + b^2), M = lambda + 2 mu
  double consolidation() const;     ///< c_v = k M / (c0 M + b^2)
  double pressure(double x, double t) const;
  double pressure_dx(double x, double t) const;
};

/// Plane strain column with a point source 2 beta delta(x - x0) sin(beta t),
/// p = 0 on the boundary, u1 = 0 on y = 0, 1 and u2 = 0 on x = 0, 1.
struct BarryMercerCase {
  MaterialParams params;
  Vec x0;
  int terms = 200;

  BarryMercerCase();
  double beta() const;  ///< (lambda + 2 mu) k
};

struct BarryMercerValue {
  double p = 0;
  double u1 = 0;
  double u2 = 0;
};

/// Series solution with the slowly converging part summed in closed form
/// along one direction; the remaining double series uses `terms` modes per index.
BarryMercerValue barry_mercer_reference(double x, double y, double t, const BarryMercerCase& c,
                                        int terms);
/// The plain truncated double sine series, N modes per index.
BarryMercerValue barry_mercer_series(double x, double y, double t, const BarryMercerCase& c,
                                     int terms);

/// Density h^-2 on the mesh cell of width h centred at x0.
struct DiracApprox {
  Vec center;
  double h = 0;
  double density = 0;

  bool contains(const Vec& x) const;
  double operator()(const Vec& x) const { return contains(x) ? density : 0.0; }
};

/// Requires x0 to be the centre of a cell of the uniform grid of width h on [0,1]^d.
DiracApprox dirac_approx(double h, const Vec& x0);

/// Exact fractions with 64-bit numerator and denominator.
class Rational {
 public:
  constexpr Rational(std::int64_t num = 0, std::int64_t den = 1) : num_(num), den_(den) { normalize(); }
  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  explicit operator double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend Rational operator+(Rational a, Rational b) {
    return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
  }
  friend Rational operator-(Rational a, Rational b) {
    return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
  }
  friend Rational operator*(Rational a, Rational b) { return {a.num_ * b.num_, a.den_ * b.den_}; }
  friend Rational operator/(Rational a, Rational b) { return {a.num_ * b.den_, a.den_ * b.num_}; }
  Rational operator-() const { return {-num_, den_}; }
  Rational& operator+=(Rational o) { return *this = *this + o; }
  Rational& operator-=(Rational o) { return *this = *this - o; }
  Rational& operator*=(Rational o) { return *this = *this * o; }
  Rational& operator/=(Rational o) { return *this = *this / o; }
  friend bool operator==(Rational a, Rational b) { return a.num_ == b.num_ && a.den_ == b.den_; }
  friend bool operator!=(Rational a, Rational b) { return !(a == b); }
  friend bool operator<(Rational a, Rational b) { return a.num_ * b.den_ < b.num_ * a.den_; }
  friend bool operator>(Rational a, Rational b) { return b < a; }
  friend bool operator<=(Rational a, Rational b) { return !(b < a); }
  friend bool operator>=(Rational a, Rational b) { return !(a < b); }
  friend std::ostream& operator<<(std::ostream& os, Rational r) {
    return r.den_ == 1 ? os << r.num_ : os << r.num_ << '/' << r.den_;
  }

 private:
  constexpr void normalize() {
    if (den_ == 0) throw InvalidArgument("zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }
  std::int64_t num_;
  std::int64_t den_;
};

/// Coefficients of sum_j alpha_j M w_{k+j-1} = dt sum_j beta_j A w_{k+j-1}
/// obtained by testing M w' = A w, w piecewise linear on a uniform grid, with
/// phi_k + dt phi_k'. Exact integration of the hat-function products.
template <typename Scalar>
struct MultistepCoefficients {
  std::array<Scalar, 3> alpha;
  std::array<Scalar, 3> beta;
};

template <typename Scalar>
MultistepCoefficients<Scalar> derive_multistep_coefficients();

struct MultistepReduction {
  MultistepCoefficients<Rational> exact;
  Eigen::MatrixXd step_matrix;  ///< alpha_2 M - dt beta_2 A

  /// w_{k+1} from w_{k-1}, w_k.
  Eigen::VectorXd advance(const Eigen::MatrixXd& M, const Eigen::MatrixXd& A, double dt,
                          const Eigen::VectorXd& w_prev, const Eigen::VectorXd& w_curr) const;
};

MultistepReduction multistep_reduction(const Eigen::MatrixXd& M, const Eigen::MatrixXd& A, double dt);

/// Residual of the recursion for the exact solution e^{-t} of w' = -w at t,
/// divided by dt.
double multistep_truncation_error(double t, double dt);

}  // namespace igst
