#pragma once

// Quadrature of the h-norm, the h-star norm and plain L2 norms for discrete
// fields, exact fields and their differences, through one evaluation adapter.

#include <Eigen/Core>

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "igst/spaces.hpp"

namespace igst {

struct EvalPoint {
  long element = 0;
  Vec zeta;  ///< parametric space-time point
  Vec x;     ///< physical spatial point
  double t = 0;
};

/// A field on Q together with the derivatives it can provide.
struct Field {
  int components = 1;
  std::function<FieldSample(const EvalPoint&)> eval;
  bool has_grad = true;
  bool has_dt = true;
  bool has_grad_dt = true;
};

struct FieldPair {
  Field u;
  Field p;
};

/// Field with all derivatives given as a function of (x, t).
Field physical_field(int components, std::function<FieldSample(const Vec& x, double t)> f,
                     bool has_grad = true, bool has_dt = true, bool has_grad_dt = true);
Field zero_field(int components, int d);
Field discrete_field(std::shared_ptr<const DiscreteSpace> space, Eigen::VectorXd full_coeffs);
/// alpha * a + beta * b; derivatives available only where both provide them.
Field combine(double alpha, const Field& a, double beta, const Field& b);
FieldPair combine(double alpha, const FieldPair& a, double beta, const FieldPair& b);

/// Discrete solution (U^h, P^h) with full-length coefficient vectors.
struct SolutionField {
  std::shared_ptr<const DiscreteSpace> space_u;
  std::shared_ptr<const DiscreteSpace> space_p;
  Eigen::VectorXd U;
  Eigen::VectorXd P;

  FieldSample displacement(const Vec& x, double t) const;
  FieldSample pressure(const Vec& x, double t) const;
  FieldPair pair() const;
};

/// Splits a free-dof solution vector (displacement block first).
SolutionField make_solution(std::shared_ptr<const DiscreteSpace> space_u,
                            std::shared_ptr<const DiscreteSpace> space_p, const Eigen::VectorXd& x);

/// Squared, unweighted ingredients of the h-norm.
struct HNormTerms {
  double dt_u_H1 = 0;     ///< ||d_t u||^2 in L2 plus spatial gradient, over Q
  double u_final_H1 = 0;  ///< ||u(T)||^2_{H1(Omega)}
  double dt_p_L2 = 0;     ///< ||d_t p||^2 over Q
  double p_final_L2 = 0;  ///< ||p(T)||^2_{L2(Omega)}
  double grad_p_L2 = 0;   ///< ||grad p||^2 over Q

  double combine(double c0, double h_T) const;
};

/// Squared, unweighted ingredients of the h-star norm.
struct HStarTerms {
  double dt_u_H1 = 0;
  double u_H1 = 0;
  double p_L2 = 0;
  double dt_p_L2 = 0;
  double grad_p_L2 = 0;

  double combine(double h_T) const;
};

/// points = Gauss nodes per direction per element (0 selects 5).
HNormTerms h_norm_terms(const FieldPair& pair, const Mesh& mesh, int points = 0);
HStarTerms h_star_terms(const FieldPair& pair, const Mesh& mesh, int points = 0);
double h_norm(const FieldPair& pair, double c0, double h_T, const Mesh& mesh, int points = 0);
double h_star_norm(const FieldPair& pair, double h_T, const Mesh& mesh, int points = 0);
/// ||v||_{L2(Q)} summed over components.
double l2_norm(const Field& field, const Mesh& mesh, int points = 0);

struct ErrorNormOptions {
  double c0 = 1.0;
  double h_T = 0.0;
  int points = 0;
};

/// Norms of discrete - exact. Selectors: "h", "h_star", "L2_u", "L2_p".
std::map<std::string, double> error_norms(const SolutionField& discrete, const FieldPair& exact,
                                          const std::vector<std::string>& which,
                                          const ErrorNormOptions& options);

}  // namespace igst
