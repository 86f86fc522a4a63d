#pragma once

// Space-time Galerkin assembly of the two-field Biot system with upwind test
// functions: momentum rows are tested with d/dt v, mass rows with q + h d/dt q.

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "igst/spaces.hpp"

namespace igst {

struct MaterialParams {
  double c0 = 1.0;
  double lambda = 1.0;
  double mu = 1.0;
  double k = 1.0;  ///< permeability over viscosity, K = k I
  double b = 1.0;
  /// Optional spatial variation, returning (lambda, mu, k) at x.
  std::function<Eigen::Vector3d(const Vec& x)> field;

  void validate() const;
  Eigen::Vector3d at(const Vec& x) const;
};

using ScalarFunction = std::function<double(const Vec& x, double t)>;

/// Loads. Empty callables are treated as zero. Traction t_n = sigma~ n acts on
/// regions tagged Traction, the flux v_f = K grad p . n on regions tagged Flux.
struct ProblemData {
  SpaceTimeFunction f;
  SpaceTimeFunction df;
  ScalarFunction g;
  SpaceTimeFunction traction;
  SpaceTimeFunction dtraction;
  ScalarFunction flux;
  std::vector<BoundaryRegion> natural;
};

enum AssemblyTerm : unsigned {
  kElastic = 1u << 0,     ///< e(u + h u_t, v_t)
  kPressureU = 1u << 1,   ///< -b <p + h p_t, div v_t>
  kDivergenceP = 1u << 2, ///< b <div u_t, q + h q_t>
  kStorage = 1u << 3,     ///< c0 <p_t, q + h q_t>
  kDiffusion = 1u << 4,   ///< <K grad p, grad(q + h q_t)>
  kLoadU = 1u << 5,
  kLoadP = 1u << 6,
  kAllTerms = (1u << 7) - 1,
};

struct AssemblyOptions {
  /// Upwind weight h = upwind_scale * h_T.
  double upwind_scale = 1.0;
  unsigned terms = kAllTerms;
  /// Gauss points per direction; 0 selects max degree + 1.
  int quadrature_points = 0;
  /// Worker threads; 0 reads IGST_THREADS (default 1).
  int threads = 0;
  /// Evaluate elements in descending order (accumulation order is unaffected).
  bool reverse_order = false;
};

/// Matrix over the free dofs: displacement block first, then pressure.
struct SparseSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  int n_u = 0;
  int n_p = 0;
  /// Temporal basis index of each unknown.
  std::vector<int> time_block;
  int size() const { return n_u + n_p; }
};

SparseSystem assemble(const MaterialParams& params, const ProblemData& data,
                      const DiscreteSpace& space_u, const DiscreteSpace& space_p, double h_T,
                      const AssemblyOptions& options = {});

/// Temporal basis index of every free dof, displacement block first.
std::vector<int> time_blocks(const DiscreteSpace& space_u, const DiscreteSpace& space_p);

/// Gram matrix of the h-norm on the free dofs of (space_u, space_p).
Eigen::SparseMatrix<double> coercivity_gram(const DiscreteSpace& space_u,
                                            const DiscreteSpace& space_p, double c0, double h_T,
                                            int quadrature_points = 0);

/// min over n_samples random vectors x of x^T S x / x^T N x.
double check_coercivity(const Eigen::SparseMatrix<double>& S, const Eigen::SparseMatrix<double>& N,
                        int n_samples, std::uint64_t seed = 1);

/// Smallest generalized eigenvalue of (sym(S), N); dense, for small systems.
double coercivity_constant(const Eigen::SparseMatrix<double>& S, const Eigen::SparseMatrix<double>& N);

/// Plain-text "rows cols nnz" header followed by "i j value" lines (0-based).
void write_triplets(std::ostream& os, const Eigen::SparseMatrix<double>& A);

/// Number of worker threads requested through IGST_THREADS.
int default_threads();

}  // namespace igst
