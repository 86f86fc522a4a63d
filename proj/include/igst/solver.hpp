#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <string>
#include <vector>

#include "igst/assembly.hpp"

namespace igst {

enum class SolverKind { Direct, Iterative };

SolverKind solver_kind_from_string(const std::string& name);

struct SolverOptions {
  SolverKind kind = SolverKind::Direct;
  /// Relative residual target of the iterative solver.
  double tol = 1e-12;
  int max_iter = 5000;
  int restart = 100;
};

struct SolveReport {
  double residual_norm = 0;      ///< ||S x - R||_2, recomputed after the solve
  double relative_residual = 0;  ///< residual_norm / ||R||_2 (or the norm itself if R = 0)
  long factor_nnz = 0;           ///< nnz(L) + nnz(U), summed over blocks when iterative
  double fill_ratio = 0;         ///< factor_nnz / nnz(S)
  int iterations = 0;
  double seconds = 0;
  std::string method;
};

struct SolveResult {
  Eigen::VectorXd x;
  SolveReport report;
};

/// Direct: sparse LU with COLAMD ordering. Iterative: restarted GMRES
/// preconditioned by the block lower triangle of A, where `blocks` assigns
/// each unknown to a block (e.g. SparseSystem::time_block; one block if empty)
/// and the diagonal blocks are factorized exactly.
SolveResult solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& rhs,
                  const SolverOptions& options = {}, const std::vector<int>& blocks = {});
SolveResult solve(const SparseSystem& system, const SolverOptions& options = {});

}  // namespace igst
