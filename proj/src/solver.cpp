#include "igst/solver.hpp"

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>
#include <sstream>

namespace igst {

SolverKind solver_kind_from_string(const std::string& name) {
  if (name == "direct") return SolverKind::Direct;
  if (name == "iterative") return SolverKind::Iterative;
  throw ConfigError("unknown solver '" + name + "' (expected direct or iterative)");
}

namespace {

long zero_pivot_column(const std::string& message, const Eigen::VectorXi& perm) {
  const std::string key = "ZERO COLUMN AT ";
  const auto pos = message.find(key);
  if (pos == std::string::npos) return -1;
  const long permuted = std::stol(message.substr(pos + key.size())) - 1;
  for (Eigen::Index i = 0; i < perm.size(); ++i)
    if (perm(i) == permuted) return static_cast<long>(i);
  return permuted;
}

}  // namespace

namespace {

using ColMatrix = Eigen::SparseMatrix<double>;
using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using LU = Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>>;

[[noreturn]] void throw_zero_pivot(const LU& lu, const std::vector<int>& to_original) {
  const std::string msg = lu.lastErrorMessage();
  long dof = zero_pivot_column(msg, lu.colsPermutation().indices());
  if (dof >= 0 && !to_original.empty()) dof = to_original[static_cast<std::size_t>(dof)];
  std::ostringstream os;
  os << "sparse LU failed";
  if (dof >= 0) os << ": zero pivot at unknown " << dof;
  else os << ": " << msg;
  throw SingularMatrix(dof, os.str());
}

// Block lower-triangular (forward block Gauss-Seidel) preconditioner over
// groups of unknowns, with sparse LU factors of the diagonal blocks.
class BlockLowerPreconditioner {
 public:
  using Scalar = double;
  using StorageIndex = int;

  void set_blocks(const std::vector<int>* blocks) { blocks_ = blocks; }

  template <typename M>
  BlockLowerPreconditioner& analyzePattern(const M&) { return *this; }

  template <typename M>
  BlockLowerPreconditioner& factorize(const M& A) {
    const auto n = static_cast<std::size_t>(A.rows());
    order_.resize(n);
    for (std::size_t i = 0; i < n; ++i) order_[i] = static_cast<int>(i);
    if (blocks_ && !blocks_->empty()) {
      if (blocks_->size() != n) throw InvalidArgument("block ids do not match the matrix");
      std::stable_sort(order_.begin(), order_.end(),
                       [&](int x, int y) { return (*blocks_)[static_cast<std::size_t>(x)] <
                                                  (*blocks_)[static_cast<std::size_t>(y)]; });
    }
    offsets_ = {0};
    for (std::size_t i = 1; i <= n; ++i)
      if (i == n || (blocks_ && !blocks_->empty() &&
                     (*blocks_)[static_cast<std::size_t>(order_[i])] !=
                         (*blocks_)[static_cast<std::size_t>(order_[i - 1])]))
        offsets_.push_back(static_cast<int>(i));
    Eigen::VectorXi ord = Eigen::Map<const Eigen::VectorXi>(order_.data(), A.rows());
    perm_ = Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int>(ord).inverse();
    const RowMatrix Ap = perm_ * ColMatrix(A) * perm_.transpose();
    const std::size_t nb = offsets_.size() - 1;
    lower_.assign(nb, RowMatrix());
    lu_.clear();
    lu_.reserve(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      const int off = offsets_[b], len = offsets_[b + 1] - off;
      const RowMatrix rows = Ap.middleRows(off, len);
      const ColMatrix diag = rows.middleCols(off, len);
      if (off > 0) lower_[b] = rows.leftCols(off);
      lu_.push_back(std::make_unique<LU>());
      LU& lu = *lu_.back();
      lu.analyzePattern(diag);
      lu.factorize(diag);
      if (lu.info() != Eigen::Success) {
        std::vector<int> map(order_.begin() + off, order_.begin() + off + len);
        throw_zero_pivot(lu, map);
      }
      factor_nnz_ += static_cast<long>(lu.nnzL() + lu.nnzU());
    }
    return *this;
  }

  template <typename M>
  BlockLowerPreconditioner& compute(const M& A) { return factorize(A); }

  template <typename Rhs>
  Eigen::VectorXd solve(const Rhs& r) const {
    const Eigen::VectorXd rp = perm_ * Eigen::VectorXd(r);
    Eigen::VectorXd y(rp.size());
    for (std::size_t b = 0; b + 1 < offsets_.size(); ++b) {
      const int off = offsets_[b], len = offsets_[b + 1] - off;
      Eigen::VectorXd rhs = rp.segment(off, len);
      if (off > 0) rhs -= lower_[b] * y.head(off);
      y.segment(off, len) = lu_[b]->solve(rhs);
    }
    return perm_.transpose() * y;
  }

  Eigen::ComputationInfo info() const { return Eigen::Success; }
  long factor_nnz() const { return factor_nnz_; }
  int block_count() const { return static_cast<int>(offsets_.size()) - 1; }

 private:
  const std::vector<int>* blocks_ = nullptr;
  std::vector<int> order_;
  std::vector<int> offsets_;
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> perm_;
  std::vector<RowMatrix> lower_;
  std::vector<std::unique_ptr<LU>> lu_;
  long factor_nnz_ = 0;
};

// Restarted GMRES with right preconditioning, so the Arnoldi residual is the
// true residual b - A x. Returns the number of inner iterations.
int gmres_right(const ColMatrix& A, const BlockLowerPreconditioner& M, const Eigen::VectorXd& b,
                Eigen::VectorXd& x, double tol, int restart, int max_iter, bool& converged) {
  const Eigen::Index n = b.size();
  const double target = tol * b.norm();
  restart = std::max(1, std::min<int>(restart, static_cast<int>(n)));
  Eigen::MatrixXd V(n, restart + 1);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(restart + 1, restart);
  Eigen::VectorXd cs(restart), sn(restart), g(restart + 1);
  int total = 0;
  converged = false;
  double previous = std::numeric_limits<double>::infinity();
  while (total < max_iter) {
    Eigen::VectorXd r = b - A * x;
    const double beta = r.norm();
    if (!(beta > target)) {
      converged = true;
      break;
    }
    // A restart cycle that gains less than a factor 2 near the rounding
    // level of A x means the target is below what double precision resolves.
    if (beta > 0.5 * previous) {
      const double floor =
          64 * std::numeric_limits<double>::epsilon() * (A.cwiseAbs() * x.cwiseAbs()).norm();
      converged = beta <= floor;
      break;
    }
    previous = beta;
    V.col(0) = r / beta;
    g.setZero();
    g(0) = beta;
    H.setZero();
    int j = 0;
    for (; j < restart && total < max_iter; ++j, ++total) {
      Eigen::VectorXd w = A * M.solve(V.col(j));
      for (int i = 0; i <= j; ++i) {
        H(i, j) = V.col(i).dot(w);
        w -= H(i, j) * V.col(i);
      }
      H(j + 1, j) = w.norm();
      if (H(j + 1, j) > 0) V.col(j + 1) = w / H(j + 1, j);
      for (int i = 0; i < j; ++i) {
        const double t = cs(i) * H(i, j) + sn(i) * H(i + 1, j);
        H(i + 1, j) = -sn(i) * H(i, j) + cs(i) * H(i + 1, j);
        H(i, j) = t;
      }
      const double den = std::hypot(H(j, j), H(j + 1, j));
      cs(j) = den > 0 ? H(j, j) / den : 1.0;
      sn(j) = den > 0 ? H(j + 1, j) / den : 0.0;
      H(j, j) = den;
      H(j + 1, j) = 0;
      g(j + 1) = -sn(j) * g(j);
      g(j) = cs(j) * g(j);
      if (std::abs(g(j + 1)) <= target || den == 0) {
        ++j;
        ++total;
        break;
      }
    }
    const Eigen::VectorXd y =
        H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    x += M.solve(V.leftCols(j) * y);
  }
  if (!converged && !((b - A * x).norm() > target)) converged = true;
  return total;
}

}  // namespace

SolveResult solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& rhs,
                  const SolverOptions& options, const std::vector<int>& blocks) {
  if (A.rows() != A.cols()) throw InvalidArgument("system matrix must be square");
  if (A.rows() < 1) throw InvalidArgument("empty linear system");
  if (rhs.size() != A.rows()) throw InvalidArgument("right-hand side length does not match the matrix");
  if (!blocks.empty() && static_cast<Eigen::Index>(blocks.size()) != A.rows())
    throw InvalidArgument("block ids do not match the matrix");
  const auto start = std::chrono::steady_clock::now();
  SolveResult out;

  if (options.kind == SolverKind::Direct) {
    LU lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success) throw_zero_pivot(lu, {});
    out.x = lu.solve(rhs);
    out.report.factor_nnz = static_cast<long>(lu.nnzL() + lu.nnzU());
    out.report.method = "sparse LU (COLAMD)";
  } else {
    BlockLowerPreconditioner M;
    M.set_blocks(&blocks);
    M.compute(A);
    out.x = Eigen::VectorXd::Zero(rhs.size());
    bool converged = false;
    out.report.iterations =
        gmres_right(A, M, rhs, out.x, options.tol, options.restart, options.max_iter, converged);
    if (!converged) {
      std::ostringstream os;
      os << "GMRES did not reach the residual target in " << options.max_iter << " iterations";
      throw SolverError(os.str());
    }
    out.report.factor_nnz = M.factor_nnz();
    std::ostringstream os;
    os << "GMRES + block lower-triangular LU (" << M.block_count() << " blocks)";
    out.report.method = os.str();
  }
  if (!out.x.allFinite()) throw SingularMatrix(-1, "solution contains non-finite values");
  out.report.fill_ratio = static_cast<double>(out.report.factor_nnz) / static_cast<double>(A.nonZeros());

  out.report.residual_norm = (A * out.x - rhs).norm();
  const double bn = rhs.norm();
  out.report.relative_residual = bn > 0 ? out.report.residual_norm / bn : out.report.residual_norm;
  out.report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

SolveResult solve(const SparseSystem& system, const SolverOptions& options) {
  if (system.matrix.rows() != system.size())
    throw InvalidArgument("system dimension does not match its block sizes");
  return solve(system.matrix, system.rhs, options, system.time_block);
}

}  // namespace igst
