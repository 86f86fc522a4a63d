#pragma once

// Univariate and tensor-product B-spline / NURBS bases on the unit interval.
//
// Knot vectors are open ("r-open"): the first and last r+1 knots equal 0 and 1.
// Evaluation follows the Cox-de Boor triangle with the 0/0 := 0 convention.
// A parameter lying on a knot belongs to the span on its right, except that
// zeta = 1 is evaluated as the left limit of the last span.

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "igst/errors.hpp"

namespace igst {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

namespace detail {

template <typename Scalar>
inline Scalar safe_div(Scalar num, Scalar den) {
  return den == Scalar(0) ? Scalar(0) : num / den;
}

}  // namespace detail

template <typename Scalar>
class KnotVector {
 public:
  KnotVector() = default;

  KnotVector(std::vector<Scalar> knots, int degree)
      : knots_(std::move(knots)), degree_(degree) {
    validate();
  }

  /// Open knot vector with the given interior breakpoints (excluding 0 and 1),
  /// each repeated so that the basis is C^continuity across it.
  static KnotVector from_breakpoints(const std::vector<Scalar>& breaks, int degree,
                                     int continuity) {
    if (degree < 0) throw InvalidKnotVector("negative spline degree");
    if (continuity < 0 || continuity > degree - 1) {
      if (!(degree == 0 && continuity == -1)) {
        std::ostringstream os;
        os << "continuity C^" << continuity << " invalid for degree " << degree;
        throw InvalidKnotVector(os.str());
      }
    }
    const int mult = degree - continuity;
    std::vector<Scalar> k(static_cast<std::size_t>(degree + 1), Scalar(0));
    for (std::size_t i = 1; i + 1 < breaks.size(); ++i)
      for (int m = 0; m < mult; ++m) k.push_back(breaks[i]);
    for (int i = 0; i <= degree; ++i) k.push_back(Scalar(1));
    return KnotVector(std::move(k), degree);
  }

  static KnotVector uniform(int spans, int degree, int continuity) {
    if (spans < 1) throw InvalidKnotVector("need at least one knot span");
    std::vector<Scalar> b;
    for (int i = 0; i <= spans; ++i) b.push_back(Scalar(i) / Scalar(spans));
    return from_breakpoints(b, degree, continuity);
  }

  int degree() const { return degree_; }
  /// Number of basis functions n = |knots| - r - 1.
  int size() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
  const std::vector<Scalar>& knots() const { return knots_; }
  Scalar operator[](int i) const { return knots_[static_cast<std::size_t>(i)]; }

  /// Distinct knot values, 0 and 1 included.
  std::vector<Scalar> breakpoints() const {
    std::vector<Scalar> b;
    for (const Scalar& k : knots_)
      if (b.empty() || k != b.back()) b.push_back(k);
    return b;
  }

  int span_count() const { return static_cast<int>(breakpoints().size()) - 1; }

  int multiplicity(Scalar xi) const {
    return static_cast<int>(std::count(knots_.begin(), knots_.end(), xi));
  }

  /// Knot index mu with knots[mu] <= z < knots[mu+1]; z = 1 maps to the last
  /// non-empty span.
  int find_span(Scalar z) const {
    const int n = size();
    if (z < Scalar(0) || z > Scalar(1)) {
      std::ostringstream os;
      os << "parameter " << z << " outside [0,1]";
      throw InvalidArgument(os.str());
    }
    if (z >= knots_[static_cast<std::size_t>(n)]) return n - 1;
    auto first = knots_.begin() + degree_;
    auto last = knots_.begin() + n + 1;
    auto it = std::upper_bound(first, last, z);
    return static_cast<int>(it - knots_.begin()) - 1;
  }

  /// Greville abscissae (knot averages), one per basis function.
  std::vector<Scalar> greville() const {
    std::vector<Scalar> g(static_cast<std::size_t>(size()));
    for (int i = 0; i < size(); ++i) {
      Scalar s(0);
      for (int j = 1; j <= degree_; ++j) s += knots_[static_cast<std::size_t>(i + j)];
      g[static_cast<std::size_t>(i)] = degree_ == 0 ? (knots_[i] + knots_[i + 1]) / Scalar(2)
                                                    : s / Scalar(degree_);
    }
    return g;
  }

  /// Parametric support [knots[i], knots[i+r+1]] of basis function i.
  std::pair<Scalar, Scalar> support(int i) const {
    return {knots_[static_cast<std::size_t>(i)],
            knots_[static_cast<std::size_t>(i + degree_ + 1)]};
  }

 private:
  void validate() const {
    const int r = degree_;
    if (r < 0) throw InvalidKnotVector("negative spline degree");
    if (static_cast<int>(knots_.size()) < 2 * (r + 1))
      throw InvalidKnotVector("knot vector too short for its degree");
    for (std::size_t i = 1; i < knots_.size(); ++i)
      if (knots_[i] < knots_[i - 1]) throw InvalidKnotVector("knot vector is decreasing");
    for (int i = 0; i <= r; ++i) {
      if (knots_[static_cast<std::size_t>(i)] != Scalar(0) ||
          knots_[knots_.size() - 1 - static_cast<std::size_t>(i)] != Scalar(1))
        throw InvalidKnotVector("knot vector is not open on [0,1]");
    }
    if (multiplicity(Scalar(0)) != r + 1 || multiplicity(Scalar(1)) != r + 1)
      throw InvalidKnotVector("end knots must have multiplicity r+1 exactly");
    for (const Scalar& b : breakpoints()) {
      if (b == Scalar(0) || b == Scalar(1)) continue;
      if (multiplicity(b) > std::max(r, 1)) {
        std::ostringstream os;
        os << "interior knot " << b << " has multiplicity " << multiplicity(b)
           << " > " << std::max(r, 1);
        throw InvalidKnotVector(os.str());
      }
    }
  }

  std::vector<Scalar> knots_;
  int degree_ = 0;
};

template <typename Scalar>
struct BasisValues {
  int first = 0;             ///< global index of values(0)
  VectorX<Scalar> values;    ///< the r+1 possibly non-zero basis values
};

template <typename Scalar>
struct BasisDerivatives {
  int first = 0;
  MatrixX<Scalar> ders;      ///< ders(k, j): k-th derivative of basis first+j
};

template <typename Scalar>
BasisValues<Scalar> eval_basis(const KnotVector<Scalar>& kv, Scalar z) {
  const int r = kv.degree();
  const int span = kv.find_span(z);
  VectorX<Scalar> N(r + 1), left(r + 1), right(r + 1);
  N(0) = Scalar(1);
  for (int j = 1; j <= r; ++j) {
    left(j) = z - kv[span + 1 - j];
    right(j) = kv[span + j] - z;
    Scalar saved(0);
    for (int k = 0; k < j; ++k) {
      const Scalar temp = detail::safe_div(N(k), right(k + 1) + left(j - k));
      N(k) = saved + right(k + 1) * temp;
      saved = left(j - k) * temp;
    }
    N(j) = saved;
  }
  return {span - r, std::move(N)};
}

/// As eval_basis_derivs, on a prescribed non-empty span knots[span] < knots[span+1]
/// (z may lie on either end of it, giving the one-sided limits).
template <typename Scalar>
BasisDerivatives<Scalar> eval_basis_derivs_in_span(const KnotVector<Scalar>& kv, int span, Scalar z,
                                                   int order) {
  const int r = kv.degree();
  if (order < 0 || order > r) {
    std::ostringstream os;
    os << "derivative order " << order << " exceeds degree " << r;
    throw InvalidArgument(os.str());
  }
  if (span < r || span >= kv.size() || !(kv[span] < kv[span + 1]))
    throw InvalidArgument("invalid knot span");
  MatrixX<Scalar> ndu(r + 1, r + 1);
  VectorX<Scalar> left(r + 1), right(r + 1);
  ndu(0, 0) = Scalar(1);
  for (int j = 1; j <= r; ++j) {
    left(j) = z - kv[span + 1 - j];
    right(j) = kv[span + j] - z;
    Scalar saved(0);
    for (int k = 0; k < j; ++k) {
      // lower triangle holds knot differences, upper triangle basis values
      ndu(j, k) = right(k + 1) + left(j - k);
      const Scalar temp = detail::safe_div(ndu(k, j - 1), ndu(j, k));
      ndu(k, j) = saved + right(k + 1) * temp;
      saved = left(j - k) * temp;
    }
    ndu(j, j) = saved;
  }

  MatrixX<Scalar> ders = MatrixX<Scalar>::Zero(order + 1, r + 1);
  for (int j = 0; j <= r; ++j) ders(0, j) = ndu(j, r);

  MatrixX<Scalar> a(2, r + 1);
  for (int j = 0; j <= r; ++j) {
    int s1 = 0, s2 = 1;
    a.setZero();
    a(0, 0) = Scalar(1);
    for (int k = 1; k <= order; ++k) {
      Scalar d(0);
      const int rk = j - k, pk = r - k;
      if (j >= k) {
        a(s2, 0) = detail::safe_div(a(s1, 0), ndu(pk + 1, rk));
        d = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (j - 1 <= pk) ? k - 1 : r - j;
      for (int m = j1; m <= j2; ++m) {
        a(s2, m) = detail::safe_div(a(s1, m) - a(s1, m - 1), ndu(pk + 1, rk + m));
        d += a(s2, m) * ndu(rk + m, pk);
      }
      if (j <= pk) {
        a(s2, k) = detail::safe_div(-a(s1, k - 1), ndu(pk + 1, j));
        d += a(s2, k) * ndu(j, pk);
      }
      ders(k, j) = d;
      std::swap(s1, s2);
    }
  }
  Scalar fac(r);
  for (int k = 1; k <= order; ++k) {
    ders.row(k) *= fac;
    fac *= Scalar(r - k);
  }
  return {span - r, std::move(ders)};
}

/// Values and derivatives up to `order` of the r+1 basis functions active at z.
template <typename Scalar>
BasisDerivatives<Scalar> eval_basis_derivs(const KnotVector<Scalar>& kv, Scalar z, int order) {
  return eval_basis_derivs_in_span(kv, kv.find_span(z), z, order);
}

template <typename Scalar>
struct KnotInsertion {
  KnotVector<Scalar> knots;
  /// new_coefficients = transfer * old_coefficients; size (n+1) x n.
  Eigen::SparseMatrix<Scalar> transfer;
};

/// Boehm knot insertion. The refined basis reproduces every function of the
/// coarse one; inserting beyond multiplicity r is rejected.
template <typename Scalar>
KnotInsertion<Scalar> insert_knot(const KnotVector<Scalar>& kv, Scalar xi) {
  if (!(xi > Scalar(0) && xi < Scalar(1)))
    throw InvalidArgument("inserted knot must lie in (0,1)");
  const int r = kv.degree();
  if (kv.multiplicity(xi) + 1 > r) {
    std::ostringstream os;
    os << "inserting " << xi << " would give multiplicity " << kv.multiplicity(xi) + 1
       << " > degree " << r;
    throw InvalidKnotVector(os.str());
  }
  const int n = kv.size();
  const int mu = kv.find_span(xi);
  std::vector<Scalar> k = kv.knots();
  k.insert(k.begin() + mu + 1, xi);

  std::vector<Eigen::Triplet<Scalar>> t;
  for (int i = 0; i <= n; ++i) {
    if (i <= mu - r) {
      t.emplace_back(i, i, Scalar(1));
    } else if (i <= mu) {
      const Scalar alpha = (xi - kv[i]) / (kv[i + r] - kv[i]);
      if (alpha != Scalar(0)) t.emplace_back(i, i, alpha);
      if (alpha != Scalar(1)) t.emplace_back(i, i - 1, Scalar(1) - alpha);
    } else {
      t.emplace_back(i, i - 1, Scalar(1));
    }
  }
  Eigen::SparseMatrix<Scalar> T(n + 1, n);
  T.setFromTriplets(t.begin(), t.end());
  return {KnotVector<Scalar>(std::move(k), r), std::move(T)};
}

/// Tensor product of univariate bases, optionally rational. Multi-indices are
/// linearised with direction 0 running fastest.
template <typename Scalar>
class TensorBasis {
 public:
  TensorBasis() = default;
  explicit TensorBasis(std::vector<KnotVector<Scalar>> directions,
                       std::optional<VectorX<Scalar>> weights = std::nullopt)
      : directions_(std::move(directions)), weights_(std::move(weights)) {
    if (directions_.empty() || directions_.size() > 3)
      throw InvalidArgument("tensor basis needs 1 to 3 directions");
    if (weights_) {
      if (weights_->size() != size())
        throw InvalidArgument("weight count does not match basis dimension");
      if ((weights_->array() <= Scalar(0)).any())
        throw InvalidArgument("NURBS weights must be strictly positive");
    }
  }

  int dim() const { return static_cast<int>(directions_.size()); }
  const KnotVector<Scalar>& direction(int k) const {
    return directions_[static_cast<std::size_t>(k)];
  }
  const std::vector<KnotVector<Scalar>>& directions() const { return directions_; }
  const std::optional<VectorX<Scalar>>& weights() const { return weights_; }
  bool rational() const { return weights_.has_value(); }

  int size() const {
    int s = 1;
    for (const auto& d : directions_) s *= d.size();
    return s;
  }

  int linear_index(const std::vector<int>& multi) const {
    int idx = 0, stride = 1;
    for (int k = 0; k < dim(); ++k) {
      idx += multi[static_cast<std::size_t>(k)] * stride;
      stride *= direction(k).size();
    }
    return idx;
  }

  std::vector<int> multi_index(int linear) const {
    std::vector<int> m(static_cast<std::size_t>(dim()));
    for (int k = 0; k < dim(); ++k) {
      m[static_cast<std::size_t>(k)] = linear % direction(k).size();
      linear /= direction(k).size();
    }
    return m;
  }

 private:
  std::vector<KnotVector<Scalar>> directions_;
  std::optional<VectorX<Scalar>> weights_;
};

/// Active basis functions of a tensor basis at one parametric point.
template <typename Scalar>
struct TensorEval {
  std::vector<int> indices;   ///< linear indices of the active functions
  VectorX<Scalar> values;
  MatrixX<Scalar> grads;      ///< grads(k, a): d/dzeta_k of function a
};

/// Plain tensor-product B-spline values and first derivatives (weights ignored).
template <typename Scalar>
TensorEval<Scalar> eval_tensor(const TensorBasis<Scalar>& basis, const VectorX<Scalar>& zeta) {
  const int D = basis.dim();
  if (zeta.size() != D) throw InvalidArgument("point dimension does not match basis");
  std::vector<BasisDerivatives<Scalar>> uni;
  int count = 1;
  for (int k = 0; k < D; ++k) {
    const auto& kv = basis.direction(k);
    uni.push_back(eval_basis_derivs(kv, zeta(k), std::min(1, kv.degree())));
    count *= kv.degree() + 1;
  }
  TensorEval<Scalar> out;
  out.indices.resize(static_cast<std::size_t>(count));
  out.values.resize(count);
  out.grads.resize(D, count);
  std::vector<int> local(static_cast<std::size_t>(D), 0), multi(static_cast<std::size_t>(D));
  for (int a = 0; a < count; ++a) {
    int rem = a;
    for (int k = 0; k < D; ++k) {
      const int w = basis.direction(k).degree() + 1;
      local[static_cast<std::size_t>(k)] = rem % w;
      rem /= w;
      multi[static_cast<std::size_t>(k)] = uni[static_cast<std::size_t>(k)].first + local[k];
    }
    out.indices[static_cast<std::size_t>(a)] = basis.linear_index(multi);
    Scalar v(1);
    for (int k = 0; k < D; ++k) v *= uni[k].ders(0, local[k]);
    out.values(a) = v;
    for (int g = 0; g < D; ++g) {
      Scalar d(1);
      for (int k = 0; k < D; ++k) {
        const auto& U = uni[static_cast<std::size_t>(k)].ders;
        d *= (k == g) ? (U.rows() > 1 ? U(1, local[k]) : Scalar(0)) : U(0, local[k]);
      }
      out.grads(g, a) = d;
    }
  }
  return out;
}

/// Rational basis N_i = w_i B_i / W and its parametric gradient.
template <typename Scalar>
TensorEval<Scalar> eval_nurbs(const TensorBasis<Scalar>& basis, const VectorX<Scalar>& zeta) {
  if (!basis.rational()) throw InvalidArgument("eval_nurbs requires weights");
  TensorEval<Scalar> e = eval_tensor(basis, zeta);
  const VectorX<Scalar>& w = *basis.weights();
  const int count = static_cast<int>(e.indices.size());
  VectorX<Scalar> wa(count);
  for (int a = 0; a < count; ++a) wa(a) = w(e.indices[static_cast<std::size_t>(a)]);
  const Scalar W = e.values.dot(wa);
  const VectorX<Scalar> dW = e.grads * wa;
  for (int a = 0; a < count; ++a) {
    for (int g = 0; g < basis.dim(); ++g)
      e.grads(g, a) = wa(a) * (e.grads(g, a) * W - e.values(a) * dW(g)) / (W * W);
    e.values(a) = wa(a) * e.values(a) / W;
  }
  return e;
}

template <typename Scalar>
struct TensorInsertion {
  TensorBasis<Scalar> basis;
  /// Maps coefficients of the coarse basis to the refined one (same function).
  Eigen::SparseMatrix<Scalar> transfer;
};

template <typename Scalar>
TensorInsertion<Scalar> insert_knot(const TensorBasis<Scalar>& basis, int direction, Scalar xi) {
  if (direction < 0 || direction >= basis.dim())
    throw InvalidArgument("knot insertion direction out of range");
  const KnotInsertion<Scalar> uni = insert_knot(basis.direction(direction), xi);

  std::vector<KnotVector<Scalar>> dirs = basis.directions();
  dirs[static_cast<std::size_t>(direction)] = uni.knots;

  // Kronecker product I (x) T (x) I in the linearisation order.
  int inner = 1, outer = 1;
  for (int k = 0; k < direction; ++k) inner *= basis.direction(k).size();
  for (int k = direction + 1; k < basis.dim(); ++k) outer *= basis.direction(k).size();
  const int n_old = basis.direction(direction).size();
  const int n_new = n_old + 1;
  std::vector<Eigen::Triplet<Scalar>> t;
  for (int o = 0; o < outer; ++o)
    for (int c = 0; c < uni.transfer.outerSize(); ++c)
      for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(uni.transfer, c); it; ++it)
        for (int i = 0; i < inner; ++i)
          t.emplace_back(i + inner * (static_cast<int>(it.row()) + n_new * o),
                         i + inner * (static_cast<int>(it.col()) + n_old * o), it.value());
  Eigen::SparseMatrix<Scalar> K(inner * n_new * outer, inner * n_old * outer);
  K.setFromTriplets(t.begin(), t.end());

  if (!basis.rational()) return {TensorBasis<Scalar>(std::move(dirs)), std::move(K)};

  // Rational case: refine in homogeneous form, then divide by the new weights.
  const VectorX<Scalar>& w = *basis.weights();
  VectorX<Scalar> w_new = K * w;
  Eigen::SparseMatrix<Scalar> R = K;
  for (int c = 0; c < R.outerSize(); ++c)
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(R, c); it; ++it)
      it.valueRef() *= w(it.col()) / w_new(it.row());
  return {TensorBasis<Scalar>(std::move(dirs), std::move(w_new)), std::move(R)};
}

template <typename Scalar>
struct QuadRule {
  std::vector<Scalar> points;   ///< in (0,1)
  std::vector<Scalar> weights;  ///< sum to 1
};

/// Gauss-Legendre rule with n points on (0,1), exact up to degree 2n-1.
template <typename Scalar = double>
QuadRule<Scalar> gauss_rule(int n) {
  if (n < 1 || n > 16) throw InvalidArgument("Gauss rule size must be in [1,16]");
  QuadRule<Scalar> q;
  q.points.resize(static_cast<std::size_t>(n));
  q.weights.resize(static_cast<std::size_t>(n));
  const long double pi = std::numbers::pi_v<long double>;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    long double x = std::cos(pi * (i + 0.75L) / (n + 0.5L));
    long double dp = 0;
    for (int it = 0; it < 100; ++it) {
      long double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const long double pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1;
      dp = n * (x * p1 - p0) / (x * x - 1);
      const long double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-19L) break;
    }
    {
      long double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const long double pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1;
      dp = n * (x * p1 - p0) / (x * x - 1);
    }
    const long double w = 2 / ((1 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i), hi = static_cast<std::size_t>(n - 1 - i);
    q.points[lo] = static_cast<Scalar>((1 - x) / 2);
    q.points[hi] = static_cast<Scalar>((1 + x) / 2);
    q.weights[lo] = static_cast<Scalar>(w / 2);
    q.weights[hi] = static_cast<Scalar>(w / 2);
  }
  return q;
}

using KnotVectord = KnotVector<double>;
using TensorBasisd = TensorBasis<double>;
using QuadRuled = QuadRule<double>;

}  // namespace igst
