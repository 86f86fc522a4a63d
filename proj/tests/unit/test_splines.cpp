#include <gtest/gtest.h>

#include <random>

#include "igst/analytic.hpp"
#include "igst/splines.hpp"

using namespace igst;

namespace {

std::vector<double> random_points(int n, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> z{0.0, 1.0};
  for (int i = 0; i < n; ++i) z.push_back(U(gen));
  return z;
}

// Non-uniform knot vectors with interior knots of varying multiplicity.
std::vector<KnotVectord> sample_knot_vectors() {
  std::vector<KnotVectord> out;
  for (int r = 0; r <= 4; ++r) {
    out.push_back(KnotVectord::uniform(5, r, r == 0 ? -1 : r - 1));
    if (r >= 1) out.push_back(KnotVectord::from_breakpoints({0.0, 0.1, 0.35, 0.4, 0.8, 1.0}, r, 0));
    if (r >= 2) {
      std::vector<double> k(static_cast<std::size_t>(r + 1), 0.0);
      for (double b : {0.2, 0.2, 0.5, 0.7, 0.7}) k.push_back(b);
      for (int i = 0; i <= r; ++i) k.push_back(1.0);
      out.emplace_back(k, r);
    }
  }
  return out;
}

// Value of basis function i at z by the recursive definition, knot-span convention included.
double cox_de_boor(const KnotVectord& kv, int i, int r, double z) {
  if (r == 0) {
    const int mu = kv.find_span(z);
    return i == mu ? 1.0 : 0.0;
  }
  auto frac = [](double a, double b) { return b == 0.0 ? 0.0 : a / b; };
  return frac(z - kv[i], kv[i + r] - kv[i]) * cox_de_boor(kv, i, r - 1, z) +
         frac(kv[i + r + 1] - z, kv[i + r + 1] - kv[i + 1]) * cox_de_boor(kv, i + 1, r - 1, z);
}

double full_value(const KnotVectord& kv, int i, double z) {
  const auto b = eval_basis(kv, z);
  const int j = i - b.first;
  return (j >= 0 && j <= kv.degree()) ? b.values(j) : 0.0;
}

}  // namespace

TEST(Splines, PartitionOfUnityAndNonnegativity) {
  for (const auto& kv : sample_knot_vectors())
    for (double z : random_points(200, 3)) {
      const auto b = eval_basis(kv, z);
      EXPECT_NEAR(b.values.sum(), 1.0, 1e-14);
      EXPECT_GE(b.values.minCoeff(), -1e-15);
    }
}

TEST(Splines, PartitionOfUnityIsExactInRationalArithmetic) {
  const KnotVector<Rational> kv({0, 0, 0, Rational(1, 3), Rational(1, 3), Rational(3, 4), 1, 1, 1}, 2);
  for (Rational z : {Rational(0), Rational(1, 7), Rational(1, 3), Rational(5, 8), Rational(1)}) {
    const auto b = eval_basis(kv, z);
    Rational s(0);
    for (int j = 0; j <= 2; ++j) s += b.values(j);
    EXPECT_EQ(s, Rational(1));
  }
}

TEST(Splines, MatchesRecursiveDefinition) {
  for (const auto& kv : sample_knot_vectors())
    for (double z : random_points(50, 5))
      for (int i = 0; i < kv.size(); ++i)
        EXPECT_NEAR(full_value(kv, i, z), cox_de_boor(kv, i, kv.degree(), z), 1e-13);
}

TEST(Splines, LocalSupport) {
  for (const auto& kv : sample_knot_vectors())
    for (double z : random_points(100, 7)) {
      const auto b = eval_basis(kv, z);
      const int mu = kv.find_span(z);
      EXPECT_EQ(b.first, mu - kv.degree());
      for (int i = 0; i < kv.size(); ++i) {
        const auto [lo, hi] = kv.support(i);
        if (z < lo || z > hi) {
          EXPECT_EQ(full_value(kv, i, z), 0.0);
        }
      }
    }
}

TEST(Splines, DerivativesMatchFiniteDifferences) {
  // The five-point stencil is exact for polynomials of degree <= 4 inside a span.
  const double h = 1e-3;
  for (const auto& kv : sample_knot_vectors()) {
    if (kv.degree() == 0) continue;
    const auto br = kv.breakpoints();
    for (std::size_t s = 0; s + 1 < br.size(); ++s) {
      const double a = br[s], b = br[s + 1];
      if (b - a < 10 * h) continue;
      for (double frac : {0.3, 0.5, 0.77}) {
        const double z = a + 3 * h + frac * (b - a - 6 * h);
        const auto d = eval_basis_derivs(kv, z, 1);
        for (int j = 0; j <= kv.degree(); ++j) {
          const int i = d.first + j;
          auto f = [&](double y) { return full_value(kv, i, y); };
          const double fd = (-f(z + 2 * h) + 8 * f(z + h) - 8 * f(z - h) + f(z - 2 * h)) / (12 * h);
          EXPECT_NEAR(d.ders(1, j), fd, 1e-10);
          EXPECT_NEAR(d.ders(0, j), f(z), 1e-15);
        }
      }
    }
  }
}

TEST(Splines, DerivativeRecurrence) {
  // B'_{i,r} = r (B_{i,r-1} / (k_{i+r} - k_i) - B_{i+1,r-1} / (k_{i+r+1} - k_{i+1}))
  for (const auto& kv : sample_knot_vectors()) {
    const int r = kv.degree();
    if (r == 0) continue;
    for (double z : random_points(40, 11)) {
      const auto d = eval_basis_derivs(kv, z, 1);
      for (int j = 0; j <= r; ++j) {
        const int i = d.first + j;
        auto frac = [](double a, double b) { return b == 0.0 ? 0.0 : a / b; };
        const double expect = r * (frac(cox_de_boor(kv, i, r - 1, z), kv[i + r] - kv[i]) -
                                   frac(cox_de_boor(kv, i + 1, r - 1, z), kv[i + r + 1] - kv[i + 1]));
        EXPECT_NEAR(d.ders(1, j), expect, 1e-11 * std::max(1.0, std::abs(expect)));
      }
    }
  }
}

TEST(Splines, HigherDerivativesIntegrateBack) {
  // Second derivatives against a finite difference of first derivatives (exact for degree <= 3 pieces).
  const KnotVectord kv = KnotVectord::uniform(4, 3, 2);
  const double z = 0.4, h = 1e-3;
  const auto d = eval_basis_derivs(kv, z, 2);
  const auto dp = eval_basis_derivs(kv, z + h, 1), dm = eval_basis_derivs(kv, z - h, 1);
  ASSERT_EQ(dp.first, d.first);
  for (int j = 0; j <= 3; ++j) EXPECT_NEAR(d.ders(2, j), (dp.ders(1, j) - dm.ders(1, j)) / (2 * h), 1e-8);
}

TEST(Splines, RejectsInvalidKnotVectors) {
  EXPECT_THROW(KnotVectord({0, 0.5, 1}, 1), InvalidKnotVector);
  EXPECT_THROW(KnotVectord({0, 0, 0.6, 0.4, 1, 1}, 1), InvalidKnotVector);
  EXPECT_THROW(KnotVectord({0, 0, 0.5, 0.5, 1, 1}, 1), InvalidKnotVector);
  EXPECT_THROW(KnotVectord::uniform(0, 2, 1), InvalidKnotVector);
  EXPECT_THROW(KnotVectord::uniform(3, 2, 2), InvalidKnotVector);
  EXPECT_THROW(KnotVectord::uniform(3, 2, 1).find_span(1.5), InvalidArgument);
}

TEST(Splines, GrevilleAbscissae) {
  const KnotVectord kv({0, 0, 0, 0.5, 1, 1, 1}, 2);
  const auto g = kv.greville();
  ASSERT_EQ(g.size(), 4u);
  EXPECT_DOUBLE_EQ(g[0], 0.0);
  EXPECT_DOUBLE_EQ(g[1], 0.25);
  EXPECT_DOUBLE_EQ(g[2], 0.75);
  EXPECT_DOUBLE_EQ(g[3], 1.0);
}

TEST(Splines, GaussRuleExactness) {
  for (int n = 1; n <= 10; ++n) {
    const auto q = gauss_rule(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0;
      for (int i = 0; i < n; ++i) s += q.weights[i] * std::pow(q.points[i], k);
      EXPECT_NEAR(s, 1.0 / (k + 1), 1e-14) << "n=" << n << " k=" << k;
    }
    double s = 0;
    for (int i = 0; i < n; ++i) s += q.weights[i] * std::pow(q.points[i], 2 * n);
    EXPECT_GT(std::abs(s - 1.0 / (2 * n + 1)), 1e-12) << "n=" << n;
  }
  EXPECT_THROW(gauss_rule(0), InvalidArgument);
}

TEST(Splines, UnivariateKnotInsertionPreservesFunctions) {
  std::mt19937 gen(13);
  std::normal_distribution<double> N;
  for (const auto& kv : sample_knot_vectors()) {
    if (kv.degree() == 0) continue;
    for (double xi : {0.27, 0.5, 0.8}) {
      if (kv.multiplicity(xi) + 1 > kv.degree()) continue;
      const auto ins = insert_knot(kv, xi);
      EXPECT_EQ(ins.knots.size(), kv.size() + 1);
      Eigen::VectorXd c(kv.size());
      for (int i = 0; i < kv.size(); ++i) c(i) = N(gen);
      const Eigen::VectorXd cr = ins.transfer * c;
      for (double z : random_points(50, 17)) {
        const auto a = eval_basis(kv, z), b = eval_basis(ins.knots, z);
        EXPECT_NEAR(a.values.dot(c.segment(a.first, kv.degree() + 1)),
                    b.values.dot(cr.segment(b.first, kv.degree() + 1)), 1e-13);
      }
    }
  }
  const KnotVectord full = KnotVectord::from_breakpoints({0.0, 0.5, 1.0}, 2, 0);
  EXPECT_THROW(insert_knot(full, 0.5), InvalidKnotVector);
  EXPECT_THROW(insert_knot(full, 1.0), InvalidArgument);
}

TEST(Splines, RationalTensorKnotInsertionPreservesGeometry) {
  // Quarter circle of radius 1 (direction 0) extruded linearly (direction 1).
  const double w = std::sqrt(0.5);
  Eigen::VectorXd weights(6);
  weights << 1, w, 1, 1, w, 1;
  const TensorBasisd basis({KnotVectord({0, 0, 0, 1, 1, 1}, 2), KnotVectord({0, 0, 1, 1}, 1)}, weights);
  Eigen::MatrixXd cp(6, 2);
  cp << 1, 0, 1, 1, 0, 1, 2, 0, 2, 2, 0, 2;
  const auto ins = insert_knot(basis, 0, 0.4);
  const Eigen::MatrixXd cp_new = ins.transfer * cp;
  for (double z0 : random_points(10, 19))
    for (double z1 : {0.0, 0.3, 1.0}) {
      Eigen::VectorXd zeta(2);
      zeta << z0, z1;
      const auto a = eval_nurbs(basis, zeta), b = eval_nurbs(ins.basis, zeta);
      Eigen::Vector2d xa = Eigen::Vector2d::Zero(), xb = Eigen::Vector2d::Zero();
      for (std::size_t i = 0; i < a.indices.size(); ++i) xa += a.values(i) * cp.row(a.indices[i]).transpose();
      for (std::size_t i = 0; i < b.indices.size(); ++i) xb += b.values(i) * cp_new.row(b.indices[i]).transpose();
      EXPECT_NEAR((xa - xb).norm(), 0.0, 1e-13);
      EXPECT_NEAR(xa.norm(), 1.0 + z1, 1e-13);  // exact circles
      EXPECT_NEAR(a.values.sum(), 1.0, 1e-14);
    }
}

TEST(Splines, NurbsGradientMatchesFiniteDifferences) {
  Eigen::VectorXd weights(9);
  weights << 1, 0.6, 1, 1.4, 2.0, 0.8, 1, 1.1, 1;
  const TensorBasisd basis({KnotVectord::uniform(1, 2, 1), KnotVectord::uniform(1, 2, 1)}, weights);
  Eigen::VectorXd z(2);
  z << 0.37, 0.61;
  const auto e = eval_nurbs(basis, z);
  const double h = 1e-5;
  for (int g = 0; g < 2; ++g) {
    Eigen::VectorXd zp = z, zm = z;
    zp(g) += h;
    zm(g) -= h;
    const auto ep = eval_nurbs(basis, zp), em = eval_nurbs(basis, zm);
    for (int a = 0; a < 9; ++a) EXPECT_NEAR(e.grads(g, a), (ep.values(a) - em.values(a)) / (2 * h), 1e-8);
  }
}

TEST(Splines, TensorIndexing) {
  const TensorBasisd basis({KnotVectord::uniform(2, 1, 0), KnotVectord::uniform(3, 2, 1)});
  EXPECT_EQ(basis.size(), 3 * 5);
  for (int i = 0; i < basis.size(); ++i) EXPECT_EQ(basis.linear_index(basis.multi_index(i)), i);
  EXPECT_EQ(basis.linear_index({1, 2}), 1 + 3 * 2);
  Eigen::VectorXd bad = Eigen::VectorXd::Ones(basis.size());
  bad(3) = 0;
  EXPECT_THROW(TensorBasisd(basis.directions(), bad), InvalidArgument);
}
