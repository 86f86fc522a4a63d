#include <gtest/gtest.h>

#include <numbers>

#include "igst/geometry.hpp"

using namespace igst;

namespace {

// Quarter annulus 1 < r < 2 in the first quadrant, exact NURBS, T = 2.
SpaceTimeMap quarter_annulus() {
  const double w = std::sqrt(0.5);
  Eigen::VectorXd weights(6);
  weights << 1, w, 1, 1, w, 1;
  TensorBasisd basis({KnotVectord({0, 0, 0, 1, 1, 1}, 2), KnotVectord({0, 0, 1, 1}, 1)}, weights);
  Eigen::MatrixXd cp(6, 2);
  cp << 1, 0, 1, 1, 0, 1, 2, 0, 2, 2, 0, 2;
  return SpaceTimeMap(std::move(basis), cp, 2.0);
}

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Sum of quadrature weights |det J| w over all elements.
double volume(const Mesh& mesh, int points) {
  const auto q = gauss_rule(points);
  const int D = mesh.directions();
  double vol = 0;
  for (long e = 0; e < mesh.n_elements(); ++e) {
    const auto [lo, hi] = mesh.element_box(e);
    const int n = static_cast<int>(std::pow(points, D));
    for (int a = 0; a < n; ++a) {
      Vec z(D);
      double w = 1;
      int rem = a;
      for (int k = 0; k < D; ++k) {
        const int i = rem % points;
        rem /= points;
        z(k) = lo(k) + (hi(k) - lo(k)) * q.points[i];
        w *= (hi(k) - lo(k)) * q.weights[i];
      }
      vol += std::abs(jacobian(mesh, e, z).det) * w;
    }
  }
  return vol;
}

}  // namespace

TEST(Geometry, BoxMapIsAffine) {
  const SpaceTimeMap m = SpaceTimeMap::box({{-1.0, 2.0}, {0.5, 1.5}}, 3.0);
  const Vec x = m.point(vec({0.25, 0.5, 0.1}));
  EXPECT_NEAR(x(0), -0.25, 1e-15);
  EXPECT_NEAR(x(1), 1.0, 1e-15);
  EXPECT_NEAR(x(2), 0.3, 1e-15);
  const SpatialEval s = m.eval_spatial(vec({0.7, 0.2}));
  EXPECT_NEAR(s.jac(0, 0), 3.0, 1e-14);
  EXPECT_NEAR(s.jac(1, 1), 1.0, 1e-14);
  EXPECT_NEAR(s.jac(0, 1), 0.0, 1e-14);
}

TEST(Geometry, TimeCoordinateIsExactlyScaled) {
  const SpaceTimeMap m = quarter_annulus();
  for (double zt : {0.0, 0.1, 0.33, 0.5, 1.0}) {
    const Vec x = m.point(vec({0.3, 0.8, zt}));
    EXPECT_EQ(x(2), 2.0 * zt);
  }
}

TEST(Geometry, CurvedMapInversionRoundTrip) {
  const SpaceTimeMap m = quarter_annulus();
  for (double a : {0.0, 0.2, 0.5, 0.9})
    for (double b : {0.1, 0.6, 1.0}) {
      const Vec zs = vec({a, b});
      const Vec x = m.eval_spatial(zs).x;
      EXPECT_NEAR(x.norm(), 1.0 + b, 1e-13);
      EXPECT_NEAR((m.invert(x) - zs).norm(), 0.0, 1e-11);
    }
}

TEST(Geometry, RejectsInvalidMaps) {
  EXPECT_THROW(SpaceTimeMap::box({{0.0, 1.0}}, 0.0), Error);
  TensorBasisd basis({KnotVectord({0, 0, 1, 1}, 1)});
  EXPECT_THROW(SpaceTimeMap(basis, Eigen::MatrixXd::Zero(3, 1), 1.0), Error);
}

TEST(Geometry, VolumeOfAffineMeshes) {
  const Mesh m2 = box_mesh({{0.0, 2.0}, {1.0, 1.5}}, 3.0, {3, 5}, 4);
  EXPECT_NEAR(volume(m2, 2), 2.0 * 0.5 * 3.0, 1e-12);
  const Mesh m1 = box_mesh({{0.0, 1.0}}, 1.0, {7}, 3);
  EXPECT_NEAR(volume(m1, 1), 1.0, 1e-12);
}

TEST(Geometry, VolumeOfCurvedMesh) {
  const SpaceTimeMap m = quarter_annulus();
  const double exact = 0.25 * std::numbers::pi * (4.0 - 1.0) * 2.0;
  const Mesh mesh = refine(coarse_mesh(m), {8, 4, 2});
  EXPECT_NEAR(volume(mesh, 6), exact, 1e-8);
}

TEST(Geometry, RefinedMapIsTheSameMap) {
  const SpaceTimeMap m = quarter_annulus();
  const SpaceTimeMap r = refine_map(m, 3);
  for (double a : {0.05, 0.4, 0.95})
    for (double b : {0.0, 0.5}) {
      const Vec z = vec({a, b});
      EXPECT_NEAR((m.eval_spatial(z).x - r.eval_spatial(z).x).norm(), 0.0, 1e-13);
    }
}

TEST(Geometry, MeshIndexingAndLocation) {
  const Mesh mesh = box_mesh({{0.0, 1.0}, {0.0, 1.0}}, 1.0, {4, 3}, 5);
  EXPECT_EQ(mesh.n_elements(), 4L * 3 * 5);
  EXPECT_EQ(mesh.n_spatial_elements(), 12L);
  for (long e = 0; e < mesh.n_elements(); ++e) EXPECT_EQ(mesh.element_id(mesh.element_index(e)), e);
  const long e = mesh.locate(vec({0.3, 0.5, 0.9}));
  const auto idx = mesh.element_index(e);
  EXPECT_EQ(idx, (std::vector<int>{1, 1, 4}));
  // interface points belong to the element on the right
  EXPECT_EQ(mesh.element_index(mesh.locate(vec({0.25, 0.0, 0.0})))[0], 1);
  EXPECT_NEAR(mesh.h_T(), 0.2, 1e-15);
}

TEST(Geometry, MeshRegularityConstantIsStableUnderRefinement) {
  const Mesh coarse = refine(coarse_mesh(quarter_annulus()), {2, 2, 1});
  std::vector<double> cm{coarse.c_M()};
  for (int f : {2, 4, 8}) cm.push_back(refine(coarse, f).c_M());
  for (double c : cm) {
    EXPECT_TRUE(std::isfinite(c));
    EXPECT_GE(c, 1.0);
    EXPECT_LT(c, 2.0 * cm.front());
  }
}

TEST(Geometry, MeshSizes) {
  const Mesh mesh = box_mesh({{0.0, 2.0}, {0.0, 1.0}}, 4.0, {4, 4}, 8);
  EXPECT_NEAR(mesh.h_T(), 0.5, 1e-15);
  EXPECT_NEAR(mesh.h_S(), std::hypot(0.5, 0.25), 1e-14);
}

TEST(Geometry, JacobianHasTensorStructure) {
  const SpaceTimeMap m = quarter_annulus();
  const Mesh mesh = refine(coarse_mesh(m), 2);
  const auto [lo, hi] = mesh.element_box(3);
  const Jacobian J = jacobian(mesh, 3, Vec(0.3 * lo + 0.7 * hi));
  EXPECT_EQ(J.jac.rows(), 3);
  EXPECT_EQ(J.jac(2, 2), 2.0);
  EXPECT_EQ(J.jac(0, 2), 0.0);
  EXPECT_EQ(J.jac(2, 0), 0.0);
  EXPECT_NEAR((J.jac * J.inverse - Mat::Identity(3, 3)).norm(), 0.0, 1e-13);
}

TEST(Geometry, FacetQuadratureMeasuresAndNormals) {
  const Mesh mesh = box_mesh({{0.0, 2.0}, {0.0, 1.0}}, 3.0, {4, 2}, 3);
  auto total = [&](const BoundaryRegion& r) {
    double s = 0;
    for (const FacetPoint& p : facet_quadrature(r, mesh, 3)) s += p.weight;
    return s;
  };
  // Right side x = 2: length 1 times T.
  const auto right = BoundaryRegion::spatial(BoundaryTag::Traction, 0, 1);
  EXPECT_NEAR(total(right), 3.0, 1e-13);
  for (const FacetPoint& p : facet_quadrature(right, mesh, 2)) {
    EXPECT_NEAR(p.x(0), 2.0, 1e-14);
    EXPECT_NEAR(p.normal(0), 1.0, 1e-14);
    EXPECT_NEAR(p.normal(1), 0.0, 1e-14);
  }
  // Top half range: x in [1, 2] of length 1 times T.
  EXPECT_NEAR(total(BoundaryRegion::spatial(BoundaryTag::Traction, 1, 1, 0.5, 1.0)), 3.0, 1e-13);
  // Bottom y = 0 has outward normal -e_y.
  for (const FacetPoint& p : facet_quadrature(BoundaryRegion::spatial(BoundaryTag::Flux, 1, 0), mesh, 2))
    EXPECT_NEAR(p.normal(1), -1.0, 1e-14);
  // Initial facet: area of Omega.
  EXPECT_NEAR(total(BoundaryRegion::initial()), 2.0, 1e-13);
}

TEST(Geometry, CurvedFacetLength) {
  const Mesh mesh = refine(coarse_mesh(quarter_annulus()), {8, 2, 1});
  double s = 0;
  for (const FacetPoint& p : facet_quadrature(BoundaryRegion::spatial(BoundaryTag::Flux, 1, 1), mesh, 6)) {
    s += p.weight;
    EXPECT_NEAR(p.normal.head(2).dot(p.x.head(2) / p.x.head(2).norm()), 1.0, 1e-10);
  }
  EXPECT_NEAR(s, 0.5 * std::numbers::pi * 2.0 * 2.0, 1e-8);
}

TEST(Geometry, BoundaryTagNames) {
  for (BoundaryTag t : {BoundaryTag::DisplacementDirichlet, BoundaryTag::Traction, BoundaryTag::PressureDirichlet,
                        BoundaryTag::Flux, BoundaryTag::Initial, BoundaryTag::Final})
    EXPECT_EQ(boundary_tag_from_string(to_string(t)), t);
  EXPECT_THROW(boundary_tag_from_string("nonsense"), Error);
}
