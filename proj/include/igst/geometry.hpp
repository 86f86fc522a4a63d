#pragma once

// Space-time cylinder Q = Omega x (0,T) with Phi(zeta_s, zeta_t) = (Phi_s(zeta_s), T*zeta_t).
// The spatial map is a (possibly rational) tensor spline in d in {1,2} variables.

#include <Eigen/Core>

#include <string>
#include <utility>
#include <vector>

#include "igst/splines.hpp"

namespace igst {

/// Small fixed-capacity vectors and matrices (space-time dimension <= 3).
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

struct SpatialEval {
  Vec x;     ///< physical point
  Mat jac;   ///< d x d, jac(i, k) = dx_i / dzeta_k
};

class SpaceTimeMap {
 public:
  SpaceTimeMap() = default;
  /// control_points: one row per spatial basis function, d columns.
  SpaceTimeMap(TensorBasisd spatial, Eigen::MatrixXd control_points, double final_time);

  /// Axis-aligned box [a_0,b_0] x ... with a degree-1 single-span map.
  static SpaceTimeMap box(const std::vector<std::pair<double, double>>& extents, double final_time);

  int dim() const { return basis_.dim(); }
  double final_time() const { return T_; }
  const TensorBasisd& spatial_basis() const { return basis_; }
  const Eigen::MatrixXd& control_points() const { return cp_; }

  SpatialEval eval_spatial(const Vec& zeta_s) const;
  /// Physical space-time point (x, t) of a parametric point in [0,1]^{d+1}.
  Vec point(const Vec& zeta) const;
  /// Parametric spatial coordinates of a physical point, by Newton iteration.
  Vec invert(const Vec& x, double tol = 1e-13) const;

 private:
  TensorBasisd basis_;
  Eigen::MatrixXd cp_;
  double T_ = 1.0;
};

/// Same map with every spatial knot span split into `factor` equal parts.
SpaceTimeMap refine_map(const SpaceTimeMap& map, int factor);

struct Jacobian {
  Mat jac;       ///< (d+1) x (d+1), block diag(dPhi_s/dzeta_s, T)
  Mat inverse;
  double det = 0;
};

class Mesh {
 public:
  Mesh() = default;
  /// breaks: d spatial breakpoint lists followed by the temporal one, each
  /// strictly increasing from 0 to 1 and containing the map's own breakpoints.
  Mesh(SpaceTimeMap map, std::vector<std::vector<double>> breaks);

  const SpaceTimeMap& map() const { return map_; }
  int dim() const { return map_.dim(); }
  int directions() const { return static_cast<int>(breaks_.size()); }
  const std::vector<double>& breaks(int k) const { return breaks_[static_cast<std::size_t>(k)]; }
  int spans(int k) const { return static_cast<int>(breaks(k).size()) - 1; }
  long n_elements() const;
  long n_spatial_elements() const;

  /// Multi-index (direction 0 fastest, time last) of an element id.
  std::vector<int> element_index(long element) const;
  long element_id(const std::vector<int>& index) const;
  long element_id(long spatial_element, int time_span) const {
    return spatial_element + n_spatial_elements() * time_span;
  }
  /// Element containing a parametric point; points on interfaces go right.
  long locate(const Vec& zeta) const;
  /// Parametric box of an element: lower and upper corners.
  std::pair<Vec, Vec> element_box(long element) const;

  double h_S() const { return h_S_; }
  double h_T() const { return h_T_; }
  double h() const { return h_; }
  /// Quasi-uniformity constant: h / min_K h_K.
  double c_M() const { return c_M_; }

 private:
  void compute_sizes();

  SpaceTimeMap map_;
  std::vector<std::vector<double>> breaks_;
  double h_S_ = 0, h_T_ = 0, h_ = 0, c_M_ = 1;
};

/// Mesh whose breakpoints are those of the spatial map, one temporal span.
Mesh coarse_mesh(const SpaceTimeMap& map);
/// Uniform subdivision of every span of every direction.
Mesh refine(const Mesh& mesh, int factor);
/// Per-direction subdivision factors (d spatial then time).
Mesh refine(const Mesh& mesh, const std::vector<int>& factors);
/// Box mesh with the given span counts per spatial direction and in time.
Mesh box_mesh(const std::vector<std::pair<double, double>>& extents, double final_time,
              const std::vector<int>& spatial_spans, int time_spans);

Jacobian jacobian(const Mesh& mesh, long element, const Vec& zeta);

enum class BoundaryTag { DisplacementDirichlet, Traction, PressureDirichlet, Flux, Initial, Final };

std::string to_string(BoundaryTag tag);
BoundaryTag boundary_tag_from_string(const std::string& name);

/// A parametric facet of Q. Spatial facets are {zeta_direction = side} for a
/// spatial direction, restricted in the other spatial direction (d = 2) to
/// [range_lo, range_hi]. Initial and Final refer to zeta_t = 0 and 1.
struct BoundaryRegion {
  BoundaryTag tag = BoundaryTag::DisplacementDirichlet;
  int direction = 0;
  int side = 0;
  double range_lo = 0.0;
  double range_hi = 1.0;
  /// Displacement components constrained by a Dirichlet region (bit i = u_i).
  unsigned components = ~0u;

  static BoundaryRegion spatial(BoundaryTag tag, int direction, int side, double lo = 0.0,
                                double hi = 1.0, unsigned components = ~0u) {
    return {tag, direction, side, lo, hi, components};
  }
  static BoundaryRegion initial() { return {BoundaryTag::Initial, -1, 0, 0.0, 1.0, ~0u}; }
  static BoundaryRegion final_time() { return {BoundaryTag::Final, -1, 1, 0.0, 1.0, ~0u}; }
  bool is_temporal() const { return tag == BoundaryTag::Initial || tag == BoundaryTag::Final; }
};

struct FacetPoint {
  long element = 0;   ///< space-time element adjacent to the facet
  Vec zeta;           ///< parametric space-time point
  Vec x;              ///< physical spatial point
  double t = 0;
  double weight = 0;  ///< surface measure weight
  Vec normal;         ///< unit outward normal in space-time (n_x, n_t)
};

/// Gauss rule on the facets of a region with `points` nodes per direction.
std::vector<FacetPoint> facet_quadrature(const BoundaryRegion& region, const Mesh& mesh, int points);

}  // namespace igst
