#pragma once

// Tensor-product spline spaces on a space-time mesh: a spatial spline space of
// degree r_S times a temporal one of degree r_T, for scalar or vector fields,
// with homogeneous essential conditions removed from the set of unknowns.

#include <Eigen/Core>

#include <functional>
#include <vector>

#include "igst/geometry.hpp"

namespace igst {

class DiscreteSpace {
 public:
  DiscreteSpace() = default;

  const Mesh& mesh() const { return mesh_; }
  int components() const { return components_; }
  int spatial_degree() const { return spatial_degree_; }
  int temporal_degree() const { return temporal_degree_; }
  /// d spatial knot vectors followed by the temporal one.
  const std::vector<KnotVectord>& knots() const { return knots_; }
  const KnotVectord& knots(int k) const { return knots_[static_cast<std::size_t>(k)]; }

  int spatial_size() const { return spatial_size_; }
  int temporal_size() const { return knots_.back().size(); }
  int scalar_size() const { return spatial_size_ * temporal_size(); }
  int size() const { return components_ * scalar_size(); }
  int n_free() const { return static_cast<int>(free_to_full_.size()); }
  int n_constrained() const { return size() - n_free(); }

  /// Global index of (component, spatial index, temporal index).
  int dof(int component, int spatial, int temporal) const {
    return component * scalar_size() + spatial + spatial_size_ * temporal;
  }
  bool constrained(int full) const { return full_to_free_[static_cast<std::size_t>(full)] < 0; }
  /// Free index of a global dof, -1 when constrained.
  int free_index(int full) const { return full_to_free_[static_cast<std::size_t>(full)]; }
  const std::vector<int>& free_to_full() const { return free_to_full_; }

  /// Full-length coefficients from free ones (constrained entries zero).
  Eigen::VectorXd expand(const Eigen::VectorXd& free) const;
  Eigen::VectorXd restrict_to_free(const Eigen::VectorXd& full) const;

  /// Knot index of the non-empty knot span matching mesh span `span` of direction k.
  int knot_span(int k, int span) const {
    return knot_span_[static_cast<std::size_t>(k)][static_cast<std::size_t>(span)];
  }

 private:
  friend DiscreteSpace build_space(const Mesh&, int, int, int, const std::vector<BoundaryRegion>&,
                                   int, int);
  Mesh mesh_;
  int components_ = 1;
  int spatial_degree_ = 1;
  int temporal_degree_ = 1;
  std::vector<KnotVectord> knots_;
  int spatial_size_ = 0;
  std::vector<int> full_to_free_;
  std::vector<int> free_to_full_;
  std::vector<std::vector<int>> knot_span_;
};

/// Builds the space on the mesh breakpoints. Continuity -1 selects C^{r-1}.
/// Regions tagged displacement/pressure/initial are imposed as homogeneous
/// essential conditions; for vector spaces `components` of the region selects
/// which displacement components are fixed.
DiscreteSpace build_space(const Mesh& mesh, int spatial_degree, int temporal_degree, int components,
                          const std::vector<BoundaryRegion>& dirichlet, int spatial_continuity = -1,
                          int temporal_continuity = -1);

/// Values of a field (scalar or vector) and its derivatives at one point.
struct FieldSample {
  Eigen::VectorXd value;    ///< per component
  Eigen::MatrixXd grad;     ///< components x d, spatial gradient
  Eigen::VectorXd dt;       ///< time derivative
  Eigen::MatrixXd grad_dt;  ///< components x d, mixed derivative
};

/// Evaluates the field with the given coefficients (full length or free
/// length) at a parametric point of an element.
FieldSample eval_fields(const DiscreteSpace& space, const Eigen::VectorXd& coeffs, long element,
                        const Vec& zeta);
/// Same at a physical point (x, t).
FieldSample eval_fields_at(const DiscreteSpace& space, const Eigen::VectorXd& coeffs, const Vec& x,
                           double t);

/// Scalar basis functions of a space evaluated at the points of one spatial
/// element. value(q, a); grad[k](q, a) = d/dx_k (physical).
struct SpatialBlock {
  std::vector<int> index;
  Eigen::MatrixXd value;
  std::vector<Eigen::MatrixXd> grad;
};

/// Temporal basis on one time span: value(q, b) and deriv(q, b) = d/dt.
struct TemporalBlock {
  std::vector<int> index;
  Eigen::MatrixXd value;
  Eigen::MatrixXd deriv;
};

/// zeta: parametric spatial points inside the element; jinv: inverse spatial
/// Jacobians at those points.
SpatialBlock spatial_block(const DiscreteSpace& space, long spatial_element,
                           const std::vector<Vec>& zeta, const std::vector<Mat>& jinv);
TemporalBlock temporal_block(const DiscreteSpace& space, int time_span,
                             const std::vector<double>& zeta_t);

/// Function on Q given in physical coordinates, returning one value per component.
using SpaceTimeFunction = std::function<Eigen::VectorXd(const Vec& x, double t)>;

/// Interpolant at the tensor Greville points; returns full-length coefficients
/// with constrained entries set to zero.
Eigen::VectorXd greville_interpolate(const DiscreteSpace& space, const SpaceTimeFunction& f);

}  // namespace igst
