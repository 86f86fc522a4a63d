#include "igst/geometry.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace igst {

namespace {

bool is_breakpoint(const std::vector<double>& breaks, double v) {
  return std::any_of(breaks.begin(), breaks.end(),
                     [v](double b) { return std::abs(b - v) < 1e-12; });
}

}  // namespace

SpaceTimeMap::SpaceTimeMap(TensorBasisd spatial, Eigen::MatrixXd control_points, double final_time)
    : basis_(std::move(spatial)), cp_(std::move(control_points)), T_(final_time) {
  if (basis_.dim() < 1 || basis_.dim() > 2)
    throw InvalidArgument("spatial dimension must be 1 or 2");
  if (cp_.rows() != basis_.size() || cp_.cols() != basis_.dim())
    throw InvalidArgument("control point array does not match the spatial basis");
  if (!(T_ > 0)) throw InvalidArgument("final time must be positive");
}

SpaceTimeMap SpaceTimeMap::box(const std::vector<std::pair<double, double>>& extents,
                               double final_time) {
  const int d = static_cast<int>(extents.size());
  if (d < 1 || d > 2) throw InvalidArgument("box geometry needs 1 or 2 extents");
  std::vector<KnotVectord> dirs(static_cast<std::size_t>(d), KnotVectord({0, 0, 1, 1}, 1));
  TensorBasisd basis(dirs);
  Eigen::MatrixXd cp(basis.size(), d);
  for (int a = 0; a < basis.size(); ++a) {
    const auto m = basis.multi_index(a);
    for (int k = 0; k < d; ++k) {
      const auto& [lo, hi] = extents[static_cast<std::size_t>(k)];
      if (!(hi > lo)) throw InvalidArgument("box extent must have positive length");
      cp(a, k) = m[static_cast<std::size_t>(k)] == 0 ? lo : hi;
    }
  }
  return SpaceTimeMap(std::move(basis), std::move(cp), final_time);
}

SpatialEval SpaceTimeMap::eval_spatial(const Vec& zeta_s) const {
  const VectorX<double> z = zeta_s;
  const TensorEval<double> e = basis_.rational() ? eval_nurbs(basis_, z) : eval_tensor(basis_, z);
  const int d = dim();
  SpatialEval out{Vec::Zero(d), Mat::Zero(d, d)};
  for (std::size_t a = 0; a < e.indices.size(); ++a) {
    const auto row = cp_.row(e.indices[a]);
    for (int i = 0; i < d; ++i) {
      out.x(i) += e.values(static_cast<Eigen::Index>(a)) * row(i);
      for (int k = 0; k < d; ++k)
        out.jac(i, k) += e.grads(k, static_cast<Eigen::Index>(a)) * row(i);
    }
  }
  return out;
}

Vec SpaceTimeMap::point(const Vec& zeta) const {
  const int d = dim();
  if (zeta.size() != d + 1) throw InvalidArgument("space-time point has wrong dimension");
  const SpatialEval s = eval_spatial(zeta.head(d));
  Vec out(d + 1);
  out.head(d) = s.x;
  out(d) = T_ * zeta(d);
  return out;
}

Vec SpaceTimeMap::invert(const Vec& x, double tol) const {
  const int d = dim();
  if (x.size() != d) throw InvalidArgument("physical point has wrong dimension");
  const double scale = std::max(1.0, cp_.cwiseAbs().maxCoeff());
  const int seeds = 5;
  int total = 1;
  for (int k = 0; k < d; ++k) total *= seeds;
  for (int s = 0; s < total; ++s) {
    Vec z(d);
    int rem = s;
    for (int k = 0; k < d; ++k) {
      z(k) = (0.5 + rem % seeds) / seeds;
      rem /= seeds;
    }
    for (int it = 0; it < 60; ++it) {
      const SpatialEval e = eval_spatial(z);
      const Vec r = e.x - x;
      if (r.norm() <= tol * scale) return z;
      const double det = e.jac.determinant();
      if (std::abs(det) < 1e-300) break;
      Vec step = e.jac.inverse() * r;
      z -= step;
      for (int k = 0; k < d; ++k) z(k) = std::clamp(z(k), 0.0, 1.0);
    }
    const SpatialEval e = eval_spatial(z);
    if ((e.x - x).norm() <= 1e3 * tol * scale) return z;
  }
  std::ostringstream os;
  os << "point (" << x.transpose() << ") is not inside the domain";
  throw InvalidArgument(os.str());
}

SpaceTimeMap refine_map(const SpaceTimeMap& map, int factor) {
  if (factor < 2) throw InvalidArgument("refinement factor must be at least 2");
  TensorBasisd basis = map.spatial_basis();
  Eigen::MatrixXd cp = map.control_points();
  if (basis.rational()) cp = basis.weights()->asDiagonal() * cp;
  for (int k = 0; k < basis.dim(); ++k) {
    const auto b = basis.direction(k).breakpoints();
    for (std::size_t s = 0; s + 1 < b.size(); ++s)
      for (int j = 1; j < factor; ++j) {
        const double xi = b[s] + (b[s + 1] - b[s]) * j / factor;
        auto ins = insert_knot(TensorBasisd(basis.directions()), k, xi);
        cp = ins.transfer * cp;
        VectorX<double> w;
        if (basis.rational()) w = ins.transfer * *basis.weights();
        basis = basis.rational() ? TensorBasisd(ins.basis.directions(), w)
                                 : TensorBasisd(ins.basis.directions());
      }
  }
  if (basis.rational()) cp = basis.weights()->cwiseInverse().asDiagonal() * cp;
  return SpaceTimeMap(std::move(basis), std::move(cp), map.final_time());
}

Mesh::Mesh(SpaceTimeMap map, std::vector<std::vector<double>> breaks)
    : map_(std::move(map)), breaks_(std::move(breaks)) {
  const int d = map_.dim();
  if (static_cast<int>(breaks_.size()) != d + 1)
    throw InvalidArgument("mesh needs one breakpoint list per space-time direction");
  for (int k = 0; k <= d; ++k) {
    const auto& b = breaks_[static_cast<std::size_t>(k)];
    if (b.size() < 2 || b.front() != 0.0 || b.back() != 1.0)
      throw InvalidArgument("mesh breakpoints must run from 0 to 1");
    for (std::size_t i = 1; i < b.size(); ++i)
      if (!(b[i] > b[i - 1])) throw InvalidArgument("mesh breakpoints must increase strictly");
    if (k < d)
      for (double g : map_.spatial_basis().direction(k).breakpoints())
        if (!is_breakpoint(b, g))
          throw InvalidArgument("mesh must resolve every breakpoint of the geometry");
  }
  compute_sizes();
}

long Mesh::n_spatial_elements() const {
  long n = 1;
  for (int k = 0; k < dim(); ++k) n *= spans(k);
  return n;
}

long Mesh::n_elements() const { return n_spatial_elements() * spans(dim()); }

std::vector<int> Mesh::element_index(long element) const {
  if (element < 0 || element >= n_elements()) {
    std::ostringstream os;
    os << "element " << element << " out of range";
    throw InvalidArgument(os.str());
  }
  std::vector<int> m(static_cast<std::size_t>(directions()));
  for (int k = 0; k < directions(); ++k) {
    m[static_cast<std::size_t>(k)] = static_cast<int>(element % spans(k));
    element /= spans(k);
  }
  return m;
}

long Mesh::element_id(const std::vector<int>& index) const {
  long id = 0, stride = 1;
  for (int k = 0; k < directions(); ++k) {
    id += index[static_cast<std::size_t>(k)] * stride;
    stride *= spans(k);
  }
  return id;
}

long Mesh::locate(const Vec& zeta) const {
  std::vector<int> m(static_cast<std::size_t>(directions()));
  for (int k = 0; k < directions(); ++k) {
    const auto& b = breaks(k);
    const double z = zeta(k);
    if (z < -1e-14 || z > 1 + 1e-14) throw InvalidArgument("parametric point outside [0,1]");
    auto it = std::upper_bound(b.begin(), b.end(), z);
    int s = static_cast<int>(it - b.begin()) - 1;
    m[static_cast<std::size_t>(k)] = std::clamp(s, 0, spans(k) - 1);
  }
  return element_id(m);
}

std::pair<Vec, Vec> Mesh::element_box(long element) const {
  const auto m = element_index(element);
  Vec lo(directions()), hi(directions());
  for (int k = 0; k < directions(); ++k) {
    lo(k) = breaks(k)[static_cast<std::size_t>(m[static_cast<std::size_t>(k)])];
    hi(k) = breaks(k)[static_cast<std::size_t>(m[static_cast<std::size_t>(k)] + 1)];
  }
  return {lo, hi};
}

void Mesh::compute_sizes() {
  const int d = dim();
  const int samples = 5;
  double min_hk = std::numeric_limits<double>::infinity();
  double max_ds = 0, max_dt = 0, max_hk = 0;
  double min_dt = std::numeric_limits<double>::infinity();
  const auto& tb = breaks(d);
  for (std::size_t i = 0; i + 1 < tb.size(); ++i) {
    max_dt = std::max(max_dt, map_.final_time() * (tb[i + 1] - tb[i]));
    min_dt = std::min(min_dt, map_.final_time() * (tb[i + 1] - tb[i]));
  }
  double min_ds = std::numeric_limits<double>::infinity();
  for (long es = 0; es < n_spatial_elements(); ++es) {
    const auto [lo, hi] = element_box(es);
    std::vector<Vec> pts;
    int total = 1;
    for (int k = 0; k < d; ++k) total *= samples;
    for (int s = 0; s < total; ++s) {
      Vec z(d);
      int rem = s;
      for (int k = 0; k < d; ++k) {
        z(k) = lo(k) + (hi(k) - lo(k)) * (rem % samples) / (samples - 1.0);
        rem /= samples;
      }
      pts.push_back(map_.eval_spatial(z).x);
    }
    double diam = 0;
    for (std::size_t a = 0; a < pts.size(); ++a)
      for (std::size_t b = a + 1; b < pts.size(); ++b) diam = std::max(diam, (pts[a] - pts[b]).norm());
    max_ds = std::max(max_ds, diam);
    min_ds = std::min(min_ds, diam);
  }
  max_hk = std::sqrt(max_ds * max_ds + max_dt * max_dt);
  min_hk = std::sqrt(min_ds * min_ds + min_dt * min_dt);
  h_S_ = max_ds;
  h_T_ = max_dt;
  h_ = max_hk;
  c_M_ = max_hk / min_hk;
}

Mesh coarse_mesh(const SpaceTimeMap& map) {
  std::vector<std::vector<double>> breaks;
  for (int k = 0; k < map.dim(); ++k) breaks.push_back(map.spatial_basis().direction(k).breakpoints());
  breaks.push_back({0.0, 1.0});
  return Mesh(map, std::move(breaks));
}

Mesh refine(const Mesh& mesh, const std::vector<int>& factors) {
  if (static_cast<int>(factors.size()) != mesh.directions())
    throw InvalidArgument("one refinement factor per direction required");
  std::vector<std::vector<double>> breaks;
  for (int k = 0; k < mesh.directions(); ++k) {
    const int f = factors[static_cast<std::size_t>(k)];
    if (f < 1) throw InvalidArgument("refinement factor must be positive");
    const auto& b = mesh.breaks(k);
    std::vector<double> nb{b.front()};
    for (std::size_t s = 0; s + 1 < b.size(); ++s) {
      for (int j = 1; j < f; ++j) nb.push_back(b[s] + (b[s + 1] - b[s]) * j / f);
      nb.push_back(b[s + 1]);
    }
    breaks.push_back(std::move(nb));
  }
  return Mesh(mesh.map(), std::move(breaks));
}

Mesh refine(const Mesh& mesh, int factor) {
  if (factor < 2) throw InvalidArgument("refinement factor must be at least 2");
  return refine(mesh, std::vector<int>(static_cast<std::size_t>(mesh.directions()), factor));
}

Mesh box_mesh(const std::vector<std::pair<double, double>>& extents, double final_time,
              const std::vector<int>& spatial_spans, int time_spans) {
  const SpaceTimeMap map = SpaceTimeMap::box(extents, final_time);
  std::vector<int> f = spatial_spans;
  if (static_cast<int>(f.size()) != map.dim())
    throw InvalidArgument("one span count per spatial direction required");
  f.push_back(time_spans);
  return refine(coarse_mesh(map), f);
}

Jacobian jacobian(const Mesh& mesh, long element, const Vec& zeta) {
  const int d = mesh.dim();
  if (zeta.size() != d + 1) throw InvalidArgument("space-time point has wrong dimension");
  const auto [lo, hi] = mesh.element_box(element);
  for (int k = 0; k <= d; ++k)
    if (zeta(k) < lo(k) - 1e-12 || zeta(k) > hi(k) + 1e-12) {
      std::ostringstream os;
      os << "point is not inside element " << element;
      throw InvalidArgument(os.str());
    }
  const SpatialEval s = mesh.map().eval_spatial(zeta.head(d));
  const double det_s = s.jac.determinant();
  const double scale = std::pow(std::max(s.jac.cwiseAbs().maxCoeff(), 1e-300), d);
  if (!(std::abs(det_s) > 1e-12 * scale)) {
    std::ostringstream os;
    os << "singular spatial Jacobian in element " << element;
    throw SingularJacobian(element, os.str());
  }
  Jacobian J;
  J.jac = Mat::Zero(d + 1, d + 1);
  J.jac.topLeftCorner(d, d) = s.jac;
  J.jac(d, d) = mesh.map().final_time();
  J.inverse = Mat::Zero(d + 1, d + 1);
  J.inverse.topLeftCorner(d, d) = s.jac.inverse();
  J.inverse(d, d) = 1.0 / mesh.map().final_time();
  J.det = det_s * mesh.map().final_time();
  return J;
}

std::string to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::DisplacementDirichlet: return "displacement";
    case BoundaryTag::Traction: return "traction";
    case BoundaryTag::PressureDirichlet: return "pressure";
    case BoundaryTag::Flux: return "flux";
    case BoundaryTag::Initial: return "initial";
    case BoundaryTag::Final: return "final";
  }
  return "unknown";
}

BoundaryTag boundary_tag_from_string(const std::string& name) {
  for (BoundaryTag t : {BoundaryTag::DisplacementDirichlet, BoundaryTag::Traction,
                        BoundaryTag::PressureDirichlet, BoundaryTag::Flux, BoundaryTag::Initial,
                        BoundaryTag::Final})
    if (to_string(t) == name) return t;
  throw ConfigError("unknown boundary tag '" + name + "'");
}

std::vector<FacetPoint> facet_quadrature(const BoundaryRegion& region, const Mesh& mesh,
                                         int points) {
  const int d = mesh.dim();
  const QuadRuled q = gauss_rule(points);
  const double T = mesh.map().final_time();
  std::vector<FacetPoint> out;

  if (region.is_temporal()) {
    const int side = region.tag == BoundaryTag::Final ? 1 : 0;
    const int tspan = side == 1 ? mesh.spans(d) - 1 : 0;
    for (long es = 0; es < mesh.n_spatial_elements(); ++es) {
      const auto [lo, hi] = mesh.element_box(es);
      int total = 1;
      for (int k = 0; k < d; ++k) total *= points;
      for (int s = 0; s < total; ++s) {
        Vec z(d + 1);
        double w = 1;
        int rem = s;
        for (int k = 0; k < d; ++k) {
          const auto j = static_cast<std::size_t>(rem % points);
          rem /= points;
          z(k) = lo(k) + (hi(k) - lo(k)) * q.points[j];
          w *= (hi(k) - lo(k)) * q.weights[j];
        }
        z(d) = side;
        const SpatialEval e = mesh.map().eval_spatial(z.head(d));
        FacetPoint p;
        p.element = mesh.element_id(es, tspan);
        p.zeta = z;
        p.x = e.x;
        p.t = T * side;
        p.weight = w * std::abs(e.jac.determinant());
        p.normal = Vec::Zero(d + 1);
        p.normal(d) = side == 1 ? 1.0 : -1.0;
        out.push_back(std::move(p));
      }
    }
    return out;
  }

  if (region.direction < 0 || region.direction >= d || (region.side != 0 && region.side != 1)) {
    std::ostringstream os;
    os << "boundary region '" << to_string(region.tag) << "' does not name a facet of the domain";
    throw InvalidArgument(os.str());
  }
  const int k = region.direction;
  const int tangential = d == 2 ? 1 - k : -1;
  if (tangential >= 0) {
    if (!(region.range_hi > region.range_lo) || !is_breakpoint(mesh.breaks(tangential), region.range_lo) ||
        !is_breakpoint(mesh.breaks(tangential), region.range_hi))
      throw InvalidArgument("boundary sub-range must be a union of mesh faces");
  }
  const int nt = tangential >= 0 ? mesh.spans(tangential) : 1;
  for (int ts = 0; ts < mesh.spans(d); ++ts)
    for (int s = 0; s < nt; ++s) {
      std::vector<int> idx(static_cast<std::size_t>(d + 1));
      idx[static_cast<std::size_t>(k)] = region.side == 1 ? mesh.spans(k) - 1 : 0;
      if (tangential >= 0) {
        idx[static_cast<std::size_t>(tangential)] = s;
        const auto& tb = mesh.breaks(tangential);
        const double mid = 0.5 * (tb[static_cast<std::size_t>(s)] + tb[static_cast<std::size_t>(s) + 1]);
        if (mid < region.range_lo || mid > region.range_hi) continue;
      }
      idx[static_cast<std::size_t>(d)] = ts;
      const long el = mesh.element_id(idx);
      const auto [lo, hi] = mesh.element_box(el);
      const int per = tangential >= 0 ? points * points : points;
      for (int a = 0; a < per; ++a) {
        Vec z(d + 1);
        z(k) = region.side;
        const auto jt = static_cast<std::size_t>(a % points);
        const auto jx = static_cast<std::size_t>(a / points);
        z(d) = lo(d) + (hi(d) - lo(d)) * q.points[jt];
        double w = T * (hi(d) - lo(d)) * q.weights[jt];
        if (tangential >= 0) {
          z(tangential) = lo(tangential) + (hi(tangential) - lo(tangential)) * q.points[jx];
          w *= (hi(tangential) - lo(tangential)) * q.weights[jx];
        }
        const SpatialEval e = mesh.map().eval_spatial(z.head(d));
        Vec n = e.jac.inverse().transpose().col(k);
        n *= (region.side == 1 ? 1.0 : -1.0) / n.norm();
        if (tangential >= 0) w *= e.jac.col(tangential).norm();
        FacetPoint p;
        p.element = el;
        p.zeta = z;
        p.x = e.x;
        p.t = T * z(d);
        p.weight = w;
        p.normal = Vec::Zero(d + 1);
        p.normal.head(d) = n;
        out.push_back(std::move(p));
      }
    }
  return out;
}

}  // namespace igst
