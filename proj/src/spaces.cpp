#include "igst/spaces.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <sstream>

namespace igst {

namespace {

bool supports_overlap(const KnotVectord& kv, int i, double lo, double hi) {
  const auto [a, b] = kv.support(i);
  return std::min(b, hi) - std::max(a, lo) > 1e-14;
}

struct PointBasis {
  std::vector<BasisDerivatives<double>> dirs;  // one per direction, order 1
};

PointBasis point_basis(const DiscreteSpace& space, const std::vector<int>& element_index,
                       const Vec& zeta, int directions) {
  PointBasis pb;
  for (int k = 0; k < directions; ++k) {
    const int span = space.knot_span(k, element_index[static_cast<std::size_t>(k)]);
    pb.dirs.push_back(eval_basis_derivs_in_span(space.knots(k), span, zeta(k), 1));
  }
  return pb;
}

// Local tensor basis of the spatial directions: values and parametric gradients.
void spatial_tensor(const DiscreteSpace& space, const PointBasis& pb, int d, std::vector<int>& index,
                    Eigen::VectorXd& value, Eigen::MatrixXd& pgrad) {
  int ns = 1;
  for (int k = 0; k < d; ++k) ns *= space.knots(k).degree() + 1;
  index.resize(static_cast<std::size_t>(ns));
  value.resize(ns);
  pgrad.resize(d, ns);
  for (int a = 0; a < ns; ++a) {
    int rem = a, lin = 0, stride = 1;
    double v = 1;
    std::vector<int> loc(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
      const int w = space.knots(k).degree() + 1;
      loc[static_cast<std::size_t>(k)] = rem % w;
      rem /= w;
      lin += (pb.dirs[static_cast<std::size_t>(k)].first + loc[static_cast<std::size_t>(k)]) * stride;
      stride *= space.knots(k).size();
      v *= pb.dirs[static_cast<std::size_t>(k)].ders(0, loc[static_cast<std::size_t>(k)]);
    }
    index[static_cast<std::size_t>(a)] = lin;
    value(a) = v;
    for (int g = 0; g < d; ++g) {
      double p = 1;
      for (int k = 0; k < d; ++k)
        p *= pb.dirs[static_cast<std::size_t>(k)].ders(k == g ? 1 : 0, loc[static_cast<std::size_t>(k)]);
      pgrad(g, a) = p;
    }
  }
}

}  // namespace

Eigen::VectorXd DiscreteSpace::expand(const Eigen::VectorXd& free) const {
  if (free.size() != n_free()) throw InvalidArgument("free coefficient vector has wrong length");
  Eigen::VectorXd full = Eigen::VectorXd::Zero(size());
  for (int i = 0; i < n_free(); ++i) full(free_to_full_[static_cast<std::size_t>(i)]) = free(i);
  return full;
}

Eigen::VectorXd DiscreteSpace::restrict_to_free(const Eigen::VectorXd& full) const {
  if (full.size() != size()) throw InvalidArgument("coefficient vector has wrong length");
  Eigen::VectorXd free(n_free());
  for (int i = 0; i < n_free(); ++i) free(i) = full(free_to_full_[static_cast<std::size_t>(i)]);
  return free;
}

DiscreteSpace build_space(const Mesh& mesh, int spatial_degree, int temporal_degree, int components,
                          const std::vector<BoundaryRegion>& dirichlet, int spatial_continuity,
                          int temporal_continuity) {
  if (spatial_degree < 1 || temporal_degree < 1)
    throw InvalidArgument("spline degrees must be at least 1");
  if (components < 1) throw InvalidArgument("a space needs at least one component");
  const int d = mesh.dim();
  DiscreteSpace s;
  s.mesh_ = mesh;
  s.components_ = components;
  s.spatial_degree_ = spatial_degree;
  s.temporal_degree_ = temporal_degree;
  const int cs = spatial_continuity < 0 ? spatial_degree - 1 : spatial_continuity;
  const int ct = temporal_continuity < 0 ? temporal_degree - 1 : temporal_continuity;
  for (int k = 0; k < d; ++k)
    s.knots_.push_back(KnotVectord::from_breakpoints(mesh.breaks(k), spatial_degree, cs));
  s.knots_.push_back(KnotVectord::from_breakpoints(mesh.breaks(d), temporal_degree, ct));
  s.spatial_size_ = 1;
  for (int k = 0; k < d; ++k) s.spatial_size_ *= s.knots_[static_cast<std::size_t>(k)].size();

  for (int k = 0; k <= d; ++k) {
    const auto& kv = s.knots_[static_cast<std::size_t>(k)];
    std::vector<int> spans;
    for (int e = 0; e < mesh.spans(k); ++e) {
      const double z = mesh.breaks(k)[static_cast<std::size_t>(e)];
      const auto it = std::upper_bound(kv.knots().begin(), kv.knots().end(), z);
      spans.push_back(static_cast<int>(it - kv.knots().begin()) - 1);
    }
    s.knot_span_.push_back(std::move(spans));
  }

  std::vector<char> fixed(static_cast<std::size_t>(s.size()), 0);
  const int nt = s.temporal_size();
  for (const BoundaryRegion& r : dirichlet) {
    switch (r.tag) {
      case BoundaryTag::Initial:
        for (int c = 0; c < components; ++c)
          if (r.components >> c & 1u)
            for (int a = 0; a < s.spatial_size_; ++a) fixed[static_cast<std::size_t>(s.dof(c, a, 0))] = 1;
        break;
      case BoundaryTag::DisplacementDirichlet:
      case BoundaryTag::PressureDirichlet: {
        if (r.direction < 0 || r.direction >= d || (r.side != 0 && r.side != 1))
          throw InvalidArgument("Dirichlet region does not name a spatial facet");
        for (int a = 0; a < s.spatial_size_; ++a) {
          int rem = a;
          bool on = true;
          for (int k = 0; k < d; ++k) {
            const auto& kv = s.knots_[static_cast<std::size_t>(k)];
            const int i = rem % kv.size();
            rem /= kv.size();
            if (k == r.direction)
              on = on && i == (r.side == 1 ? kv.size() - 1 : 0);
            else
              on = on && supports_overlap(kv, i, r.range_lo, r.range_hi);
          }
          if (!on) continue;
          for (int c = 0; c < components; ++c)
            if (r.components >> c & 1u)
              for (int b = 0; b < nt; ++b) fixed[static_cast<std::size_t>(s.dof(c, a, b))] = 1;
        }
        break;
      }
      default:
        throw InvalidArgument("region '" + to_string(r.tag) + "' is not an essential condition");
    }
  }
  s.full_to_free_.assign(static_cast<std::size_t>(s.size()), -1);
  for (int i = 0; i < s.size(); ++i)
    if (!fixed[static_cast<std::size_t>(i)]) {
      s.full_to_free_[static_cast<std::size_t>(i)] = static_cast<int>(s.free_to_full_.size());
      s.free_to_full_.push_back(i);
    }
  return s;
}

namespace {

FieldSample eval_full(const DiscreteSpace& space, const Eigen::VectorXd& full, long element,
                      const Vec& zeta) {
  const Mesh& mesh = space.mesh();
  const int d = mesh.dim();
  if (zeta.size() != d + 1) throw InvalidArgument("space-time point has wrong dimension");
  const auto [lo, hi] = mesh.element_box(element);
  for (int k = 0; k <= d; ++k)
    if (zeta(k) < lo(k) - 1e-12 || zeta(k) > hi(k) + 1e-12) {
      std::ostringstream os;
      os << "point does not lie in element " << element;
      throw InvalidArgument(os.str());
    }
  const auto idx = mesh.element_index(element);
  const PointBasis pb = point_basis(space, idx, zeta, d + 1);
  std::vector<int> sidx;
  Eigen::VectorXd sval;
  Eigen::MatrixXd pgrad;
  spatial_tensor(space, pb, d, sidx, sval, pgrad);
  const SpatialEval geo = mesh.map().eval_spatial(zeta.head(d));
  const Eigen::MatrixXd xgrad = Eigen::MatrixXd(geo.jac.inverse().transpose()) * pgrad;
  const auto& tb = pb.dirs[static_cast<std::size_t>(d)];
  const double T = mesh.map().final_time();

  const int nc = space.components();
  FieldSample out{Eigen::VectorXd::Zero(nc), Eigen::MatrixXd::Zero(nc, d), Eigen::VectorXd::Zero(nc),
                  Eigen::MatrixXd::Zero(nc, d)};
  for (int c = 0; c < nc; ++c)
    for (int b = 0; b < tb.ders.cols(); ++b) {
      const double tv = tb.ders(0, b), td = tb.ders(1, b) / T;
      for (std::size_t a = 0; a < sidx.size(); ++a) {
        const double coef = full(space.dof(c, sidx[a], tb.first + b));
        if (coef == 0.0) continue;
        const auto ai = static_cast<Eigen::Index>(a);
        out.value(c) += coef * sval(ai) * tv;
        out.dt(c) += coef * sval(ai) * td;
        out.grad.row(c) += coef * tv * xgrad.col(ai).transpose();
        out.grad_dt.row(c) += coef * td * xgrad.col(ai).transpose();
      }
    }
  return out;
}

}  // namespace

FieldSample eval_fields(const DiscreteSpace& space, const Eigen::VectorXd& coeffs, long element,
                        const Vec& zeta) {
  if (coeffs.size() == space.size()) return eval_full(space, coeffs, element, zeta);
  if (coeffs.size() == space.n_free()) return eval_full(space, space.expand(coeffs), element, zeta);
  throw InvalidArgument("coefficient vector does not match the space");
}

FieldSample eval_fields_at(const DiscreteSpace& space, const Eigen::VectorXd& coeffs, const Vec& x,
                           double t) {
  const Mesh& mesh = space.mesh();
  const int d = mesh.dim();
  const double T = mesh.map().final_time();
  if (t < -1e-14 * T || t > T * (1 + 1e-14)) throw InvalidArgument("time outside [0,T]");
  Vec zeta(d + 1);
  zeta.head(d) = mesh.map().invert(x);
  zeta(d) = std::clamp(t / T, 0.0, 1.0);
  return eval_fields(space, coeffs, mesh.locate(zeta), zeta);
}

SpatialBlock spatial_block(const DiscreteSpace& space, long spatial_element,
                           const std::vector<Vec>& zeta, const std::vector<Mat>& jinv) {
  const Mesh& mesh = space.mesh();
  const int d = mesh.dim();
  const auto idx = mesh.element_index(spatial_element);
  SpatialBlock blk;
  const auto nq = static_cast<Eigen::Index>(zeta.size());
  for (std::size_t q = 0; q < zeta.size(); ++q) {
    const PointBasis pb = point_basis(space, idx, zeta[q], d);
    std::vector<int> sidx;
    Eigen::VectorXd sval;
    Eigen::MatrixXd pgrad;
    spatial_tensor(space, pb, d, sidx, sval, pgrad);
    if (q == 0) {
      blk.index = sidx;
      blk.value.resize(nq, sval.size());
      blk.grad.assign(static_cast<std::size_t>(d), Eigen::MatrixXd(nq, sval.size()));
    }
    const auto qi = static_cast<Eigen::Index>(q);
    blk.value.row(qi) = sval.transpose();
    const Eigen::MatrixXd xg = Eigen::MatrixXd(jinv[q].transpose()) * pgrad;
    for (int k = 0; k < d; ++k) blk.grad[static_cast<std::size_t>(k)].row(qi) = xg.row(k);
  }
  return blk;
}

TemporalBlock temporal_block(const DiscreteSpace& space, int time_span,
                             const std::vector<double>& zeta_t) {
  const int d = space.mesh().dim();
  const auto& kv = space.knots(d);
  const int span = space.knot_span(d, time_span);
  const double T = space.mesh().map().final_time();
  TemporalBlock blk;
  const int r = kv.degree();
  blk.value.resize(static_cast<Eigen::Index>(zeta_t.size()), r + 1);
  blk.deriv.resize(static_cast<Eigen::Index>(zeta_t.size()), r + 1);
  for (std::size_t q = 0; q < zeta_t.size(); ++q) {
    const auto bd = eval_basis_derivs_in_span(kv, span, zeta_t[q], 1);
    if (q == 0)
      for (int b = 0; b <= r; ++b) blk.index.push_back(bd.first + b);
    blk.value.row(static_cast<Eigen::Index>(q)) = bd.ders.row(0);
    blk.deriv.row(static_cast<Eigen::Index>(q)) = bd.ders.row(1) / T;
  }
  return blk;
}

Eigen::VectorXd greville_interpolate(const DiscreteSpace& space, const SpaceTimeFunction& f) {
  const Mesh& mesh = space.mesh();
  const int d = mesh.dim();
  const int D = d + 1;
  std::vector<std::vector<double>> g(static_cast<std::size_t>(D));
  std::vector<Eigen::FullPivLU<Eigen::MatrixXd>> lu;
  std::vector<int> n(static_cast<std::size_t>(D));
  for (int k = 0; k < D; ++k) {
    const auto& kv = space.knots(k);
    g[static_cast<std::size_t>(k)] = kv.greville();
    n[static_cast<std::size_t>(k)] = kv.size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(kv.size(), kv.size());
    for (int i = 0; i < kv.size(); ++i) {
      const auto bv = eval_basis(kv, g[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]);
      for (int j = 0; j < bv.values.size(); ++j) A(i, bv.first + j) = bv.values(j);
    }
    lu.emplace_back(A);
    if (!lu.back().isInvertible()) throw InvalidArgument("singular Greville collocation matrix");
  }
  const int total = space.scalar_size();
  const int nc = space.components();
  Eigen::MatrixXd F(total, nc);

  std::vector<Vec> xs(static_cast<std::size_t>(space.spatial_size()));
  for (int a = 0; a < space.spatial_size(); ++a) {
    Vec z(d);
    int rem = a;
    for (int k = 0; k < d; ++k) {
      z(k) = g[static_cast<std::size_t>(k)][static_cast<std::size_t>(rem % n[static_cast<std::size_t>(k)])];
      rem /= n[static_cast<std::size_t>(k)];
    }
    xs[static_cast<std::size_t>(a)] = mesh.map().eval_spatial(z).x;
  }
  const double T = mesh.map().final_time();
  for (int b = 0; b < space.temporal_size(); ++b) {
    const double t = T * g[static_cast<std::size_t>(d)][static_cast<std::size_t>(b)];
    for (int a = 0; a < space.spatial_size(); ++a) {
      const Eigen::VectorXd v = f(xs[static_cast<std::size_t>(a)], t);
      if (v.size() != nc) throw InvalidArgument("interpolated function has wrong component count");
      F.row(a + space.spatial_size() * b) = v.transpose();
    }
  }

  // Apply the inverse collocation matrix along each axis in turn.
  int inner = 1;
  for (int k = 0; k < D; ++k) {
    const int nk = n[static_cast<std::size_t>(k)];
    const int outer = total / (inner * nk);
    Eigen::MatrixXd fiber(nk, nc);
    for (int o = 0; o < outer; ++o)
      for (int i = 0; i < inner; ++i) {
        for (int j = 0; j < nk; ++j) fiber.row(j) = F.row(i + inner * (j + nk * o));
        const Eigen::MatrixXd sol = lu[static_cast<std::size_t>(k)].solve(fiber);
        for (int j = 0; j < nk; ++j) F.row(i + inner * (j + nk * o)) = sol.row(j);
      }
    inner *= nk;
  }

  Eigen::VectorXd coeffs(space.size());
  for (int c = 0; c < nc; ++c) coeffs.segment(c * total, total) = F.col(c);
  for (int i = 0; i < space.size(); ++i)
    if (space.constrained(i)) coeffs(i) = 0.0;
  return coeffs;
}

}  // namespace igst
