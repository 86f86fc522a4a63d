#include "igst/norms.hpp"

#include <Eigen/LU>

#include <cmath>

namespace igst {

namespace {

template <typename Callback>
void for_each_volume_point(const Mesh& mesh, int points, Callback&& cb) {
  const int d = mesh.dim();
  const QuadRuled q = gauss_rule(points);
  const double T = mesh.map().final_time();
  int nqs = 1;
  for (int k = 0; k < d; ++k) nqs *= points;
  for (long es = 0; es < mesh.n_spatial_elements(); ++es) {
    const auto [lo, hi] = mesh.element_box(es);
    for (int s = 0; s < nqs; ++s) {
      Vec zs(d);
      double ws = 1;
      int rem = s;
      for (int k = 0; k < d; ++k) {
        const auto j = static_cast<std::size_t>(rem % points);
        rem /= points;
        zs(k) = lo(k) + (hi(k) - lo(k)) * q.points[j];
        ws *= (hi(k) - lo(k)) * q.weights[j];
      }
      const SpatialEval geo = mesh.map().eval_spatial(zs);
      ws *= std::abs(geo.jac.determinant());
      for (int et = 0; et < mesh.spans(d); ++et) {
        const double tlo = mesh.breaks(d)[static_cast<std::size_t>(et)];
        const double thi = mesh.breaks(d)[static_cast<std::size_t>(et) + 1];
        for (int j = 0; j < points; ++j) {
          EvalPoint p;
          p.element = mesh.element_id(es, et);
          p.zeta.resize(d + 1);
          p.zeta.head(d) = zs;
          p.zeta(d) = tlo + (thi - tlo) * q.points[static_cast<std::size_t>(j)];
          p.x = geo.x;
          p.t = T * p.zeta(d);
          cb(p, ws * T * (thi - tlo) * q.weights[static_cast<std::size_t>(j)]);
        }
      }
    }
  }
}

template <typename Callback>
void for_each_final_point(const Mesh& mesh, int points, Callback&& cb) {
  for (const FacetPoint& f : facet_quadrature(BoundaryRegion::final_time(), mesh, points)) {
    EvalPoint p;
    p.element = f.element;
    p.zeta = f.zeta;
    p.x = f.x;
    p.t = f.t;
    cb(p, f.weight);
  }
}

void require(const Field& f, bool grad, bool dt, bool grad_dt, const char* what) {
  if (!f.eval || (grad && !f.has_grad) || (dt && !f.has_dt) || (grad_dt && !f.has_grad_dt))
    throw InvalidArgument(std::string("field lacks a derivative required by the ") + what);
}

int pick_points(int points) { return points > 0 ? points : 5; }

}  // namespace

Field physical_field(int components, std::function<FieldSample(const Vec& x, double t)> f,
                     bool has_grad, bool has_dt, bool has_grad_dt) {
  Field out;
  out.components = components;
  out.eval = [f = std::move(f)](const EvalPoint& p) { return f(p.x, p.t); };
  out.has_grad = has_grad;
  out.has_dt = has_dt;
  out.has_grad_dt = has_grad_dt;
  return out;
}

Field zero_field(int components, int d) {
  return physical_field(components, [components, d](const Vec&, double) {
    return FieldSample{Eigen::VectorXd::Zero(components), Eigen::MatrixXd::Zero(components, d),
                       Eigen::VectorXd::Zero(components), Eigen::MatrixXd::Zero(components, d)};
  });
}

Field discrete_field(std::shared_ptr<const DiscreteSpace> space, Eigen::VectorXd full_coeffs) {
  if (full_coeffs.size() != space->size())
    throw InvalidArgument("discrete field needs full-length coefficients");
  Field out;
  out.components = space->components();
  auto coeffs = std::make_shared<const Eigen::VectorXd>(std::move(full_coeffs));
  out.eval = [space, coeffs](const EvalPoint& p) {
    return eval_fields(*space, *coeffs, space->mesh().locate(p.zeta), p.zeta);
  };
  return out;
}

Field combine(double alpha, const Field& a, double beta, const Field& b) {
  if (a.components != b.components) throw InvalidArgument("fields have different component counts");
  Field out;
  out.components = a.components;
  out.has_grad = a.has_grad && b.has_grad;
  out.has_dt = a.has_dt && b.has_dt;
  out.has_grad_dt = a.has_grad_dt && b.has_grad_dt;
  out.eval = [alpha, beta, a, b](const EvalPoint& p) {
    const FieldSample x = a.eval(p), y = b.eval(p);
    FieldSample s;
    s.value = alpha * x.value + beta * y.value;
    if (x.grad.size() && y.grad.size()) s.grad = alpha * x.grad + beta * y.grad;
    if (x.dt.size() && y.dt.size()) s.dt = alpha * x.dt + beta * y.dt;
    if (x.grad_dt.size() && y.grad_dt.size()) s.grad_dt = alpha * x.grad_dt + beta * y.grad_dt;
    return s;
  };
  return out;
}

FieldPair combine(double alpha, const FieldPair& a, double beta, const FieldPair& b) {
  return {combine(alpha, a.u, beta, b.u), combine(alpha, a.p, beta, b.p)};
}

FieldSample SolutionField::displacement(const Vec& x, double t) const {
  return eval_fields_at(*space_u, U, x, t);
}

FieldSample SolutionField::pressure(const Vec& x, double t) const {
  return eval_fields_at(*space_p, P, x, t);
}

FieldPair SolutionField::pair() const {
  return {discrete_field(space_u, U), discrete_field(space_p, P)};
}

SolutionField make_solution(std::shared_ptr<const DiscreteSpace> space_u,
                            std::shared_ptr<const DiscreteSpace> space_p, const Eigen::VectorXd& x) {
  const int nu = space_u->n_free(), np = space_p->n_free();
  if (x.size() != nu + np) throw InvalidArgument("solution vector does not match the spaces");
  SolutionField s;
  s.U = space_u->expand(x.head(nu));
  s.P = space_p->expand(x.tail(np));
  s.space_u = std::move(space_u);
  s.space_p = std::move(space_p);
  return s;
}

double HNormTerms::combine(double c0, double h_T) const {
  return std::sqrt(h_T * dt_u_H1 + u_final_H1 + h_T * c0 * dt_p_L2 + c0 * p_final_L2 + grad_p_L2);
}

double HStarTerms::combine(double h_T) const {
  return std::sqrt(dt_u_H1 + (u_H1 + p_L2) / h_T + dt_p_L2 + grad_p_L2);
}

HNormTerms h_norm_terms(const FieldPair& pair, const Mesh& mesh, int points) {
  require(pair.u, true, true, true, "h-norm");
  require(pair.p, true, true, false, "h-norm");
  points = pick_points(points);
  HNormTerms t;
  for_each_volume_point(mesh, points, [&](const EvalPoint& p, double w) {
    const FieldSample u = pair.u.eval(p), q = pair.p.eval(p);
    t.dt_u_H1 += w * (u.dt.squaredNorm() + u.grad_dt.squaredNorm());
    t.dt_p_L2 += w * q.dt.squaredNorm();
    t.grad_p_L2 += w * q.grad.squaredNorm();
  });
  for_each_final_point(mesh, points, [&](const EvalPoint& p, double w) {
    const FieldSample u = pair.u.eval(p), q = pair.p.eval(p);
    t.u_final_H1 += w * (u.value.squaredNorm() + u.grad.squaredNorm());
    t.p_final_L2 += w * q.value.squaredNorm();
  });
  return t;
}

HStarTerms h_star_terms(const FieldPair& pair, const Mesh& mesh, int points) {
  require(pair.u, true, true, true, "h-star norm");
  require(pair.p, true, true, false, "h-star norm");
  points = pick_points(points);
  HStarTerms t;
  for_each_volume_point(mesh, points, [&](const EvalPoint& p, double w) {
    const FieldSample u = pair.u.eval(p), q = pair.p.eval(p);
    t.dt_u_H1 += w * (u.dt.squaredNorm() + u.grad_dt.squaredNorm());
    t.u_H1 += w * (u.value.squaredNorm() + u.grad.squaredNorm());
    t.p_L2 += w * q.value.squaredNorm();
    t.dt_p_L2 += w * q.dt.squaredNorm();
    t.grad_p_L2 += w * q.grad.squaredNorm();
  });
  return t;
}

double h_norm(const FieldPair& pair, double c0, double h_T, const Mesh& mesh, int points) {
  return h_norm_terms(pair, mesh, points).combine(c0, h_T);
}

double h_star_norm(const FieldPair& pair, double h_T, const Mesh& mesh, int points) {
  if (!(h_T > 0)) throw InvalidArgument("h-star norm needs a positive temporal mesh size");
  return h_star_terms(pair, mesh, points).combine(h_T);
}

double l2_norm(const Field& field, const Mesh& mesh, int points) {
  require(field, false, false, false, "L2 norm");
  double s = 0;
  for_each_volume_point(mesh, pick_points(points), [&](const EvalPoint& p, double w) {
    s += w * field.eval(p).value.squaredNorm();
  });
  return std::sqrt(s);
}

std::map<std::string, double> error_norms(const SolutionField& discrete, const FieldPair& exact,
                                          const std::vector<std::string>& which,
                                          const ErrorNormOptions& options) {
  for (const std::string& w : which)
    if (w != "h" && w != "h_star" && w != "L2_u" && w != "L2_p")
      throw InvalidArgument("unknown norm selector '" + w + "'");
  if (!discrete.space_u || !discrete.space_p) throw InvalidArgument("discrete solution has no spaces");
  const FieldPair err = combine(1.0, discrete.pair(), -1.0, exact);
  const Mesh& mesh = discrete.space_u->mesh();
  const double h_T = options.h_T > 0 ? options.h_T : mesh.h_T();
  std::map<std::string, double> out;
  for (const std::string& w : which) {
    if (w == "h") out[w] = h_norm(err, options.c0, h_T, mesh, options.points);
    else if (w == "h_star") out[w] = h_star_norm(err, h_T, mesh, options.points);
    else if (w == "L2_u") out[w] = l2_norm(err.u, mesh, options.points);
    else out[w] = l2_norm(err.p, mesh, options.points);
  }
  return out;
}

}  // namespace igst
