#include "igst/assembly.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cstdlib>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace igst {

void MaterialParams::validate() const {
  if (!(c0 >= 0.0 && c0 <= 1.0)) throw InvalidArgument("c0 must lie in [0,1]");
  if (!(mu > 0.0)) throw InvalidArgument("mu must be positive");
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be non-negative");
  if (!(k > 0.0)) throw InvalidArgument("permeability must be positive");
  if (!(b > 0.0 && b <= 1.0)) throw InvalidArgument("Biot coefficient must lie in (0,1]");
}

Eigen::Vector3d MaterialParams::at(const Vec& x) const {
  if (field) return field(x);
  return {lambda, mu, k};
}

int default_threads() {
  if (const char* env = std::getenv("IGST_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

namespace {

struct SpatialQuad {
  std::vector<Vec> zeta;
  std::vector<Vec> x;
  std::vector<Mat> jinv;
  Eigen::VectorXd weight;  // Gauss weight times |det J_s|
};

struct Context {
  const DiscreteSpace* U = nullptr;
  const DiscreteSpace* P = nullptr;
  int d = 1;
  int points = 2;
  long n_spatial = 0;
  int n_time = 0;
  std::vector<SpatialQuad> sq;
  std::vector<SpatialBlock> su, sp;
  std::vector<TemporalBlock> tu, tp;
  std::vector<Eigen::VectorXd> tweight;  // Gauss weight times T * span length
  std::vector<std::vector<double>> tval;  // physical times
};

struct Local {
  std::vector<int> dofs;
  Eigen::MatrixXd K;
  Eigen::VectorXd F;
};

bool same_mesh(const Mesh& a, const Mesh& b) {
  if (a.directions() != b.directions()) return false;
  for (int k = 0; k < a.directions(); ++k)
    if (a.breaks(k) != b.breaks(k)) return false;
  return a.map().final_time() == b.map().final_time() &&
         a.map().control_points() == b.map().control_points();
}

Context make_context(const DiscreteSpace& U, const DiscreteSpace& P, int points) {
  if (!same_mesh(U.mesh(), P.mesh()))
    throw InvalidArgument("displacement and pressure spaces live on different meshes");
  const Mesh& mesh = U.mesh();
  Context c;
  c.U = &U;
  c.P = &P;
  c.d = mesh.dim();
  c.points = points > 0 ? points
                        : 1 + std::max({U.spatial_degree(), U.temporal_degree(), P.spatial_degree(),
                                        P.temporal_degree()});
  const QuadRuled rule = gauss_rule(c.points);
  c.n_spatial = mesh.n_spatial_elements();
  c.n_time = mesh.spans(c.d);
  int nqs = 1;
  for (int k = 0; k < c.d; ++k) nqs *= c.points;
  for (long es = 0; es < c.n_spatial; ++es) {
    const auto [lo, hi] = mesh.element_box(es);
    SpatialQuad q;
    q.weight.resize(nqs);
    for (int s = 0; s < nqs; ++s) {
      Vec z(c.d);
      double w = 1;
      int rem = s;
      for (int k = 0; k < c.d; ++k) {
        const auto j = static_cast<std::size_t>(rem % c.points);
        rem /= c.points;
        z(k) = lo(k) + (hi(k) - lo(k)) * rule.points[j];
        w *= (hi(k) - lo(k)) * rule.weights[j];
      }
      const SpatialEval e = mesh.map().eval_spatial(z);
      const double det = e.jac.determinant();
      const double scale = std::pow(std::max(e.jac.cwiseAbs().maxCoeff(), 1e-300), c.d);
      if (!(std::abs(det) > 1e-12 * scale)) {
        std::ostringstream os;
        os << "singular spatial Jacobian in element " << es;
        throw SingularJacobian(es, os.str());
      }
      q.zeta.push_back(z);
      q.x.push_back(e.x);
      q.jinv.push_back(e.jac.inverse());
      q.weight(s) = w * std::abs(det);
    }
    c.su.push_back(spatial_block(U, es, q.zeta, q.jinv));
    c.sp.push_back(spatial_block(P, es, q.zeta, q.jinv));
    c.sq.push_back(std::move(q));
  }
  const double T = mesh.map().final_time();
  const auto& tb = mesh.breaks(c.d);
  for (int et = 0; et < c.n_time; ++et) {
    const double lo = tb[static_cast<std::size_t>(et)], hi = tb[static_cast<std::size_t>(et) + 1];
    std::vector<double> z;
    Eigen::VectorXd w(c.points);
    std::vector<double> t;
    for (int j = 0; j < c.points; ++j) {
      z.push_back(lo + (hi - lo) * rule.points[static_cast<std::size_t>(j)]);
      t.push_back(T * z.back());
      w(j) = T * (hi - lo) * rule.weights[static_cast<std::size_t>(j)];
    }
    c.tu.push_back(temporal_block(U, et, z));
    c.tp.push_back(temporal_block(P, et, z));
    c.tweight.push_back(w);
    c.tval.push_back(std::move(t));
  }
  return c;
}

std::vector<int> local_dofs(const Context& c, long es, int et) {
  const DiscreteSpace& U = *c.U;
  const DiscreteSpace& P = *c.P;
  const SpatialBlock& su = c.su[static_cast<std::size_t>(es)];
  const SpatialBlock& sp = c.sp[static_cast<std::size_t>(es)];
  const TemporalBlock& tu = c.tu[static_cast<std::size_t>(et)];
  const TemporalBlock& tp = c.tp[static_cast<std::size_t>(et)];
  std::vector<int> dofs;
  for (int comp = 0; comp < U.components(); ++comp)
    for (int b : tu.index)
      for (int a : su.index) dofs.push_back(U.free_index(U.dof(comp, a, b)));
  const int nu = U.n_free();
  for (int b : tp.index)
    for (int a : sp.index) {
      const int f = P.free_index(P.dof(0, a, b));
      dofs.push_back(f < 0 ? -1 : nu + f);
    }
  return dofs;
}

// For each function j of `cols`, the functions of `rows` whose supports
// overlap it with positive measure.
std::vector<std::vector<int>> overlaps(const KnotVectord& rows, const KnotVectord& cols) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(cols.size()));
  for (int j = 0; j < cols.size(); ++j) {
    const auto [a, b] = cols.support(j);
    for (int i = 0; i < rows.size(); ++i) {
      const auto [c, e] = rows.support(i);
      if (std::min(b, e) - std::max(a, c) > 1e-14) out[static_cast<std::size_t>(j)].push_back(i);
    }
  }
  return out;
}

Eigen::SparseMatrix<double> build_pattern(const DiscreteSpace& U, const DiscreteSpace& P) {
  const int D = U.mesh().directions();
  const int n = U.n_free() + P.n_free();
  const DiscreteSpace* spaces[2] = {&U, &P};
  const int offset[2] = {0, U.n_free()};
  // ov[row][col][k]
  std::vector<std::vector<std::vector<std::vector<std::vector<int>>>>> ov(2);
  for (int r = 0; r < 2; ++r) {
    ov[static_cast<std::size_t>(r)].resize(2);
    for (int cs = 0; cs < 2; ++cs)
      for (int k = 0; k < D; ++k)
        ov[static_cast<std::size_t>(r)][static_cast<std::size_t>(cs)].push_back(
            overlaps(spaces[r]->knots(k), spaces[cs]->knots(k)));
  }
  std::vector<int> outer{0};
  std::vector<int> inner;
  outer.reserve(static_cast<std::size_t>(n) + 1);
  for (int cs = 0; cs < 2; ++cs) {
    const DiscreteSpace& C = *spaces[cs];
    for (int full : C.free_to_full()) {
      int rem = full % C.scalar_size();
      std::vector<int> jidx(static_cast<std::size_t>(D));
      for (int k = 0; k < D; ++k) {
        jidx[static_cast<std::size_t>(k)] = rem % C.knots(k).size();
        rem /= C.knots(k).size();
      }
      for (int r = 0; r < 2; ++r) {
        const DiscreteSpace& R = *spaces[r];
        const auto& o = ov[static_cast<std::size_t>(r)][static_cast<std::size_t>(cs)];
        const auto& ot = o[static_cast<std::size_t>(D - 1)][static_cast<std::size_t>(jidx.back())];
        const auto& o0 = o[0][static_cast<std::size_t>(jidx[0])];
        static const std::vector<int> single{0};
        const auto& o1 = D == 3 ? o[1][static_cast<std::size_t>(jidx[1])] : single;
        const int n0 = R.knots(0).size();
        for (int comp = 0; comp < R.components(); ++comp)
          for (int it : ot)
            for (int i1 : o1)
              for (int i0 : o0) {
                const int f = R.free_index(R.dof(comp, i0 + n0 * i1, it));
                if (f >= 0) inner.push_back(offset[r] + f);
              }
      }
      outer.push_back(static_cast<int>(inner.size()));
    }
  }
  std::vector<double> values(inner.size(), 0.0);
  Eigen::Map<const Eigen::SparseMatrix<double>> m(n, n, static_cast<Eigen::Index>(inner.size()),
                                                  outer.data(), inner.data(), values.data());
  return Eigen::SparseMatrix<double>(m);
}

template <typename Kernel>
void run_elements(const Context& c, Eigen::SparseMatrix<double>& A, Eigen::VectorXd* rhs,
                  bool reverse, int threads, const Kernel& kernel) {
  const long ne = c.n_spatial * c.n_time;
  std::vector<long> order(static_cast<std::size_t>(ne));
  for (long e = 0; e < ne; ++e) order[static_cast<std::size_t>(e)] = reverse ? ne - 1 - e : e;
  if (threads <= 0) threads = default_threads();

  const int* outer = A.outerIndexPtr();
  const int* inner = A.innerIndexPtr();
  double* values = A.valuePtr();
  auto scatter = [&](const Local& L) {
    const auto nl = L.dofs.size();
    for (std::size_t j = 0; j < nl; ++j) {
      const int J = L.dofs[j];
      if (J < 0) continue;
      if (rhs) (*rhs)(J) += L.F(static_cast<Eigen::Index>(j));
      const int* b = inner + outer[J];
      const int* e = inner + outer[J + 1];
      for (std::size_t i = 0; i < nl; ++i) {
        const int I = L.dofs[i];
        if (I < 0) continue;
        const int* pos = std::lower_bound(b, e, I);
        values[pos - inner] += L.K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
  };

  std::map<long, Local> pending;
  long next = 0;
  const long chunk = 64L * threads;
  for (long start = 0; start < ne; start += chunk) {
    const long stop = std::min(ne, start + chunk);
    std::vector<Local> batch(static_cast<std::size_t>(stop - start));
    auto work = [&](int tid) {
      for (long i = start + tid; i < stop; i += threads)
        batch[static_cast<std::size_t>(i - start)] = kernel(order[static_cast<std::size_t>(i)]);
    };
    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
      for (auto& th : pool) th.join();
    }
    for (long i = start; i < stop; ++i)
      pending.emplace(order[static_cast<std::size_t>(i)], std::move(batch[static_cast<std::size_t>(i - start)]));
    for (auto it = pending.begin(); it != pending.end() && it->first == next; it = pending.erase(it)) {
      scatter(it->second);
      ++next;
    }
  }
}

void strain_row(int d, int comp, double g0, double g1, double* out) {
  if (d == 1) {
    out[0] = g0;
    return;
  }
  if (comp == 0) {
    out[0] = g0;
    out[1] = 0;
    out[2] = g1;
  } else {
    out[0] = 0;
    out[1] = g1;
    out[2] = g0;
  }
}

Local biot_element(const Context& c, long e, const MaterialParams& mp, const ProblemData& data,
                   double h, unsigned terms) {
  const int d = c.d;
  const long es = e % c.n_spatial;
  const int et = static_cast<int>(e / c.n_spatial);
  const SpatialQuad& q = c.sq[static_cast<std::size_t>(es)];
  const SpatialBlock& su = c.su[static_cast<std::size_t>(es)];
  const SpatialBlock& sp = c.sp[static_cast<std::size_t>(es)];
  const TemporalBlock& tu = c.tu[static_cast<std::size_t>(et)];
  const TemporalBlock& tp = c.tp[static_cast<std::size_t>(et)];
  const Eigen::VectorXd& tw = c.tweight[static_cast<std::size_t>(et)];
  const auto& tv = c.tval[static_cast<std::size_t>(et)];

  const int nsu = static_cast<int>(su.index.size()), ntu = static_cast<int>(tu.index.size());
  const int nsp = static_cast<int>(sp.index.size()), ntp = static_cast<int>(tp.index.size());
  const int nsc = nsu * ntu;
  const int nlu = d * nsc, nlp = nsp * ntp;
  const int nqs = static_cast<int>(q.weight.size()), nqt = static_cast<int>(tw.size());
  const int nq = nqs * nqt;
  const int nv = d == 1 ? 1 : 3;

  Local L;
  L.dofs = local_dofs(c, es, et);
  L.K = Eigen::MatrixXd::Zero(nlu + nlp, nlu + nlp);
  L.F = Eigen::VectorXd::Zero(nlu + nlp);

  Eigen::MatrixXd Et(nq * nv, nlu), Er(nq * nv, nlu), Div(nq, nlu);
  Eigen::MatrixXd Pup(nq, nlp), Pdot(nq, nlp);
  std::vector<Eigen::MatrixXd> GM(static_cast<std::size_t>(d), Eigen::MatrixXd(nq, nlp));
  std::vector<Eigen::MatrixXd> GMup(static_cast<std::size_t>(d), Eigen::MatrixXd(nq, nlp));
  Eigen::VectorXd w(nq), kq(nq);
  std::vector<Eigen::Matrix3d> D(static_cast<std::size_t>(nq));
  Eigen::MatrixXd Nt(nq, nsc);

  for (int qt = 0; qt < nqt; ++qt)
    for (int qs = 0; qs < nqs; ++qs) {
      const int qi = qs + nqs * qt;
      w(qi) = q.weight(qs) * tw(qt);
      const Eigen::Vector3d m = mp.at(q.x[static_cast<std::size_t>(qs)]);
      kq(qi) = m(2);
      Eigen::Matrix3d Dq = Eigen::Matrix3d::Zero();
      if (d == 1) {
        Dq(0, 0) = m(0) + 2 * m(1);
      } else {
        Dq << m(0) + 2 * m(1), m(0), 0, m(0), m(0) + 2 * m(1), 0, 0, 0, m(1);
      }
      D[static_cast<std::size_t>(qi)] = Dq;
      for (int b = 0; b < ntu; ++b)
        for (int a = 0; a < nsu; ++a) {
          const int ab = a + nsu * b;
          const double tval = tu.value(qt, b), tder = tu.deriv(qt, b);
          Nt(qi, ab) = su.value(qs, a) * tder;
          double g[2] = {0, 0}, gt[2] = {0, 0};
          for (int k = 0; k < d; ++k) {
            const double sg = su.grad[static_cast<std::size_t>(k)](qs, a);
            gt[k] = sg * tder;
            g[k] = sg * tval + h * gt[k];
          }
          for (int comp = 0; comp < d; ++comp) {
            const int col = comp * nsc + ab;
            double rt[3], rr[3];
            strain_row(d, comp, gt[0], gt[1], rt);
            strain_row(d, comp, g[0], g[1], rr);
            for (int v = 0; v < nv; ++v) {
              Et(qi * nv + v, col) = rt[v];
              Er(qi * nv + v, col) = rr[v];
            }
            Div(qi, col) = gt[comp];
          }
        }
      for (int b = 0; b < ntp; ++b)
        for (int a = 0; a < nsp; ++a) {
          const int ab = a + nsp * b;
          const double tval = tp.value(qt, b), tder = tp.deriv(qt, b);
          const double s = sp.value(qs, a);
          Pdot(qi, ab) = s * tder;
          Pup(qi, ab) = s * tval + h * s * tder;
          for (int k = 0; k < d; ++k) {
            const double sg = sp.grad[static_cast<std::size_t>(k)](qs, a);
            GM[static_cast<std::size_t>(k)](qi, ab) = sg * tval;
            GMup[static_cast<std::size_t>(k)](qi, ab) = sg * tval + h * sg * tder;
          }
        }
    }

  if (terms & kElastic) {
    Eigen::MatrixXd WEt(nq * nv, nlu);
    for (int qi = 0; qi < nq; ++qi)
      WEt.middleRows(qi * nv, nv) =
          w(qi) * D[static_cast<std::size_t>(qi)].topLeftCorner(nv, nv) * Et.middleRows(qi * nv, nv);
    L.K.topLeftCorner(nlu, nlu).noalias() += WEt.transpose() * Er;
  }
  const Eigen::MatrixXd WPup = w.asDiagonal() * Pup;
  if (terms & kPressureU)
    L.K.topRightCorner(nlu, nlp).noalias() -= mp.b * Div.transpose() * WPup;
  if (terms & kDivergenceP)
    L.K.bottomLeftCorner(nlp, nlu).noalias() += mp.b * WPup.transpose() * Div;
  if ((terms & kStorage) && mp.c0 != 0.0)
    L.K.bottomRightCorner(nlp, nlp).noalias() += mp.c0 * WPup.transpose() * Pdot;
  if (terms & kDiffusion) {
    const Eigen::VectorXd wk = w.cwiseProduct(kq);
    for (int k = 0; k < d; ++k)
      L.K.bottomRightCorner(nlp, nlp).noalias() +=
          (wk.asDiagonal() * GMup[static_cast<std::size_t>(k)]).transpose() * GM[static_cast<std::size_t>(k)];
  }

  if ((terms & kLoadU) && data.f) {
    for (int qt = 0; qt < nqt; ++qt)
      for (int qs = 0; qs < nqs; ++qs) {
        const int qi = qs + nqs * qt;
        const Vec& x = q.x[static_cast<std::size_t>(qs)];
        const double t = tv[static_cast<std::size_t>(qt)];
        Eigen::VectorXd load = data.f(x, t);
        if (data.df) load += h * data.df(x, t);
        if (load.size() != d) throw InvalidArgument("body force has wrong dimension");
        for (int comp = 0; comp < d; ++comp)
          L.F.segment(comp * nsc, nsc) += w(qi) * load(comp) * Nt.row(qi).transpose();
      }
  }
  if ((terms & kLoadP) && data.g) {
    for (int qt = 0; qt < nqt; ++qt)
      for (int qs = 0; qs < nqs; ++qs) {
        const int qi = qs + nqs * qt;
        const double g = data.g(q.x[static_cast<std::size_t>(qs)], tv[static_cast<std::size_t>(qt)]);
        if (g != 0.0) L.F.tail(nlp) += w(qi) * g * Pup.row(qi).transpose();
      }
  }
  return L;
}

// Scalar basis of a space at a single point of an element: values, d/dt.
struct PointValues {
  std::vector<int> spatial, temporal;
  Eigen::VectorXd s;
  Eigen::VectorXd tv, td;
};

PointValues point_values(const DiscreteSpace& S, long element, const Vec& zeta) {
  const Mesh& mesh = S.mesh();
  const int d = mesh.dim();
  const long es = element % mesh.n_spatial_elements();
  const int et = static_cast<int>(element / mesh.n_spatial_elements());
  const SpatialEval geo = mesh.map().eval_spatial(zeta.head(d));
  const SpatialBlock sb = spatial_block(S, es, {Vec(zeta.head(d))}, {Mat(geo.jac.inverse())});
  const TemporalBlock tb = temporal_block(S, et, {zeta(d)});
  return {sb.index, tb.index, sb.value.row(0).transpose(), tb.value.row(0).transpose(),
          tb.deriv.row(0).transpose()};
}

void natural_terms(const Context& c, const MaterialParams&, const ProblemData& data, double h,
                   unsigned terms, Eigen::VectorXd& rhs) {
  const DiscreteSpace& U = *c.U;
  const DiscreteSpace& P = *c.P;
  const int d = c.d;
  for (const BoundaryRegion& r : data.natural) {
    if (r.tag == BoundaryTag::Traction) {
      if (!(terms & kLoadU) || !data.traction) continue;
      for (const FacetPoint& fp : facet_quadrature(r, U.mesh(), c.points)) {
        Eigen::VectorXd tn = data.traction(fp.x, fp.t);
        if (data.dtraction) tn += h * data.dtraction(fp.x, fp.t);
        if (tn.size() != d) throw InvalidArgument("traction has wrong dimension");
        const PointValues pv = point_values(U, fp.element, fp.zeta);
        for (int comp = 0; comp < d; ++comp)
          for (std::size_t b = 0; b < pv.temporal.size(); ++b)
            for (std::size_t a = 0; a < pv.spatial.size(); ++a) {
              const int f = U.free_index(U.dof(comp, pv.spatial[a], pv.temporal[b]));
              if (f < 0) continue;
              rhs(f) += fp.weight * tn(comp) * pv.s(static_cast<Eigen::Index>(a)) *
                        pv.td(static_cast<Eigen::Index>(b));
            }
      }
    } else if (r.tag == BoundaryTag::Flux) {
      if (!(terms & kLoadP) || !data.flux) continue;
      for (const FacetPoint& fp : facet_quadrature(r, P.mesh(), c.points)) {
        const double vf = data.flux(fp.x, fp.t);
        const PointValues pv = point_values(P, fp.element, fp.zeta);
        for (std::size_t b = 0; b < pv.temporal.size(); ++b)
          for (std::size_t a = 0; a < pv.spatial.size(); ++a) {
            const int f = P.free_index(P.dof(0, pv.spatial[a], pv.temporal[b]));
            if (f < 0) continue;
            const auto bi = static_cast<Eigen::Index>(b);
            rhs(U.n_free() + f) += fp.weight * vf * pv.s(static_cast<Eigen::Index>(a)) *
                                   (pv.tv(bi) + h * pv.td(bi));
          }
      }
    } else {
      throw InvalidArgument("region '" + to_string(r.tag) + "' is not a natural boundary condition");
    }
  }
}

}  // namespace

SparseSystem assemble(const MaterialParams& params, const ProblemData& data,
                      const DiscreteSpace& space_u, const DiscreteSpace& space_p, double h_T,
                      const AssemblyOptions& options) {
  params.validate();
  if (space_u.components() != space_u.mesh().dim() || space_p.components() != 1)
    throw InvalidArgument("displacement space must be vector valued, pressure space scalar");
  if (!(h_T > 0)) throw InvalidArgument("temporal mesh size must be positive");
  const Context c = make_context(space_u, space_p, options.quadrature_points);
  const double h = options.upwind_scale * h_T;

  SparseSystem sys;
  sys.n_u = space_u.n_free();
  sys.n_p = space_p.n_free();
  sys.matrix = build_pattern(space_u, space_p);
  sys.rhs = Eigen::VectorXd::Zero(sys.size());
  run_elements(c, sys.matrix, &sys.rhs, options.reverse_order, options.threads,
               [&](long e) { return biot_element(c, e, params, data, h, options.terms); });
  natural_terms(c, params, data, h, options.terms, sys.rhs);
  sys.matrix.prune(0.0, 0.0);
  sys.time_block = time_blocks(space_u, space_p);
  return sys;
}

std::vector<int> time_blocks(const DiscreteSpace& space_u, const DiscreteSpace& space_p) {
  if (space_u.temporal_size() != space_p.temporal_size())
    throw InvalidArgument("spaces must share the temporal discretization");
  std::vector<int> block;
  block.reserve(static_cast<std::size_t>(space_u.n_free() + space_p.n_free()));
  for (const DiscreteSpace* S : {&space_u, &space_p})
    for (int full : S->free_to_full()) block.push_back((full % S->scalar_size()) / S->spatial_size());
  return block;
}

Eigen::SparseMatrix<double> coercivity_gram(const DiscreteSpace& space_u,
                                            const DiscreteSpace& space_p, double c0, double h_T,
                                            int quadrature_points) {
  const Context c = make_context(space_u, space_p, quadrature_points);
  const int d = c.d;
  const int last = c.n_time - 1;
  // Final-time traces of the temporal bases.
  const TemporalBlock tu_end = temporal_block(space_u, last, {1.0});
  const TemporalBlock tp_end = temporal_block(space_p, last, {1.0});

  auto kernel = [&](long e) {
    const long es = e % c.n_spatial;
    const int et = static_cast<int>(e / c.n_spatial);
    const SpatialQuad& q = c.sq[static_cast<std::size_t>(es)];
    const SpatialBlock& su = c.su[static_cast<std::size_t>(es)];
    const SpatialBlock& sp = c.sp[static_cast<std::size_t>(es)];
    const TemporalBlock& tu = c.tu[static_cast<std::size_t>(et)];
    const TemporalBlock& tp = c.tp[static_cast<std::size_t>(et)];
    const Eigen::VectorXd& tw = c.tweight[static_cast<std::size_t>(et)];
    const int nsu = static_cast<int>(su.index.size()), ntu = static_cast<int>(tu.index.size());
    const int nsp = static_cast<int>(sp.index.size()), ntp = static_cast<int>(tp.index.size());
    const int nsc = nsu * ntu, nlu = d * nsc, nlp = nsp * ntp;
    const int nqs = static_cast<int>(q.weight.size()), nqt = static_cast<int>(tw.size());

    Local L;
    L.dofs = local_dofs(c, es, et);
    L.K = Eigen::MatrixXd::Zero(nlu + nlp, nlu + nlp);
    L.F = Eigen::VectorXd::Zero(nlu + nlp);

    // Stacked operator rows: u uses [N_t, grad N_t], p uses [sqrt(c0) M_t, grad M].
    auto tensor_rows = [&](const SpatialBlock& sb, const Eigen::MatrixXd& tval, int qt, int qs,
                           int ns, int nt, Eigen::MatrixXd& out, int row) {
      for (int b = 0; b < nt; ++b)
        for (int a = 0; a < ns; ++a) {
          const int ab = a + ns * b;
          out(row, ab) = sb.value(qs, a) * tval(qt, b);
          for (int k = 0; k < d; ++k)
            out(row + 1 + k, ab) = sb.grad[static_cast<std::size_t>(k)](qs, a) * tval(qt, b);
        }
    };
    const int nr = d + 1;
    Eigen::MatrixXd Bu(nr, nsc), Bp(nr, nlp);
    Eigen::MatrixXd Kuu = Eigen::MatrixXd::Zero(nsc, nsc);
    Eigen::MatrixXd Kpp = Eigen::MatrixXd::Zero(nlp, nlp);
    for (int qt = 0; qt < nqt; ++qt)
      for (int qs = 0; qs < nqs; ++qs) {
        const double w = q.weight(qs) * tw(qt);
        tensor_rows(su, tu.deriv, qt, qs, nsu, ntu, Bu, 0);
        Kuu.noalias() += h_T * w * Bu.transpose() * Bu;
        tensor_rows(sp, tp.deriv, qt, qs, nsp, ntp, Bp, 0);
        Kpp.noalias() += h_T * c0 * w * Bp.row(0).transpose() * Bp.row(0);
        tensor_rows(sp, tp.value, qt, qs, nsp, ntp, Bp, 0);
        Kpp.noalias() += w * Bp.bottomRows(d).transpose() * Bp.bottomRows(d);
      }
    if (et == last) {
      for (int qs = 0; qs < nqs; ++qs) {
        const double w = q.weight(qs);
        tensor_rows(su, tu_end.value, 0, qs, nsu, ntu, Bu, 0);
        Kuu.noalias() += w * Bu.transpose() * Bu;
        tensor_rows(sp, tp_end.value, 0, qs, nsp, ntp, Bp, 0);
        Kpp.noalias() += c0 * w * Bp.row(0).transpose() * Bp.row(0);
      }
    }
    for (int comp = 0; comp < d; ++comp) L.K.block(comp * nsc, comp * nsc, nsc, nsc) = Kuu;
    L.K.bottomRightCorner(nlp, nlp) = Kpp;
    return L;
  };

  Eigen::SparseMatrix<double> N = build_pattern(space_u, space_p);
  run_elements(c, N, nullptr, false, 0, kernel);
  N.prune(0.0, 0.0);
  return N;
}

double check_coercivity(const Eigen::SparseMatrix<double>& S, const Eigen::SparseMatrix<double>& N,
                        int n_samples, std::uint64_t seed) {
  if (S.rows() != N.rows() || S.cols() != N.cols() || S.rows() != S.cols())
    throw InvalidArgument("coercivity check needs square matrices of equal size");
  if (n_samples < 1) throw InvalidArgument("need at least one sample");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd x(S.rows());
  for (int s = 0; s < n_samples; ++s) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
    x.normalize();
    best = std::min(best, x.dot(S * x) / x.dot(N * x));
  }
  return best;
}

double coercivity_constant(const Eigen::SparseMatrix<double>& S, const Eigen::SparseMatrix<double>& N) {
  const Eigen::MatrixXd Sd(S), Nd(N);
  const Eigen::MatrixXd sym = 0.5 * (Sd + Sd.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Nd, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("generalized eigenvalue computation failed");
  return es.eigenvalues().minCoeff();
}

void write_triplets(std::ostream& os, const Eigen::SparseMatrix<double>& A) {
  os << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
  os.precision(17);
  for (int j = 0; j < A.outerSize(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, j); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace igst
