#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <array>
#include <functional>
#include <thread>
#include <vector>

#include "shellfem/fe_space.hpp"
#include "shellfem/geometry.hpp"
#include "shellfem/mesh.hpp"
#include "shellfem/quadrature.hpp"
#include "shellfem/strain.hpp"

namespace shellfem {

using SpMat = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

struct AssemblyConfig {
  double penalty_C = 0.0;  // <= 0 selects the automatic search
  double theta_param = 1.0;
  int quad_tri_degree = 8;
  int quad_edge_points = 5;
  int jobs = 1;
};

/// Rows of the per-point operator block: strains, traces and gradients of
/// the primal fields. Tensor rows are flattened as 2a + b.
namespace row {
constexpr int Rho = 0, Gamma = 4, Tau = 8, Theta = 10, U = 12, W = 14, GradTheta = 15, GradU = 19, GradW = 23;
constexpr int Count = 25;
}  // namespace row

using Ops = Eigen::Matrix<double, row::Count, Eigen::Dynamic>;
using OpsCol = Eigen::Matrix<double, row::Count, 1>;

/// Auxiliary rows: M^{11}, M^{12}, M^{21}, M^{22}, xi^1, xi^2.
using AuxOps = Eigen::Matrix<double, 6, Eigen::Dynamic>;
using AuxCol = Eigen::Matrix<double, 6, 1>;

inline OpsCol ops_from_sample(const FieldSample<double>& f, const GeomCoeffs<double>& g) {
  const auto s = strains(f, g);
  OpsCol o;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      o(row::Rho + 2 * a + b) = s.rho[a][b];
      o(row::Gamma + 2 * a + b) = s.gamma[a][b];
      o(row::GradTheta + 2 * a + b) = f.grad_theta[a][b];
      o(row::GradU + 2 * a + b) = f.grad_u[a][b];
    }
  for (int a = 0; a < 2; ++a) {
    o(row::Tau + a) = s.tau[a];
    o(row::Theta + a) = f.theta[a];
    o(row::U + a) = f.u[a];
    o(row::GradW + a) = f.grad_w[a];
  }
  o(row::W) = f.w;
  return o;
}

/// Operator block of all local primal functions of triangle t at (r, s).
inline Ops basis_ops(const DofLayout& L, const ElementMap& m, int t, double r, double s, const GeomCoeffs<double>& g) {
  const LocalBasis& b = L.basis(t);
  const int n = b.size();
  Ops o(row::Count, n);
  for (int j = 0; j < n; ++j) {
    const auto [field, pi] = L.primal_slot(t, j);
    const Poly p = b.function(pi);
    const double v = p(r, s);
    const auto gr = m.physical_grad(p.grad(r, s));
    FieldSample<double> f;
    if (field < 2) {
      f.theta[field] = v;
      f.grad_theta[field] = {gr[0], gr[1]};
    } else if (field < 4) {
      f.u[field - 2] = v;
      f.grad_u[field - 2] = {gr[0], gr[1]};
    } else {
      f.w = v;
      f.grad_w = {gr[0], gr[1]};
    }
    o.col(j) = ops_from_sample(f, g);
  }
  return o;
}

/// Auxiliary P1 functions of triangle t at (r, s), ordered as DofLayout::aux_dofs.
inline AuxOps aux_basis_ops(double r, double s) {
  const double l[3] = {1.0 - r - s, r, s};
  AuxOps z = AuxOps::Zero(6, 15);
  for (int i = 0; i < 3; ++i) {
    z(0, 5 * i + 0) = l[i];  // M11
    z(3, 5 * i + 1) = l[i];  // M22
    z(1, 5 * i + 2) = l[i];  // M12
    z(2, 5 * i + 2) = l[i];  // M21
    z(4, 5 * i + 3) = l[i];  // xi1
    z(5, 5 * i + 4) = l[i];  // xi2
  }
  return z;
}

/// A primal field that can be sampled on any element: basis combinations,
/// smooth functions, or differences of these.
struct PrimalSource {
  std::function<OpsCol(int t, const ElementMap& m, const Point2& x, double r, double s, const GeometryEval& g)> ops;
};

struct AuxSource {
  std::function<AuxCol(int t, const Point2& x, double r, double s)> values;
};

inline PrimalSource smooth_source(PrimalFunction f) {
  return {[f = std::move(f)](int, const ElementMap&, const Point2& x, double, double, const GeometryEval& g) {
    return ops_from_sample(f(x), coeffs(g));
  }};
}

/// Discrete field with coefficient vector x on layout L.
inline PrimalSource discrete_source(const DofLayout& L, Eigen::VectorXd x) {
  return {[&L, x = std::move(x)](int t, const ElementMap& m, const Point2&, double r, double s,
                                 const GeometryEval& g) {
    return ops_from_sample(eval_primal(L, m, t, x, r, s), coeffs(g));
  }};
}

/// Discrete field living on a coarser mesh; `ancestor[t]` maps each fine
/// triangle to the coarse triangle containing it.
inline PrimalSource coarse_source(const DofLayout& L, const Mesh& coarse, Eigen::VectorXd x, std::vector<int> ancestor) {
  return {[&L, &coarse, x = std::move(x), ancestor = std::move(ancestor)](
              int t, const ElementMap&, const Point2& p, double, double, const GeometryEval& g) {
    const int ct = ancestor[t];
    const ElementMap cm(coarse.corners(ct));
    const auto rs = cm.reference(p);
    return ops_from_sample(eval_primal(L, cm, ct, x, rs[0], rs[1]), coeffs(g));
  }};
}

inline PrimalSource difference(PrimalSource a, PrimalSource b) {
  return {[a = std::move(a), b = std::move(b)](int t, const ElementMap& m, const Point2& x, double r, double s,
                                               const GeometryEval& g) {
    return OpsCol(a.ops(t, m, x, r, s, g) - b.ops(t, m, x, r, s, g));
  }};
}

inline PrimalSource linear_combination(double ca, PrimalSource a, double cb, PrimalSource b) {
  return {[=](int t, const ElementMap& m, const Point2& x, double r, double s, const GeometryEval& g) {
    return OpsCol(ca * a.ops(t, m, x, r, s, g) + cb * b.ops(t, m, x, r, s, g));
  }};
}

/// Smooth auxiliary field (M^{11}, M^{22}, M^{12}, xi^1, xi^2) as a function of x.
inline AuxSource smooth_aux(std::function<std::array<double, 5>(const Point2&)> f) {
  return {[f = std::move(f)](int, const Point2& x, double, double) {
    const auto v = f(x);
    AuxCol c;
    c << v[0], v[2], v[2], v[1], v[3], v[4];
    return c;
  }};
}

inline AuxSource discrete_aux(const DofLayout& L, Eigen::VectorXd x) {
  return {[&L, x = std::move(x)](int t, const Point2&, double r, double s) {
    const auto d = L.aux_dofs(t);
    Eigen::Matrix<double, 15, 1> c;
    for (int k = 0; k < 15; ++k) c(k) = x(d[k]);
    return AuxCol(aux_basis_ops(r, s) * c);
  }};
}

/// Names of the assembled pieces. The penalty parts carry unit constant.
enum Form { R0, Rp, G0, Gp, T0, Tp, Qrho, Qgam, Qtau, QH, NumForms };

/// Material data shared by every kernel at one point.
struct PointCoeffs {
  Eigen::Matrix4d A;      // elastic tensor, rows/cols flattened 2a + b
  Eigen::Matrix4d Comp;   // compliance tensor
  Eigen::Matrix2d acon, acov, bmix;
  double kmu = 0.0, sqrt_a = 1.0;
};

inline PointCoeffs point_coeffs(const GeometryEval& g, const Material& mat) {
  const auto e = elastic_tensor(g.a_con, mat);
  const auto c = compliance_tensor(g.a_cov, mat);
  PointCoeffs p;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      for (int cc = 0; cc < 2; ++cc)
        for (int d = 0; d < 2; ++d) {
          p.A(2 * a + b, 2 * cc + d) = e[a][b][cc][d];
          p.Comp(2 * a + b, 2 * cc + d) = c[a][b][cc][d];
        }
      p.acon(a, b) = g.a_con[a][b];
      p.acov(a, b) = g.a_cov[a][b];
      p.bmix(a, b) = g.b_mix[a][b];
    }
  p.kmu = mat.kappa * mat.mu;
  p.sqrt_a = g.sqrt_a;
  return p;
}

using LocalSet = std::array<Eigen::MatrixXd, NumForms>;

inline LocalSet zero_set(int nx, int ny) {
  LocalSet s;
  for (auto& m : s) m = Eigen::MatrixXd::Zero(nx, ny);
  return s;
}

/// Volume contributions X^T W Y at one quadrature point with parameter
/// weight w.
template <class MX, class MY>
void volume_kernel(const MX& X, const MY& Y, const PointCoeffs& p, double w, LocalSet& out) {
  const double ws = w * p.sqrt_a;
  const auto rx = X.template middleRows<4>(row::Rho), ry = Y.template middleRows<4>(row::Rho);
  const auto gx = X.template middleRows<4>(row::Gamma), gy = Y.template middleRows<4>(row::Gamma);
  const auto tx = X.template middleRows<2>(row::Tau), ty = Y.template middleRows<2>(row::Tau);
  out[R0].noalias() += (ws / 3.0) * rx.transpose() * (p.A * ry);
  out[G0].noalias() += ws * gx.transpose() * (p.A * gy);
  out[T0].noalias() += (ws * p.kmu) * tx.transpose() * (p.acon * ty);
  out[Qrho].noalias() += w * rx.transpose() * ry;
  out[Qgam].noalias() += w * gx.transpose() * gy;
  out[Qtau].noalias() += w * tx.transpose() * ty;
  out[QH].noalias() += w * X.template bottomRows<15>().transpose() * Y.template bottomRows<15>();
}

/// Per-edge-point operator rows built from the two side blocks.
struct EdgeOps {
  Eigen::MatrixXd SR;  // (1/3) {A rho}, 4 rows
  Eigen::MatrixXd SG;  // {A gamma}, 4 rows
  Eigen::MatrixXd ST;  // {kappa mu a^{ab} tau_b}, 2 rows
  Eigen::MatrixXd Jth, Ju, Jw;
};

/// side1 may have zero columns' worth of content (boundary edges): pass an
/// empty matrix and `interior = false`.
template <class M1, class M2>
EdgeOps edge_ops(const M1& s0, const M2& s1, bool interior, const PointCoeffs& p) {
  EdgeOps e;
  const double h = interior ? 0.5 : 1.0;
  auto avg = [&](int r0, int n) -> Eigen::MatrixXd {
    Eigen::MatrixXd v = s0.middleRows(r0, n);
    if (interior) v += s1.middleRows(r0, n);
    return h * v;
  };
  auto jump = [&](int r0, int n) -> Eigen::MatrixXd {
    Eigen::MatrixXd v = s0.middleRows(r0, n);
    if (interior) v -= s1.middleRows(r0, n);
    return v;
  };
  e.SR = (p.A * avg(row::Rho, 4)) / 3.0;
  e.SG = p.A * avg(row::Gamma, 4);
  e.ST = p.kmu * (p.acon * avg(row::Tau, 2));
  e.Jth = jump(row::Theta, 2);
  e.Ju = jump(row::U, 2);
  e.Jw = jump(row::W, 1);
  return e;
}

/// Which edge terms are active: theta terms (interior, D), displacement
/// terms (interior, D, S).
struct EdgeMask {
  bool theta = true;
  bool disp = true;
};

inline EdgeMask edge_mask(Tag t) {
  switch (t) {
    case Tag::Interior:
    case Tag::D: return {true, true};
    case Tag::S: return {false, true};
    default: return {false, false};
  }
}

/// Contracts stress rows with the normal: out_a = sum_b S^{ab} n_b.
inline Eigen::MatrixXd contract_normal(const Eigen::MatrixXd& S, const Point2& n) {
  Eigen::MatrixXd r(2, S.cols());
  for (int a = 0; a < 2; ++a) r.row(a) = S.row(2 * a) * n[0] + S.row(2 * a + 1) * n[1];
  return r;
}

/// Edge contributions at one point. wc: consistency weight (ds * sqrt a),
/// wp: penalty weight (ds / h_e).
inline void edge_kernel(const EdgeOps& X, const EdgeOps& Y, const PointCoeffs& p, const Point2& n, EdgeMask mask,
                        double wc, double wp, LocalSet& out) {
  auto sym = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& c,
                const Eigen::MatrixXd& d) -> Eigen::MatrixXd { return a.transpose() * b + c.transpose() * d; };
  if (mask.theta) {
    const Eigen::MatrixXd cx = contract_normal(X.SR, n), cy = contract_normal(Y.SR, n);
    out[R0] -= wc * sym(cx, Y.Jth, X.Jth, cy);
    out[Rp] += wp * X.Jth.transpose() * Y.Jth;
    out[Qrho] += wp * X.Jth.transpose() * Y.Jth;
    out[QH] += wp * X.Jth.transpose() * Y.Jth;
  }
  if (mask.disp) {
    // (S^{ab} n_b) b^d_a, indexed by d
    const Eigen::MatrixXd cx = p.bmix * contract_normal(X.SR, n), cy = p.bmix * contract_normal(Y.SR, n);
    out[R0] += wc * sym(cx, Y.Ju, X.Ju, cy);
    const Eigen::MatrixXd gx = contract_normal(X.SG, n), gy = contract_normal(Y.SG, n);
    out[G0] -= wc * sym(gx, Y.Ju, X.Ju, gy);
    const Eigen::MatrixXd tx = X.ST.row(0) * n[0] + X.ST.row(1) * n[1];
    const Eigen::MatrixXd ty = Y.ST.row(0) * n[0] + Y.ST.row(1) * n[1];
    out[T0] -= wc * sym(tx, Y.Jw, X.Jw, ty);
    const Eigen::MatrixXd uu = X.Ju.transpose() * Y.Ju, ww = X.Jw.transpose() * Y.Jw;
    out[Gp] += wp * (uu + ww);
    out[Tp] += wp * ww;
    out[Qgam] += wp * uu;
    out[Qtau] += wp * ww;
    out[QH] += wp * (uu + ww);
  }
}

/// Mixed-form contributions: b_h (aux rows x primal cols) and c_h.
template <class MY>
void b_volume_kernel(const AuxOps& Z, const MY& Y, const PointCoeffs& p, double w, Eigen::MatrixXd& B) {
  const double ws = w * p.sqrt_a;
  B.noalias() += ws * (Z.topRows(4).transpose() * Y.template middleRows<4>(row::Gamma) +
                       Z.bottomRows(2).transpose() * Y.template middleRows<2>(row::Tau));
}

inline void b_edge_kernel(const AuxOps& Z, const EdgeOps& Y, const Point2& n, double wc, Eigen::MatrixXd& B) {
  // M^{ab} [v_a] n_b + xi^a [z] n_a
  Eigen::MatrixXd mn(2, Z.cols());
  for (int a = 0; a < 2; ++a) mn.row(a) = Z.row(2 * a) * n[0] + Z.row(2 * a + 1) * n[1];
  const Eigen::MatrixXd xn = Z.row(4) * n[0] + Z.row(5) * n[1];
  B.noalias() -= wc * (mn.transpose() * Y.Ju + xn.transpose() * Y.Jw);
}

inline void c_kernel(const AuxOps& Z, const AuxOps& Z2, const PointCoeffs& p, double w, Eigen::MatrixXd& C) {
  const double ws = w * p.sqrt_a;
  C.noalias() += ws * (Z.topRows(4).transpose() * p.Comp * Z2.topRows(4) +
                       (1.0 / p.kmu) * Z.bottomRows(2).transpose() * p.acov * Z2.bottomRows(2));
}

/// Every assembled piece over the full layout. B holds b_h at (aux row,
/// primal col); the same matrix and its transpose enter both rows of the
/// mixed system.
struct FormMatrices {
  std::array<SpMat, NumForms> m;
  SpMat B, C;
  int n = 0;

  const SpMat& operator[](Form f) const { return m[f]; }
};

namespace detail {

/// Runs compute(i) for i in [0, n) on `jobs` threads in chunks and merges
/// each result with merge(i, result) in index order, so the merged output
/// does not depend on the thread count.
template <class Result, class Compute, class Merge>
void ordered_parallel(int n, int jobs, Compute compute, Merge merge) {
  const int chunk = 64;
  std::vector<Result> buf(chunk);
  for (int start = 0; start < n; start += chunk) {
    const int end = std::min(n, start + chunk);
    const int cnt = end - start;
    if (jobs <= 1 || cnt == 1) {
      for (int i = start; i < end; ++i) buf[i - start] = compute(i);
    } else {
      std::vector<std::thread> th;
      const int nj = std::min(jobs, cnt);
      for (int j = 0; j < nj; ++j)
        th.emplace_back([&, j] {
          for (int i = start + j; i < end; i += nj) buf[i - start] = compute(i);
        });
      for (auto& x : th) x.join();
    }
    for (int i = start; i < end; ++i) merge(i, buf[i - start]);
  }
}

inline void scatter(Triplets& trip, const std::vector<int>& rows, const std::vector<int>& cols,
                    const Eigen::MatrixXd& K) {
  for (int i = 0; i < K.rows(); ++i)
    for (int j = 0; j < K.cols(); ++j)
      if (K(i, j) != 0.0) trip.emplace_back(rows[i], cols[j], K(i, j));
}

inline Point2 lerp(const Point2& a, const Point2& b, double t) {
  return {a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
}

}  // namespace detail

/// Shared context for all drivers.
struct Discretization {
  const Mesh& mesh;
  const SurfaceChart& chart;
  const Material& mat;
  const DofLayout& layout;
  AssemblyConfig cfg;
};

/// Assembles every bilinear form over the layout.
inline FormMatrices assemble_forms(const Discretization& d) {
  const Mesh& mesh = d.mesh;
  const DofLayout& L = d.layout;
  const TriangleRule tq = triangle_rule(d.cfg.quad_tri_degree);
  const GaussRule eq = gauss_legendre(d.cfg.quad_edge_points);
  const bool aux = L.has_aux();

  std::array<Triplets, NumForms> trip;
  Triplets tb, tc;

  struct ElemOut {
    LocalSet s;
    Eigen::MatrixXd B, C;
  };
  auto elem = [&](int t) {
    const ElementMap m(mesh.corners(t));
    const int n = L.basis(t).size();
    ElemOut o{zero_set(n, n), Eigen::MatrixXd::Zero(aux ? 15 : 0, n), Eigen::MatrixXd::Zero(aux ? 15 : 0, aux ? 15 : 0)};
    for (std::size_t k = 0; k < tq.points.size(); ++k) {
      const double r = tq.points[k][0], s = tq.points[k][1];
      const GeometryEval g = eval_geometry(d.chart, m.map(r, s));
      const PointCoeffs pc = point_coeffs(g, d.mat);
      const double w = tq.weights[k] * std::abs(m.det);
      const Ops X = basis_ops(L, m, t, r, s, coeffs(g));
      volume_kernel(X, X, pc, w, o.s);
      if (aux) {
        const AuxOps Z = aux_basis_ops(r, s);
        b_volume_kernel(Z, X, pc, w, o.B);
        c_kernel(Z, Z, pc, w, o.C);
      }
    }
    return o;
  };
  auto elem_merge = [&](int t, const ElemOut& o) {
    const auto dofs = L.primal_dofs(t);
    for (int f = 0; f < NumForms; ++f) detail::scatter(trip[f], dofs, dofs, o.s[f]);
    if (aux) {
      const auto a = L.aux_dofs(t);
      const std::vector<int> av(a.begin(), a.end());
      detail::scatter(tb, av, dofs, o.B);
      detail::scatter(tc, av, av, o.C);
    }
  };
  detail::ordered_parallel<ElemOut>(mesh.num_triangles(), d.cfg.jobs, elem, elem_merge);

  struct EdgeOut {
    LocalSet s;
    Eigen::MatrixXd B;
  };
  auto edge = [&](int e) {
    const Edge& ed = mesh.edges()[e];
    const bool interior = ed.interior();
    const int t0 = ed.tri[0], t1 = ed.tri[1];
    const int n0 = L.basis(t0).size(), n1 = interior ? L.basis(t1).size() : 0, n = n0 + n1;
    EdgeOut o{zero_set(n, n), Eigen::MatrixXd::Zero(aux ? 15 : 0, n)};
    const EdgeMask mask = edge_mask(ed.tag);
    if (!mask.theta && !mask.disp) return o;
    const EdgeGeometry eg = mesh.edge_geometry(e, 0);
    const ElementMap m0(mesh.corners(t0));
    const ElementMap m1 = interior ? ElementMap(mesh.corners(t1)) : ElementMap();
    const Point2& pa = mesh.vertices()[ed.v[0]];
    const Point2& pb = mesh.vertices()[ed.v[1]];
    for (std::size_t k = 0; k < eq.nodes.size(); ++k) {
      const Point2 x = detail::lerp(pa, pb, eq.nodes[k]);
      const GeometryEval g = eval_geometry(d.chart, x);
      const PointCoeffs pc = point_coeffs(g, d.mat);
      const auto gc = coeffs(g);
      const double ds = eq.weights[k] * ed.length;
      const auto rs0 = m0.reference(x);
      Ops S0 = Ops::Zero(row::Count, n), S1 = Ops::Zero(row::Count, n);
      S0.leftCols(n0) = basis_ops(L, m0, t0, rs0[0], rs0[1], gc);
      if (interior) {
        const auto rs1 = m1.reference(x);
        S1.rightCols(n1) = basis_ops(L, m1, t1, rs1[0], rs1[1], gc);
      }
      const EdgeOps E = edge_ops(S0, S1, interior, pc);
      edge_kernel(E, E, pc, eg.nbar, mask, ds * g.sqrt_a, ds / ed.length, o.s);
      if (aux && mask.disp) b_edge_kernel(aux_basis_ops(rs0[0], rs0[1]), E, eg.nbar, ds * g.sqrt_a, o.B);
    }
    return o;
  };
  auto edge_merge = [&](int e, const EdgeOut& o) {
    const Edge& ed = mesh.edges()[e];
    std::vector<int> dofs = L.primal_dofs(ed.tri[0]);
    if (ed.interior()) {
      const auto d1 = L.primal_dofs(ed.tri[1]);
      dofs.insert(dofs.end(), d1.begin(), d1.end());
    }
    for (int f = 0; f < NumForms; ++f) detail::scatter(trip[f], dofs, dofs, o.s[f]);
    if (aux) {
      const auto a = L.aux_dofs(ed.tri[0]);
      detail::scatter(tb, std::vector<int>(a.begin(), a.end()), dofs, o.B);
    }
  };
  detail::ordered_parallel<EdgeOut>(int(mesh.edges().size()), d.cfg.jobs, edge, edge_merge);

  FormMatrices F;
  F.n = L.size();
  for (int f = 0; f < NumForms; ++f) {
    F.m[f].resize(F.n, F.n);
    F.m[f].setFromTriplets(trip[f].begin(), trip[f].end());
  }
  F.B.resize(F.n, F.n);
  F.B.setFromTriplets(tb.begin(), tb.end());
  F.C.resize(F.n, F.n);
  F.C.setFromTriplets(tc.begin(), tc.end());
  return F;
}

/// Values of every form at (X, Y); mixed pieces use the aux sources when
/// given. Both sources are sampled on the same mesh.
struct FormValues {
  std::array<double, NumForms> v{};
  double b = 0.0;  // b_h(Z; Y)
  double c = 0.0;  // c_h(Z; Z2)
  double operator[](Form f) const { return v[f]; }
};

inline FormValues evaluate_forms(const Discretization& d, const PrimalSource& X, const PrimalSource& Y,
                                 const AuxSource* Z = nullptr, const AuxSource* Z2 = nullptr) {
  const Mesh& mesh = d.mesh;
  const TriangleRule tq = triangle_rule(d.cfg.quad_tri_degree);
  const GaussRule eq = gauss_legendre(d.cfg.quad_edge_points);
  FormValues out;
  LocalSet acc = zero_set(1, 1);
  Eigen::MatrixXd Bv = Eigen::MatrixXd::Zero(1, 1), Cv = Eigen::MatrixXd::Zero(1, 1);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementMap m(mesh.corners(t));
    for (std::size_t k = 0; k < tq.points.size(); ++k) {
      const double r = tq.points[k][0], s = tq.points[k][1];
      const Point2 x = m.map(r, s);
      const GeometryEval g = eval_geometry(d.chart, x);
      const PointCoeffs pc = point_coeffs(g, d.mat);
      const double w = tq.weights[k] * std::abs(m.det);
      const OpsCol ox = X.ops(t, m, x, r, s, g), oy = Y.ops(t, m, x, r, s, g);
      volume_kernel(ox, oy, pc, w, acc);
      if (Z) {
        const AuxOps z = Z->values(t, x, r, s);
        b_volume_kernel(z, oy, pc, w, Bv);
        if (Z2) c_kernel(z, Z2->values(t, x, r, s), pc, w, Cv);
      }
    }
  }
  for (int e = 0; e < int(mesh.edges().size()); ++e) {
    const Edge& ed = mesh.edges()[e];
    const EdgeMask mask = edge_mask(ed.tag);
    if (!mask.theta && !mask.disp) continue;
    const bool interior = ed.interior();
    const EdgeGeometry eg = mesh.edge_geometry(e, 0);
    const ElementMap m0(mesh.corners(ed.tri[0]));
    const ElementMap m1 = interior ? ElementMap(mesh.corners(ed.tri[1])) : ElementMap();
    const Point2& pa = mesh.vertices()[ed.v[0]];
    const Point2& pb = mesh.vertices()[ed.v[1]];
    for (std::size_t k = 0; k < eq.nodes.size(); ++k) {
      const Point2 x = detail::lerp(pa, pb, eq.nodes[k]);
      const GeometryEval g = eval_geometry(d.chart, x);
      const PointCoeffs pc = point_coeffs(g, d.mat);
      const double ds = eq.weights[k] * ed.length;
      const auto rs0 = m0.reference(x);
      OpsCol x0 = X.ops(ed.tri[0], m0, x, rs0[0], rs0[1], g), y0 = Y.ops(ed.tri[0], m0, x, rs0[0], rs0[1], g);
      OpsCol x1 = OpsCol::Zero(), y1 = OpsCol::Zero();
      if (interior) {
        const auto rs1 = m1.reference(x);
        x1 = X.ops(ed.tri[1], m1, x, rs1[0], rs1[1], g);
        y1 = Y.ops(ed.tri[1], m1, x, rs1[0], rs1[1], g);
      }
      const EdgeOps EX = edge_ops(x0, x1, interior, pc), EY = edge_ops(y0, y1, interior, pc);
      edge_kernel(EX, EY, pc, eg.nbar, mask, ds * g.sqrt_a, ds / ed.length, acc);
      if (Z && mask.disp) b_edge_kernel(Z->values(ed.tri[0], x, rs0[0], rs0[1]), EY, eg.nbar, ds * g.sqrt_a, Bv);
    }
  }
  for (int f = 0; f < NumForms; ++f) out.v[f] = acc[f](0, 0);
  out.b = Bv(0, 0);
  out.c = Cv(0, 0);
  return out;
}

/// Vectors form(psi_i, Y) over all primal test functions psi_i, plus
/// b_h(Z; psi_i) when Z is given. Entries are indexed by the full layout.
struct FormVectors {
  std::array<Eigen::VectorXd, NumForms> v;
  Eigen::VectorXd b;  // b_h(Z; psi_i)
};

inline FormVectors apply_forms(const Discretization& d, const PrimalSource& Y, const AuxSource* Z = nullptr) {
  const Mesh& mesh = d.mesh;
  const DofLayout& L = d.layout;
  const TriangleRule tq = triangle_rule(d.cfg.quad_tri_degree);
  const GaussRule eq = gauss_legendre(d.cfg.quad_edge_points);
  FormVectors out;
  for (auto& v : out.v) v = Eigen::VectorXd::Zero(L.size());
  out.b = Eigen::VectorXd::Zero(L.size());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementMap m(mesh.corners(t));
    const int n = L.basis(t).size();
    LocalSet acc = zero_set(n, 1);
    Eigen::MatrixXd bz = Eigen::MatrixXd::Zero(n, 1);
    for (std::size_t k = 0; k < tq.points.size(); ++k) {
      const double r = tq.points[k][0], s = tq.points[k][1];
      const Point2 x = m.map(r, s);
      const GeometryEval g = eval_geometry(d.chart, x);
      const PointCoeffs pc = point_coeffs(g, d.mat);
      const double w = tq.weights[k] * std::abs(m.det);
      const Ops X = basis_ops(L, m, t, r, s, coeffs(g));
      volume_kernel(X, Y.ops(t, m, x, r, s, g), pc, w, acc);
      if (Z) {
        Eigen::MatrixXd bt = Eigen::MatrixXd::Zero(1, n);
        const AuxOps z = Z->values(t, x, r, s);
        b_volume_kernel(z, X, pc, w, bt);
        bz += bt.transpose();
      }
    }
    const auto dofs = L.primal_dofs(t);
    for (int j = 0; j < n; ++j) {
      for (int f = 0; f < NumForms; ++f) out.v[f](dofs[j]) += acc[f](j, 0);
      out.b(dofs[j]) += bz(j, 0);
    }
  }
  for (int e = 0; e < int(mesh.edges().size()); ++e) {
    const Edge& ed = mesh.edges()[e];
    const EdgeMask mask = edge_mask(ed.tag);
    if (!mask.theta && !mask.disp) continue;
    const bool interior = ed.interior();
    const int t0 = ed.tri[0], t1 = ed.tri[1];
    const int n0 = L.basis(t0).size(), n1 = interior ? L.basis(t1).size() : 0, n = n0 + n1;
    const EdgeGeometry eg = mesh.edge_geometry(e, 0);
    const ElementMap m0(mesh.corners(t0));
    const ElementMap m1 = interior ? ElementMap(mesh.corners(t1)) : ElementMap();
    const Point2& pa = mesh.vertices()[ed.v[0]];
    const Point2& pb = mesh.vertices()[ed.v[1]];
    LocalSet acc = zero_set(n, 1);
    Eigen::MatrixXd bz = Eigen::MatrixXd::Zero(n, 1);
    for (std::size_t k = 0; k < eq.nodes.size(); ++k) {
      const Point2 x = detail::lerp(pa, pb, eq.nodes[k]);
      const GeometryEval g = eval_geometry(d.chart, x);
      const PointCoeffs pc = point_coeffs(g, d.mat);
      const auto gc = coeffs(g);
      const double ds = eq.weights[k] * ed.length;
      const auto rs0 = m0.reference(x);
      Ops S0 = Ops::Zero(row::Count, n), S1 = Ops::Zero(row::Count, n);
      S0.leftCols(n0) = basis_ops(L, m0, t0, rs0[0], rs0[1], gc);
      OpsCol y0 = Y.ops(t0, m0, x, rs0[0], rs0[1], g), y1 = OpsCol::Zero();
      if (interior) {
        const auto rs1 = m1.reference(x);
        S1.rightCols(n1) = basis_ops(L, m1, t1, rs1[0], rs1[1], gc);
        y1 = Y.ops(t1, m1, x, rs1[0], rs1[1], g);
      }
      const EdgeOps EX = edge_ops(S0, S1, interior, pc), EY = edge_ops(y0, y1, interior, pc);
      edge_kernel(EX, EY, pc, eg.nbar, mask, ds * g.sqrt_a, ds / ed.length, acc);
      if (Z && mask.disp) {
        Eigen::MatrixXd bt = Eigen::MatrixXd::Zero(1, n);
        b_edge_kernel(Z->values(t0, x, rs0[0], rs0[1]), EX, eg.nbar, ds * g.sqrt_a, bt);
        bz += bt.transpose();
      }
    }
    std::vector<int> dofs = L.primal_dofs(t0);
    if (interior) {
      const auto d1 = L.primal_dofs(t1);
      dofs.insert(dofs.end(), d1.begin(), d1.end());
    }
    for (int j = 0; j < n; ++j) {
      for (int f = 0; f < NumForms; ++f) out.v[f](dofs[j]) += acc[f](j, 0);
      out.b(dofs[j]) += bz(j, 0);
    }
  }
  return out;
}

/// Load functional. Densities pair with (theta1, theta2, u1, u2, w).
/// volume: per unit surface area. boundary: per unit parameter length on an
/// edge with the given tag, outward parameter normal and tangent.
struct LoadFunctional {
  std::function<std::array<double, 5>(const Point2& x, const GeometryEval& g)> volume;
  std::function<std::array<double, 5>(const Point2& x, const GeometryEval& g, Tag tag, const Point2& nbar,
                                      const Point2& tangent)>
      boundary;
};

inline Eigen::VectorXd assemble_load(const Discretization& d, const LoadFunctional& f) {
  const Mesh& mesh = d.mesh;
  const DofLayout& L = d.layout;
  const TriangleRule tq = triangle_rule(d.cfg.quad_tri_degree);
  const GaussRule eq = gauss_legendre(d.cfg.quad_edge_points);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(L.size());
  auto add = [&](int t, const ElementMap& m, double r, double s, const GeomCoeffs<double>& gc,
                 const std::array<double, 5>& dens, double w) {
    const Ops X = basis_ops(L, m, t, r, s, gc);
    const auto dofs = L.primal_dofs(t);
    Eigen::Matrix<double, 5, 1> v;
    for (int i = 0; i < 5; ++i) v(i) = dens[i];
    const Eigen::VectorXd c = w * X.middleRows<5>(row::Theta).transpose() * v;
    for (int j = 0; j < int(dofs.size()); ++j) rhs(dofs[j]) += c(j);
  };
  if (f.volume)
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const ElementMap m(mesh.corners(t));
      for (std::size_t k = 0; k < tq.points.size(); ++k) {
        const double r = tq.points[k][0], s = tq.points[k][1];
        const Point2 x = m.map(r, s);
        const GeometryEval g = eval_geometry(d.chart, x);
        add(t, m, r, s, coeffs(g), f.volume(x, g), tq.weights[k] * std::abs(m.det) * g.sqrt_a);
      }
    }
  if (f.boundary)
    for (int e : mesh.boundary_edges()) {
      const Edge& ed = mesh.edges()[e];
      const EdgeGeometry eg = mesh.edge_geometry(e, 0);
      const ElementMap m(mesh.corners(ed.tri[0]));
      for (std::size_t k = 0; k < eq.nodes.size(); ++k) {
        const Point2 x = detail::lerp(mesh.vertices()[ed.v[0]], mesh.vertices()[ed.v[1]], eq.nodes[k]);
        const GeometryEval g = eval_geometry(d.chart, x);
        const auto rs = m.reference(x);
        add(ed.tri[0], m, rs[0], rs[1], coeffs(g), f.boundary(x, g, ed.tag, eg.nbar, eg.tangent),
            eq.weights[k] * ed.length);
      }
    }
  return rhs;
}

/// Arc-length factor of the surface curve along parameter direction t.
inline double arc_factor(const GeometryEval& g, const Point2& t) {
  double s = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) s += g.a_cov[a][b] * t[a] * t[b];
  return std::sqrt(s);
}

enum class EdgeIntegrand { ScalarArclength, VectorNormal };

struct EdgeSample {
  Point2 x;
  double weight;
};

/// Quadrature on the surface image of the straight parameter edge [a, b].
/// ScalarArclength weights integrate f over the curved edge; VectorNormal
/// weights integrate f^a n_a once paired with the constant parameter normal.
inline std::vector<EdgeSample> quadrature_edge_transform(const Point2& a, const Point2& b, const SurfaceChart& chart,
                                                         EdgeIntegrand kind, int points = 5) {
  const GaussRule q = gauss_legendre(points);
  const double len = Mesh::dist(a, b);
  const Point2 t{(b[0] - a[0]) / len, (b[1] - a[1]) / len};
  std::vector<EdgeSample> out;
  for (std::size_t k = 0; k < q.nodes.size(); ++k) {
    const Point2 x = detail::lerp(a, b, q.nodes[k]);
    const GeometryEval g = eval_geometry(chart, x);
    const double f = kind == EdgeIntegrand::ScalarArclength ? arc_factor(g, t) : g.sqrt_a;
    out.push_back({x, q.weights[k] * len * f});
  }
  return out;
}

/// |volume integral of f^a|_a - boundary integral of f^a nbar_a sqrt(a)| on
/// one triangle, with the module's quadrature. f is given by its
/// contravariant components as expressions in x1, x2.
inline double green_identity_check(const std::array<Point2, 3>& tri, const SurfaceChart& chart,
                                   const std::array<Expression, 2>& f, int tri_degree = 8, int edge_points = 5) {
  const ElementMap m(tri);
  const TriangleRule tq = triangle_rule(tri_degree);
  std::array<std::array<Expression, 2>, 2> df;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) df[a][b] = f[a].derivative(b);
  double vol = 0.0;
  for (std::size_t k = 0; k < tq.points.size(); ++k) {
    const Point2 x = m.map(tq.points[k][0], tq.points[k][1]);
    const GeometryEval g = eval_geometry(chart, x);
    const double fv[2] = {f[0](x[0], x[1]), f[1](x[0], x[1])};
    double div = df[0][0](x[0], x[1]) + df[1][1](x[0], x[1]);
    for (int a = 0; a < 2; ++a)
      for (int d = 0; d < 2; ++d) div += g.christoffel[a][a][d] * fv[d];
    vol += tq.weights[k] * std::abs(m.det) * g.sqrt_a * div;
  }
  double bnd = 0.0;
  const double sign = m.det > 0 ? 1.0 : -1.0;
  for (int i = 0; i < 3; ++i) {
    const Point2 a = tri[i], b = tri[(i + 1) % 3];
    const double len = Mesh::dist(a, b);
    const Point2 n{sign * (b[1] - a[1]) / len, -sign * (b[0] - a[0]) / len};
    for (const auto& s : quadrature_edge_transform(a, b, chart, EdgeIntegrand::VectorNormal, edge_points))
      bnd += s.weight * (f[0](s.x[0], s.x[1]) * n[0] + f[1](s.x[0], s.x[1]) * n[1]);
  }
  return std::abs(vol - bnd);
}

}  // namespace shellfem
