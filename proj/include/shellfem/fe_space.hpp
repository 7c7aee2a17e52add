#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <string>
#include <vector>

#include "shellfem/error.hpp"
#include "shellfem/geometry.hpp"
#include "shellfem/mesh.hpp"
#include "shellfem/polynomial.hpp"
#include "shellfem/quadrature.hpp"
#include "shellfem/strain.hpp"

namespace shellfem {

/// Affine map from the reference triangle (r, s) onto mesh triangle t.
struct ElementMap {
  std::array<Point2, 3> c{};
  double jac[2][2]{};  // dx_a / d(r, s)_b
  double inv[2][2]{};  // d(r, s)_a / dx_b
  double det = 0.0;    // twice the area

  ElementMap() = default;
  explicit ElementMap(const std::array<Point2, 3>& corners) : c(corners) {
    jac[0][0] = c[1][0] - c[0][0];
    jac[0][1] = c[2][0] - c[0][0];
    jac[1][0] = c[1][1] - c[0][1];
    jac[1][1] = c[2][1] - c[0][1];
    det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    inv[0][0] = jac[1][1] / det;
    inv[0][1] = -jac[0][1] / det;
    inv[1][0] = -jac[1][0] / det;
    inv[1][1] = jac[0][0] / det;
  }

  Point2 map(double r, double s) const {
    return {c[0][0] + jac[0][0] * r + jac[0][1] * s, c[0][1] + jac[1][0] * r + jac[1][1] * s};
  }

  std::array<double, 2> reference(const Point2& x) const {
    const double dx = x[0] - c[0][0], dy = x[1] - c[0][1];
    return {inv[0][0] * dx + inv[0][1] * dy, inv[1][0] * dx + inv[1][1] * dy};
  }

  /// Converts a reference gradient to parameter-coordinate partials.
  std::array<double, 2> physical_grad(const std::array<double, 2>& g) const {
    return {g[0] * inv[0][0] + g[1] * inv[1][0], g[0] * inv[0][1] + g[1] * inv[1][1]};
  }
};

enum class ElementKind { P1, Pe, Pv, P2, P3 };

inline const char* kind_name(ElementKind k) {
  static constexpr const char* names[] = {"P1", "Pe", "Pv", "P2", "P3"};
  return names[int(k)];
}

/// Local space of one element. The nodal P1 functions are the barycentric
/// coordinates; `enrich` holds the added displacement functions, each
/// orthogonal to P1 with the sqrt(a) weight.
struct LocalBasis {
  ElementKind kind = ElementKind::P1;
  std::vector<Poly> enrich;
  std::vector<int> free_edges;  // local edge indices tagged F

  int size_theta() const { return 3; }
  int size_disp() const { return 3 + int(enrich.size()); }
  /// All local functions: theta (2 x 3) then u1, u2, w (3 x size_disp()).
  int size() const { return 6 + 3 * size_disp(); }

  Poly function(int j) const { return j < 3 ? Poly::lambda(j) : enrich[j - 3]; }
};

struct SpaceOptions {
  bool enrichment = true;   // enrich displacement on free-boundary elements
  bool full_spaces = false;  // use full P2 / P3 instead of the minimal enrichments
  int quad_degree = 8;
};

namespace detail {

/// Weighted integrals over an element, computed on the reference triangle.
struct WeightedRule {
  std::vector<std::array<double, 2>> ref;
  std::vector<double> w;  // includes |det J| and sqrt(a)
};

inline WeightedRule weighted_rule(const ElementMap& m, const SurfaceChart& chart, int degree) {
  const TriangleRule q = triangle_rule(degree);
  WeightedRule r;
  r.ref = q.points;
  r.w.resize(q.weights.size());
  for (std::size_t k = 0; k < q.points.size(); ++k) {
    const GeometryEval g = eval_geometry(chart, m.map(q.points[k][0], q.points[k][1]));
    r.w[k] = q.weights[k] * std::abs(m.det) * g.sqrt_a;
  }
  return r;
}

/// Returns mult * p + base with p in P1 chosen so the result is orthogonal to
/// P1 under the weighted rule.
inline Poly orthogonalize(const Poly& mult, const Poly& base, const WeightedRule& q) {
  Eigen::Matrix3d G = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  std::array<Poly, 3> lam{Poly::lambda(0), Poly::lambda(1), Poly::lambda(2)};
  for (std::size_t k = 0; k < q.w.size(); ++k) {
    const double r = q.ref[k][0], s = q.ref[k][1];
    const double mv = mult(r, s), bv = base(r, s);
    double l[3];
    for (int i = 0; i < 3; ++i) l[i] = lam[i](r, s);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) G(j, i) += q.w[k] * mv * l[i] * l[j];
      rhs(i) -= q.w[k] * bv * l[i];
    }
  }
  Eigen::FullPivLU<Eigen::Matrix3d> lu(G);
  if (!lu.isInvertible()) throw Error("singular local Gram matrix in enrichment construction");
  const Eigen::Vector3d a = lu.solve(rhs);
  Poly p;
  for (int i = 0; i < 3; ++i) p += a(i) * lam[i];
  return mult * p + base;
}

}  // namespace detail

/// Builds the local space of triangle t. With enrichment off every element is
/// P1.
inline LocalBasis build_local_basis(const Mesh& mesh, int t, const SurfaceChart& chart, const SpaceOptions& opt) {
  LocalBasis b;
  for (int i = 0; i < 3; ++i)
    if (mesh.edges()[mesh.triangle_edges(t)[i]].tag == Tag::F) b.free_edges.push_back(i);
  if (b.free_edges.size() == 3)
    throw ConfigError("triangle " + std::to_string(t) + " has three free edges; unsupported configuration");
  if (!opt.enrichment || b.free_edges.empty()) return b;

  const ElementMap m(mesh.corners(t));
  // at least degree 16 so the sqrt(a) weight is integrated to round-off
  const auto q = detail::weighted_rule(m, chart, std::max(opt.quad_degree, 16));
  const Poly one = Poly::constant(1.0);
  std::array<Poly, 3> lam{Poly::lambda(0), Poly::lambda(1), Poly::lambda(2)};

  if (opt.full_spaces) {
    // Full P2 or P3: the degree-2 (and 3) Bernstein-type products, made
    // orthogonal to P1.
    std::vector<Poly> extra{lam[1] * lam[2], lam[0] * lam[2], lam[0] * lam[1]};
    b.kind = ElementKind::P2;
    if (b.free_edges.size() == 2) {
      b.kind = ElementKind::P3;
      extra.push_back(lam[0] * lam[1] * lam[2]);
      extra.push_back(lam[0] * lam[0] * lam[1]);
      extra.push_back(lam[1] * lam[1] * lam[2]);
      extra.push_back(lam[2] * lam[2] * lam[0]);
    }
    for (const Poly& e : extra) b.enrich.push_back(detail::orthogonalize(one, e, q));
    return b;
  }

  if (b.free_edges.size() == 1) {
    // Free edge e1 is local edge f; l1 vanishes on it, l2 is the next one.
    b.kind = ElementKind::Pe;
    const int f = b.free_edges[0];
    const Poly& l1 = lam[f];
    const Poly& l2 = lam[(f + 1) % 3];
    b.enrich.push_back(detail::orthogonalize(l1, one, q));
    b.enrich.push_back(detail::orthogonalize(l1, l2, q));
  } else {
    // Free edges e2, e3; the remaining edge is e1.
    b.kind = ElementKind::Pv;
    int k = 0;
    while (k == b.free_edges[0] || k == b.free_edges[1]) ++k;
    const Poly& l2 = lam[(k + 1) % 3];
    const Poly& l3 = lam[(k + 2) % 3];
    const Poly m23 = l2 * l3;
    b.enrich.push_back(detail::orthogonalize(m23, l3, q));
    b.enrich.push_back(detail::orthogonalize(m23, l3 * l3, q));
    b.enrich.push_back(detail::orthogonalize(m23, l2, q));
    b.enrich.push_back(detail::orthogonalize(m23, l2 * l2, q));
  }
  return b;
}

/// Field slots of the primal unknowns.
enum Field { Theta1 = 0, Theta2 = 1, U1 = 2, U2 = 3, W = 4 };

/// Global numbering: block 1 (15 per element, element-major, field-major
/// within the element, then the three barycentric nodes), block 2 (the
/// enrichment coefficients of u1, u2, w on free-boundary elements) and
/// block 3 (M11, M22, M12, xi1, xi2 per mesh vertex).
class DofLayout {
public:
  DofLayout() = default;

  DofLayout(const Mesh& mesh, const SurfaceChart& chart, const SpaceOptions& opt, bool with_aux)
      : opt_(opt), with_aux_(with_aux) {
    const int nt = mesh.num_triangles();
    bases_.reserve(nt);
    enr_offset_.assign(nt, -1);
    block1_ = 15 * nt;
    int next = block1_;
    for (int t = 0; t < nt; ++t) {
      bases_.push_back(build_local_basis(mesh, t, chart, opt));
      const int ne = int(bases_.back().enrich.size());
      if (ne > 0) {
        enr_offset_[t] = next;
        next += 3 * ne;
      }
    }
    block2_ = next - block1_;
    block3_ = with_aux ? 5 * mesh.num_vertices() : 0;
    triangles_ = mesh.triangles();
  }

  int block1() const { return block1_; }
  int block2() const { return block2_; }
  int block3() const { return block3_; }
  int primal_size() const { return block1_ + block2_; }
  int size() const { return block1_ + block2_ + block3_; }
  bool has_aux() const { return with_aux_; }
  const SpaceOptions& options() const { return opt_; }
  int num_triangles() const { return int(bases_.size()); }

  const LocalBasis& basis(int t) const { return bases_[t]; }

  /// Global indices of the local primal functions of t, ordered as
  /// theta1 (3), theta2 (3), then for u1, u2, w: the 3 nodal functions
  /// followed by the enrichment functions.
  std::vector<int> primal_dofs(int t) const {
    const LocalBasis& b = bases_[t];
    const int ne = int(b.enrich.size());
    std::vector<int> d;
    d.reserve(b.size());
    for (int f = 0; f < 2; ++f)
      for (int i = 0; i < 3; ++i) d.push_back(15 * t + 3 * f + i);
    for (int f = 2; f < 5; ++f) {
      for (int i = 0; i < 3; ++i) d.push_back(15 * t + 3 * f + i);
      for (int j = 0; j < ne; ++j) d.push_back(enr_offset_[t] + (f - 2) * ne + j);
    }
    return d;
  }

  /// Field slot and polynomial index (into LocalBasis::function) of local
  /// primal function j.
  std::pair<int, int> primal_slot(int t, int j) const {
    if (j < 6) return {j / 3, j % 3};
    const int nd = bases_[t].size_disp();
    j -= 6;
    return {2 + j / nd, j % nd};
  }

  /// Global indices of the 15 auxiliary functions touching triangle t:
  /// vertex-major, then component.
  std::array<int, 15> aux_dofs(int t) const {
    std::array<int, 15> d{};
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 5; ++k) d[5 * i + k] = primal_size() + 5 * triangles_[t][i] + k;
    return d;
  }

  int aux_dof(int vertex, int comp) const { return primal_size() + 5 * vertex + comp; }

private:
  SpaceOptions opt_;
  bool with_aux_ = false;
  int block1_ = 0, block2_ = 0, block3_ = 0;
  std::vector<LocalBasis> bases_;
  std::vector<int> enr_offset_;
  std::vector<std::array<int, 3>> triangles_;
};

inline DofLayout build_dof_layout(const Mesh& mesh, const SurfaceChart& chart, bool enrichment, bool with_aux,
                                  bool full_spaces = false) {
  SpaceOptions o;
  o.enrichment = enrichment;
  o.full_spaces = full_spaces;
  return DofLayout(mesh, chart, o, with_aux);
}

/// Smooth primal fields: values and first partials at a parameter point.
using PrimalFunction = std::function<FieldSample<double>(const Point2&)>;

/// Evaluates the discrete primal field with coefficients x on triangle t at
/// reference point (r, s).
template <class Vec>
FieldSample<double> eval_primal(const DofLayout& L, const ElementMap& m, int t, const Vec& x, double r, double s) {
  FieldSample<double> f;
  const LocalBasis& b = L.basis(t);
  const auto dofs = L.primal_dofs(t);
  for (int j = 0; j < int(dofs.size()); ++j) {
    const double c = x[dofs[j]];
    if (c == 0.0) continue;
    const auto [field, pi] = L.primal_slot(t, j);
    const Poly p = b.function(pi);
    const double v = c * p(r, s);
    const auto g = m.physical_grad(p.grad(r, s));
    switch (field) {
      case Theta1:
      case Theta2:
        f.theta[field] += v;
        f.grad_theta[field][0] += c * g[0];
        f.grad_theta[field][1] += c * g[1];
        break;
      case U1:
      case U2:
        f.u[field - 2] += v;
        f.grad_u[field - 2][0] += c * g[0];
        f.grad_u[field - 2][1] += c * g[1];
        break;
      default:
        f.w += v;
        f.grad_w[0] += c * g[0];
        f.grad_w[1] += c * g[1];
    }
  }
  return f;
}

inline double field_value(const FieldSample<double>& f, int field) {
  switch (field) {
    case Theta1: return f.theta[0];
    case Theta2: return f.theta[1];
    case U1: return f.u[0];
    case U2: return f.u[1];
    default: return f.w;
  }
}

/// Element-wise projection of smooth fields. theta and P1 displacement
/// elements use the sqrt(a)-weighted L2 projection onto P1; enriched
/// elements match the P1 moments plus the degree 0 and 1 moments on each free
/// edge (weighted by sqrt(a)); full P2/P3 elements use the weighted L2
/// projection onto the whole local space.
inline Eigen::VectorXd project_primal(const PrimalFunction& exact, const Mesh& mesh, const SurfaceChart& chart,
                                      const DofLayout& L) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(L.size());
  const int deg = L.options().quad_degree;
  const GaussRule eg = gauss_legendre(5);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementMap m(mesh.corners(t));
    const auto q = detail::weighted_rule(m, chart, deg);
    const LocalBasis& b = L.basis(t);
    const auto dofs = L.primal_dofs(t);
    std::vector<FieldSample<double>> vals;
    vals.reserve(q.w.size());
    for (const auto& p : q.ref) vals.push_back(exact(m.map(p[0], p[1])));

    const int nd = b.size_disp();
    for (int field = 0; field < 5; ++field) {
      const int n = field < 2 ? 3 : nd;
      const bool moments = field >= 2 && (b.kind == ElementKind::Pe || b.kind == ElementKind::Pv);
      const int n_test = moments ? 3 : n;  // volume test functions
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
      for (std::size_t k = 0; k < q.w.size(); ++k) {
        const double r = q.ref[k][0], s = q.ref[k][1];
        const double fv = field_value(vals[k], field);
        for (int i = 0; i < n_test; ++i) {
          const double ti = b.function(i)(r, s);
          rhs(i) += q.w[k] * fv * ti;
          for (int j = 0; j < n; ++j) A(i, j) += q.w[k] * ti * b.function(j)(r, s);
        }
      }
      if (moments) {
        int row = 3;
        for (int fe : b.free_edges) {
          // Edge fe joins local vertices fe+1 and fe+2; lambda_{fe+1} is the
          // linear test function along it.
          const int va = (fe + 1) % 3, vb = (fe + 2) % 3;
          const Point2 pa = m.c[va], pb = m.c[vb];
          const double len = Mesh::dist(pa, pb);
          for (std::size_t k = 0; k < eg.nodes.size(); ++k) {
            const double sp = eg.nodes[k];
            const Point2 x{pa[0] + sp * (pb[0] - pa[0]), pa[1] + sp * (pb[1] - pa[1])};
            const auto rs = m.reference(x);
            const double wt = eg.weights[k] * len * eval_geometry(chart, x).sqrt_a;
            const double fv = field_value(exact(x), field);
            const double tests[2] = {1.0, 1.0 - sp};
            for (int ti = 0; ti < 2; ++ti) {
              rhs(row + ti) += wt * fv * tests[ti];
              for (int j = 0; j < n; ++j) A(row + ti, j) += wt * tests[ti] * b.function(j)(rs[0], rs[1]);
            }
          }
          row += 2;
        }
      }
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
      const auto& sv = svd.singularValues();
      if (sv(sv.size() - 1) <= 0.0 || sv(0) / sv(sv.size() - 1) > 1e10)
        throw Error("projection moment matrix on triangle " + std::to_string(t) + " is ill-conditioned");
      const Eigen::VectorXd c = A.fullPivLu().solve(rhs);
      const int base = field < 2 ? 3 * field : 6 + (field - 2) * nd;
      for (int j = 0; j < n; ++j) x(dofs[base + j]) = c(j);
    }
  }
  return x;
}

}  // namespace shellfem
