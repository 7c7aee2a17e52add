#pragma once

#include <array>
#include <string>

#include "shellfem/assembly.hpp"
#include "shellfem/expression.hpp"
#include "shellfem/geometry.hpp"
#include "shellfem/strain.hpp"

namespace shellfem {

/// Smooth exact fields (theta1, theta2, u1, u2, w) given as expressions, with
/// the loads that make them solve the continuous shell equations.
///
/// With m = (1/3) A rho, n = coef A gamma and q = coef kappa mu a tau, the
/// volume densities are
///   theta_a: -m^{ab}|_b + q^a
///   u_g:     (m^{ab} b^g_a)|_b - n^{gb}|_b + q^a b^g_a
///   w:       m^{ab} c_ab - n^{ab} b_ab - q^a|_a
/// and the boundary densities are the conormal traces of the same stresses.
/// The exact fields must vanish on clamped edges, u and w also on simply
/// supported edges; otherwise the loads are not consistent.
class ManufacturedSolution {
 public:
  ManufacturedSolution() : ManufacturedSolution({"0", "0", "0", "0", "0"}) {}

  explicit ManufacturedSolution(const std::array<std::string, 5>& text) {
    for (int i = 0; i < 5; ++i) f_[i] = Expression::parse(text[i]);
    init();
  }
  explicit ManufacturedSolution(const std::array<Expression, 5>& f) : f_(f) { init(); }

  const Expression& component(int i) const { return f_[i]; }

  template <class T>
  FieldSample<T> sample(const Point2& x) const;

  PrimalFunction function() const {
    return [self = *this](const Point2& x) { return self.sample<double>(x); };
  }

  PrimalSource source() const { return smooth_source(function()); }

  /// Stress resultants at x: m (bending), n (membrane), q (shear).
  template <class T>
  struct Stresses {
    Mat2<T> m, n;
    Vec2<T> q;
  };

  template <class T>
  Stresses<T> stresses(const Point2& x, const GeometryEval& g, const Material& mat, double coef) const {
    const GeomCoeffs<T> gc = make_coeffs<T>(g);
    const auto s = strains(sample<T>(x), gc);
    const Tensor4<T> A = elastic_tensor(gc.a_con, mat);
    Stresses<T> out;
    out.m = out.n = zero_mat2<T>();
    out.q = zero_vec2<T>();
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c)
          for (int d = 0; d < 2; ++d) {
            out.m[a][b] += T(1.0 / 3.0) * A[a][b][c][d] * s.rho[c][d];
            out.n[a][b] += T(coef) * A[a][b][c][d] * s.gamma[c][d];
          }
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) out.q[a] += T(coef * mat.kappa * mat.mu) * gc.a_con[a][b] * s.tau[b];
    return out;
  }

  /// Volume and boundary densities for the model with membrane/shear
  /// coefficient `coef` (the inverse square of the half-thickness).
  LoadFunctional loads(const Material& mat, double coef) const {
    LoadFunctional L;
    L.volume = [self = *this, mat, coef](const Point2& x, const GeometryEval& g) {
      return self.volume_density(x, g, mat, coef);
    };
    L.boundary = [self = *this, mat, coef](const Point2& x, const GeometryEval& g, Tag tag, const Point2& nb, const Point2&) {
      std::array<double, 5> r{};
      if (tag != Tag::S && tag != Tag::F) return r;
      const auto st = self.stresses<double>(x, g, mat, coef);
      const double sa = g.sqrt_a;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) r[a] += st.m[a][b] * nb[b] * sa;
      if (tag == Tag::F) {
        for (int c = 0; c < 2; ++c)
          for (int b = 0; b < 2; ++b) {
            double mb = 0.0;
            for (int a = 0; a < 2; ++a) mb += st.m[a][b] * g.b_mix[c][a];
            r[2 + c] += (st.n[c][b] - mb) * nb[b] * sa;
          }
        for (int a = 0; a < 2; ++a) r[4] += st.q[a] * nb[a] * sa;
      }
      return r;
    };
    return L;
  }

  std::array<double, 5> volume_density(const Point2& x, const GeometryEval& g, const Material& mat,
                                       double coef) const {
    const auto st = stresses<Dual>(x, g, mat, coef);
    const auto gc = coeffs(g);
    // (m b)^{gb} = m^{ab} b^g_a
    Mat2<Dual> mb = zero_mat2<Dual>();
    const GeomCoeffs<Dual> gd = coeffs_dual(g);
    for (int c = 0; c < 2; ++c)
      for (int b = 0; b < 2; ++b)
        for (int a = 0; a < 2; ++a) mb[c][b] += st.m[a][b] * gd.b_mix[c][a];
    const auto dm = div(st.m, gc), dn = div(st.n, gc), dmb = div(mb, gc);
    double dq = st.q[0].d[0] + st.q[1].d[1];
    for (int a = 0; a < 2; ++a)
      for (int d = 0; d < 2; ++d) dq += gc.christoffel[a][a][d] * st.q[d].v;
    std::array<double, 5> r{};
    for (int a = 0; a < 2; ++a) r[a] = -dm[a] + st.q[a].v;
    for (int c = 0; c < 2; ++c) {
      r[2 + c] = dmb[c] - dn[c];
      for (int a = 0; a < 2; ++a) r[2 + c] += st.q[a].v * gc.b_mix[c][a];
    }
    r[4] = -dq;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) r[4] += st.m[a][b].v * gc.c_cov[a][b] - st.n[a][b].v * gc.b_cov[a][b];
    return r;
  }

  /// Exact auxiliary stresses (M^{11}, M^{22}, M^{12}, xi^1, xi^2) of the
  /// mixed formulation with multiplier coefficient `coef`.
  AuxSource aux_source(const SurfaceChart& chart, const Material& mat, double coef) const {
    return smooth_aux([self = *this, chart, mat, coef](const Point2& x) {
      const GeometryEval g = eval_geometry(chart, x);
      const auto st = self.stresses<double>(x, g, mat, coef);
      return std::array<double, 5>{st.n[0][0], st.n[1][1], st.n[0][1], st.q[0], st.q[1]};
    });
  }

 private:
  std::array<Expression, 5> f_;
  std::array<std::array<Expression, 2>, 5> d1_;
  std::array<std::array<std::array<Expression, 2>, 2>, 5> d2_;

  void init() {
    for (int i = 0; i < 5; ++i)
      for (int a = 0; a < 2; ++a) {
        d1_[i][a] = f_[i].derivative(a);
        for (int b = 0; b < 2; ++b) d2_[i][a][b] = d1_[i][a].derivative(b);
      }
  }

  template <class T>
  static GeomCoeffs<T> make_coeffs(const GeometryEval& g) {
    if constexpr (std::is_same_v<T, Dual>)
      return coeffs_dual(g);
    else
      return coeffs(g);
  }

  /// sigma^{ab}|_b for a (not necessarily symmetric) tensor carrying partials.
  static Vec2<double> div(const Mat2<Dual>& s, const GeomCoeffs<double>& g) {
    Vec2<double> r{0.0, 0.0};
    for (int a = 0; a < 2; ++a) {
      r[a] = s[a][0].d[0] + s[a][1].d[1];
      for (int b = 0; b < 2; ++b)
        for (int l = 0; l < 2; ++l)
          r[a] += g.christoffel[a][b][l] * s[l][b].v + g.christoffel[b][b][l] * s[a][l].v;
    }
    return r;
  }

  template <class T>
  T value(int i, const Point2& x) const {
    if constexpr (std::is_same_v<T, Dual>)
      return Dual(f_[i](x[0], x[1]), d1_[i][0](x[0], x[1]), d1_[i][1](x[0], x[1]));
    else
      return f_[i](x[0], x[1]);
  }
  template <class T>
  T deriv(int i, int a, const Point2& x) const {
    if constexpr (std::is_same_v<T, Dual>)
      return Dual(d1_[i][a](x[0], x[1]), d2_[i][a][0](x[0], x[1]), d2_[i][a][1](x[0], x[1]));
    else
      return d1_[i][a](x[0], x[1]);
  }
};

template <class T>
FieldSample<T> ManufacturedSolution::sample(const Point2& x) const {
  FieldSample<T> s;
  for (int a = 0; a < 2; ++a) {
    s.theta[a] = value<T>(a, x);
    s.u[a] = value<T>(2 + a, x);
    for (int b = 0; b < 2; ++b) {
      s.grad_theta[a][b] = deriv<T>(a, b, x);
      s.grad_u[a][b] = deriv<T>(2 + a, b, x);
    }
    s.grad_w[a] = deriv<T>(4, a, x);
  }
  s.w = value<T>(4, x);
  return s;
}

}  // namespace shellfem
