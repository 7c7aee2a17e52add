#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "shellfem/strain.hpp"

using namespace shellfem;

namespace {

// Covariant components of the 3D rigid motion U + omega x Phi:
// u_a = V . a_a, w = V . a_3, theta_a = (omega x a_3) . a_a.
std::array<double, 5> rigid_components(const SurfaceChart& c, const Point2& x, const Vec3& U, const Vec3& om) {
  const GeometryEval g = eval_geometry(c, x);
  const Vec3 V = U + cross(om, g.position);
  const Vec3 r = cross(om, g.normal);
  return {dot(r, g.tangent[0]), dot(r, g.tangent[1]), dot(V, g.tangent[0]), dot(V, g.tangent[1]), dot(V, g.normal)};
}

FieldSample<double> rigid_sample(const SurfaceChart& c, const Point2& x, const Vec3& U, const Vec3& om) {
  const double h = 1e-4;
  FieldSample<double> f;
  const auto v = rigid_components(c, x, U, om);
  std::array<std::array<double, 5>, 2> d;
  for (int k = 0; k < 2; ++k) {
    auto at = [&](double t) {
      Point2 y = x;
      y[k] += t;
      return rigid_components(c, y, U, om);
    };
    const auto a = at(-2 * h), b = at(-h), e = at(h), q = at(2 * h);
    for (int i = 0; i < 5; ++i) d[k][i] = (a[i] - 8 * b[i] + 8 * e[i] - q[i]) / (12 * h);
  }
  f.theta = {v[0], v[1]};
  f.u = {v[2], v[3]};
  f.w = v[4];
  for (int a = 0; a < 2; ++a)
    for (int k = 0; k < 2; ++k) {
      f.grad_theta[a][k] = d[k][a];
      f.grad_u[a][k] = d[k][2 + a];
    }
  f.grad_w = {d[0][4], d[1][4]};
  return f;
}

double max_strain(const StrainSample<double>& s) {
  double m = 0.0;
  for (int a = 0; a < 2; ++a) {
    m = std::max(m, std::abs(s.tau[a]));
    for (int b = 0; b < 2; ++b) m = std::max({m, std::abs(s.rho[a][b]), std::abs(s.gamma[a][b])});
  }
  return m;
}

}  // namespace

TEST(Strain, RigidMotionsAreStrainFree) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1, 1);
  const std::vector<std::pair<SurfaceChart, Point2>> cases{{SurfaceChart::plate(), {0.3, 0.7}},
                                                           {SurfaceChart::cylinder(1.3), {0.9, 0.4}},
                                                           {SurfaceChart::sphere(0.8), {1.1, 0.6}},
                                                           {SurfaceChart::hypar(0.3, 1.0, -0.2), {0.4, -0.5}}};
  for (const auto& [chart, x] : cases)
    for (int k = 0; k < 10; ++k) {
      const Vec3 t{U(rng), U(rng), U(rng)}, om{U(rng), U(rng), U(rng)};
      const FieldSample<double> f = rigid_sample(chart, x, t, om);
      const auto s = strains(f, coeffs(eval_geometry(chart, x)));
      EXPECT_LT(max_strain(s), 1e-9) << chart.name();
      // a pure deformation is not strain-free
      FieldSample<double> g = f;
      g.grad_u[0][0] += 0.1;
      EXPECT_GT(max_strain(strains(g, coeffs(eval_geometry(chart, x)))), 1e-3);
    }
}

TEST(Strain, PlateStrainsAreTheFlatOnes) {
  FieldSample<double> f;
  f.theta = {0.3, -0.2};
  f.u = {1.0, 2.0};
  f.w = 0.7;
  f.grad_theta = {{{1.0, 2.0}, {3.0, 4.0}}};
  f.grad_u = {{{5.0, 6.0}, {7.0, 8.0}}};
  f.grad_w = {0.5, -0.5};
  const auto s = strains(f, coeffs(eval_geometry(SurfaceChart::plate(), {0.1, 0.2})));
  EXPECT_DOUBLE_EQ(s.rho[0][1], 2.5);
  EXPECT_DOUBLE_EQ(s.gamma[0][1], 6.5);
  EXPECT_DOUBLE_EQ(s.gamma[1][1], 8.0);
  EXPECT_DOUBLE_EQ(s.tau[0], 0.8);
  EXPECT_DOUBLE_EQ(s.tau[1], -0.7);
}

TEST(Strain, DualDerivativesMatchFiniteDifferences) {
  // strains with dual-number coefficients carry d/dx of the strain when the
  // field derivatives are zero: check against differences of the values
  const SurfaceChart c = SurfaceChart::sphere(1.2);
  const Point2 x{1.0, 0.4};
  FieldSample<Dual> f;
  f.theta = {Dual{0.3}, Dual{-0.1}};
  f.u = {Dual{0.2}, Dual{0.5}};
  f.w = Dual{0.4};
  const auto sd = strains(f, coeffs_dual(eval_geometry(c, x)));
  FieldSample<double> fv;
  fv.theta = {0.3, -0.1};
  fv.u = {0.2, 0.5};
  fv.w = 0.4;
  const double h = 1e-6;
  for (int k = 0; k < 2; ++k) {
    Point2 xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    const auto sp = strains(fv, coeffs(eval_geometry(c, xp))), sm = strains(fv, coeffs(eval_geometry(c, xm)));
    for (int a = 0; a < 2; ++a) {
      EXPECT_NEAR(sd.tau[a].d[k], (sp.tau[a] - sm.tau[a]) / (2 * h), 1e-7);
      for (int b = 0; b < 2; ++b) {
        EXPECT_NEAR(sd.rho[a][b].d[k], (sp.rho[a][b] - sm.rho[a][b]) / (2 * h), 1e-7);
        EXPECT_NEAR(sd.gamma[a][b].d[k], (sp.gamma[a][b] - sm.gamma[a][b]) / (2 * h), 1e-7);
      }
    }
  }
}
