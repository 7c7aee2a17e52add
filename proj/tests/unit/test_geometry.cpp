#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "shellfem/geometry.hpp"
#include "support/oracles.hpp"

using namespace shellfem;
using namespace shellfem::oracle;

TEST(Geometry, AnalyticMatchesFiniteDifferences) {
  std::mt19937 rng(1);
  for (const auto& [chart, box] : test_charts()) {
    std::uniform_real_distribution<double> X(box[0], box[1]), Y(box[2], box[3]);
    double err = 0.0;
    for (int k = 0; k < 50; ++k) {
      const Point2 x{X(rng), Y(rng)};
      const GeometryEval g = eval_geometry(chart, x);
      const FdGeometry f = fd_geometry(chart, x);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          err = std::max(err, std::abs(g.a_cov[i][j] - f.a_cov[i][j]));
          err = std::max(err, std::abs(g.b_cov[i][j] - f.b_cov[i][j]));
          err = std::max(err, std::abs(g.b_mix[i][j] - f.b_mix[i][j]));
          for (int c = 0; c < 2; ++c) err = std::max(err, std::abs(g.christoffel[c][i][j] - f.christoffel[c][i][j]));
        }
    }
    EXPECT_LT(err, 1e-6) << chart.name();
  }
}

TEST(Geometry, DerivativeFieldsMatchFiniteDifferences) {
  std::mt19937 rng(2);
  const double h = 1e-5;
  for (const auto& [chart, box] : test_charts()) {
    std::uniform_real_distribution<double> X(box[0], box[1]), Y(box[2], box[3]);
    double err = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Point2 x{X(rng), Y(rng)};
      const GeometryEval g = eval_geometry(chart, x);
      for (int d = 0; d < 2; ++d) {
        Point2 xp = x, xm = x;
        xp[d] += h;
        xm[d] -= h;
        const GeometryEval gp = eval_geometry(chart, xp), gm = eval_geometry(chart, xm);
        err = std::max(err, std::abs(g.d_sqrt_a[d] - (gp.sqrt_a - gm.sqrt_a) / (2 * h)));
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            err = std::max(err, std::abs(g.db_cov(a, b, d) - (gp.b_cov[a][b] - gm.b_cov[a][b]) / (2 * h)));
            err = std::max(err, std::abs(g.db_mix(a, b, d) - (gp.b_mix[a][b] - gm.b_mix[a][b]) / (2 * h)));
            err = std::max(err, std::abs(g.d_a_con[d][a][b] - (gp.a_con[a][b] - gm.a_con[a][b]) / (2 * h)));
            for (int c = 0; c < 2; ++c)
              err = std::max(err, std::abs(g.dgamma(c, a, b, d) -
                                           (gp.christoffel[c][a][b] - gm.christoffel[c][a][b]) / (2 * h)));
          }
      }
    }
    EXPECT_LT(err, 1e-6) << chart.name();
  }
}

TEST(Geometry, ClosedForms) {
  const GeometryEval p = eval_geometry(SurfaceChart::plate(), {0.3, 0.4});
  EXPECT_DOUBLE_EQ(p.sqrt_a, 1.0);
  EXPECT_DOUBLE_EQ(p.b_cov[0][0], 0.0);

  // cylinder: arc-length chart, curvature 1/R along x1 only
  const double R = 2.0;
  const GeometryEval c = eval_geometry(SurfaceChart::cylinder(R), {0.7, 0.1});
  EXPECT_NEAR(c.sqrt_a, 1.0, 1e-15);
  EXPECT_NEAR(std::abs(c.b_cov[0][0]), 1.0 / R, 1e-15);
  EXPECT_NEAR(c.b_cov[1][1], 0.0, 1e-15);
  EXPECT_NEAR(c.b_cov[0][1], 0.0, 1e-15);
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(c.christoffel[i / 4][(i / 2) % 2][i % 2], 0.0, 1e-15);

  // sphere: umbilic, b^a_b = +-delta/R, sqrt(a) = R^2 sin x1
  const double r = 1.5, th = 1.1;
  const GeometryEval s = eval_geometry(SurfaceChart::sphere(r), {th, 0.2});
  EXPECT_NEAR(s.sqrt_a, r * r * std::sin(th), 1e-14);
  EXPECT_NEAR(std::abs(s.b_mix[0][0]), 1.0 / r, 1e-14);
  EXPECT_NEAR(s.b_mix[0][0], s.b_mix[1][1], 1e-14);
  EXPECT_NEAR(s.b_mix[0][1], 0.0, 1e-14);
  EXPECT_NEAR(s.christoffel[1][0][1], std::cos(th) / std::sin(th), 1e-14);
  EXPECT_NEAR(s.christoffel[0][1][1], -std::sin(th) * std::cos(th), 1e-14);
  // third fundamental form c = b^g_a b_gb = a / R^2 on the sphere
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) EXPECT_NEAR(s.c_cov[a][b], s.a_cov[a][b] / (r * r), 1e-14);
}

TEST(Geometry, ExpressionChartMatchesBuiltins) {
  const SurfaceChart e(charts::ExpressionChart(Expression::parse("2*cos(x1/2)"), Expression::parse("2*sin(x1/2)"),
                                               Expression::parse("x2")));
  const SurfaceChart c = SurfaceChart::cylinder(2.0);
  for (const Point2 x : {Point2{0.1, 0.2}, Point2{1.3, -0.5}, Point2{2.9, 0.7}}) {
    const GeometryEval a = eval_geometry(e, x), b = eval_geometry(c, x);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        EXPECT_NEAR(a.b_cov[i][j], b.b_cov[i][j], 1e-13);
        EXPECT_NEAR(a.a_cov[i][j], b.a_cov[i][j], 1e-13);
        for (int d = 0; d < 2; ++d) EXPECT_NEAR(a.db_mix(i, j, d), b.db_mix(i, j, d), 1e-13);
      }
  }
}

TEST(Geometry, ComplianceInvertsElasticTensor) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double err = 0.0;
  for (int k = 0; k < 1000; ++k) {
    Material m;
    m.mu = 0.1 + 10 * U(rng);
    m.lambda = 10 * U(rng);
    const auto [chart, box] = test_charts()[k % 4];
    const Point2 x{box[0] + (box[1] - box[0]) * U(rng), box[2] + (box[3] - box[2]) * U(rng)};
    const GeometryEval g = eval_geometry(chart, x);
    const ElasticTensors t = eval_elastic(g, m);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int e = 0; e < 2; ++e)
          for (int f = 0; f < 2; ++f) {
            double s = 0.0;
            for (int c = 0; c < 2; ++c)
              for (int d = 0; d < 2; ++d) s += t.elastic[a][b][c][d] * t.compliance[c][d][e][f];
            const double id = 0.5 * ((a == e) * (b == f) + (a == f) * (b == e));
            err = std::max(err, std::abs(s - id));
          }
  }
  EXPECT_LT(err, 1e-10);
}

TEST(Geometry, InvalidInputsThrow) {
  Material m;
  m.mu = -1.0;
  EXPECT_THROW(m.validate(), ConfigError);
  // the sphere chart degenerates at the poles
  EXPECT_THROW(eval_geometry(SurfaceChart::sphere(1.0), {0.0, 0.3}), GeometryError);
  SurfaceChart c = SurfaceChart::plate();
  c.set_domain(Polygon::rectangle(0, 1, 0, 1));
  EXPECT_THROW(eval_geometry(c, {2.0, 0.5}), GeometryError);
}
