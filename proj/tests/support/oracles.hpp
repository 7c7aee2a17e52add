#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance binary.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "shellfem/expression.hpp"
#include "shellfem/fe_space.hpp"
#include "shellfem/geometry.hpp"

namespace shellfem::oracle {

inline constexpr double pi = std::numbers::pi;

// Random expression tree built without going through the parser.
inline Expression random_tree(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 9 : 3);
  switch (pick(rng)) {
    case 0: return Expression::make_number(std::uniform_int_distribution<int>(0, 1000)(rng) / 8.0);
    case 1: return Expression::variable(std::uniform_int_distribution<int>(0, 1)(rng));
    case 2: return Expression::make_constant(Expression::Kind::Pi);
    case 3: return Expression::make_constant(Expression::Kind::E);
    case 4: return Expression::raw_neg(random_tree(rng, depth - 1));
    case 5:
      return Expression::raw_call(Expression::Func(std::uniform_int_distribution<int>(0, 6)(rng)),
                                  random_tree(rng, depth - 1));
    default: {
      using Kind = Expression::Kind;
      const Kind k = Kind(int(Kind::Add) + std::uniform_int_distribution<int>(0, 4)(rng));
      return Expression::raw_binary(k, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    }
  }
}

struct FdGeometry {
  Mat2<double> a_cov, a_con, b_cov, b_mix;
  Tensor3<double> christoffel;
};

// Coefficients from the chart position alone: fourth-order central
// differences for the first and second partials of Phi.
inline FdGeometry fd_geometry(const SurfaceChart& c, const Point2& x, double h = 1e-3) {
  auto P = [&](double dx, double dy) { return c.position({x[0] + dx, x[1] + dy}); };
  auto d1 = [&](int i) {
    auto s = [&](double t) { return i == 0 ? P(t, 0) : P(0, t); };
    return (1.0 / (12 * h)) * (s(-2 * h) - 8.0 * s(-h) + 8.0 * s(h) - s(2 * h));
  };
  auto d2 = [&](int i, int j) {
    if (i == j) {
      auto s = [&](double t) { return i == 0 ? P(t, 0) : P(0, t); };
      return (1.0 / (12 * h * h)) * (-1.0 * s(-2 * h) + 16.0 * s(-h) - 30.0 * s(0) + 16.0 * s(h) - s(2 * h));
    }
    // mixed partial: product of the two first-derivative stencils
    const double w[4] = {1, -8, 8, -1}, o[4] = {-2, -1, 1, 2};
    Vec3 r{0, 0, 0};
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) r = r + (w[a] * w[b]) * P(o[a] * h, o[b] * h);
    return (1.0 / (144 * h * h)) * r;
  };
  FdGeometry g;
  const std::array<Vec3, 2> a{d1(0), d1(1)};
  Vec3 n = cross(a[0], a[1]);
  n = (1.0 / norm(n)) * n;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) g.a_cov[i][j] = dot(a[i], a[j]);
  g.a_con = inverse(g.a_cov);
  std::array<Vec3, 2> acon;
  for (int i = 0; i < 2; ++i) acon[i] = g.a_con[i][0] * a[0] + g.a_con[i][1] * a[1];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const Vec3 dd = d2(i, j);
      g.b_cov[i][j] = dot(n, dd);
      for (int k = 0; k < 2; ++k) g.christoffel[k][i][j] = dot(acon[k], dd);
    }
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) g.b_mix[i][j] = g.a_con[i][0] * g.b_cov[0][j] + g.a_con[i][1] * g.b_cov[1][j];
  return g;
}

inline std::vector<std::pair<SurfaceChart, std::array<double, 4>>> test_charts() {
  return {{SurfaceChart::plate(), {0, 1, 0, 1}},
          {SurfaceChart::cylinder(1.3), {0, 2, 0, 1}},
          {SurfaceChart::sphere(0.8), {pi / 4, 3 * pi / 4, 0, 2}},
          {SurfaceChart::hypar(0.2, 1.0, -0.3), {-1, 1, -1, 1}}};
}

struct ChartCase {
  SurfaceChart chart;
  Point2 lo, hi;
};

inline std::vector<ChartCase> charts_under_test() {
  return {{SurfaceChart::plate(), {0, 0}, {1, 1}},
          {SurfaceChart::cylinder(1.0), {0, 0}, {2, 1}},
          {SurfaceChart::sphere(1.0), {pi / 4, 0}, {3 * pi / 4, 1.5}}};
}

// Single counterclockwise triangle with the listed local edges free.
inline Mesh one_triangle(std::mt19937& rng, const ChartCase& c, std::vector<int> free_edges) {
  std::uniform_real_distribution<double> X(c.lo[0], c.hi[0] - 0.4), Y(c.lo[1], c.hi[1] - 0.4), D(0.05, 0.4);
  std::array<Point2, 3> p;
  double area = 0.0;
  do {
    const Point2 o{X(rng), Y(rng)};
    p = {o, Point2{o[0] + D(rng), o[1] + 0.3 * D(rng)}, Point2{o[0] + 0.3 * D(rng), o[1] + D(rng)}};
    area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
  } while (area < 1e-3);
  std::vector<BoundarySegment> b;
  for (int i = 0; i < 3; ++i) {
    const bool f = std::find(free_edges.begin(), free_edges.end(), i) != free_edges.end();
    b.push_back({(i + 1) % 3, (i + 2) % 3, f ? Tag::F : Tag::D});
  }
  return Mesh({p[0], p[1], p[2]}, {{0, 1, 2}}, b);
}

// Largest |integral of e * lambda_i sqrt(a)| relative to the norms, with an
// independent high-degree rule.
inline double orthogonality_defect(const Mesh& m, const SurfaceChart& chart, const LocalBasis& b) {
  const ElementMap map(m.corners(0));
  const TriangleRule q = triangle_rule(24);
  double worst = 0.0;
  for (const Poly& e : b.enrich)
    for (int i = 0; i < 3; ++i) {
      double ip = 0.0, ne = 0.0, nl = 0.0;
      for (std::size_t k = 0; k < q.points.size(); ++k) {
        const double r = q.points[k][0], s = q.points[k][1];
        const double w = q.weights[k] * eval_geometry(chart, map.map(r, s)).sqrt_a;
        const double l = Poly::lambda(i)(r, s);
        ip += w * e(r, s) * l;
        ne += w * e(r, s) * e(r, s);
        nl += w * l * l;
      }
      worst = std::max(worst, std::abs(ip) / std::sqrt(ne * nl));
    }
  return worst;
}

}  // namespace shellfem::oracle
