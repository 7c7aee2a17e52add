#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "shellfem/fe_space.hpp"
#include "support/oracles.hpp"

using namespace shellfem;
using namespace shellfem::oracle;

TEST(FeSpace, EnrichmentIsOrthogonalToP1) {
  std::mt19937 rng(4);
  SpaceOptions opt;
  for (const auto& c : charts_under_test()) {
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const std::vector<int> free = k % 2 ? std::vector<int>{k % 3} : std::vector<int>{k % 3, (k + 1) % 3};
      const Mesh m = one_triangle(rng, c, free);
      const LocalBasis b = build_local_basis(m, 0, c.chart, opt);
      ASSERT_EQ(b.kind, free.size() == 1 ? ElementKind::Pe : ElementKind::Pv);
      worst = std::max(worst, orthogonality_defect(m, c.chart, b));
    }
    EXPECT_LT(worst, 1e-10) << c.chart.name();
  }
}

TEST(FeSpace, FullSpacesAreOrthogonalToP1) {
  std::mt19937 rng(5);
  SpaceOptions opt;
  opt.full_spaces = true;
  for (const auto& c : charts_under_test())
    for (int k = 0; k < 10; ++k) {
      const Mesh m = one_triangle(rng, c, k % 2 ? std::vector<int>{1} : std::vector<int>{0, 2});
      const LocalBasis b = build_local_basis(m, 0, c.chart, opt);
      EXPECT_EQ(b.enrich.size(), k % 2 ? 3u : 7u);
      EXPECT_LT(orthogonality_defect(m, c.chart, b), 1e-10);
    }
}

TEST(FeSpace, FreeEdgeTraces) {
  std::mt19937 rng(6);
  SpaceOptions opt;
  const auto cases = charts_under_test();
  double worst = 0.0;
  for (int k = 0; k < 60; ++k) {
    const ChartCase& c = cases[k % 3];
    const int f = k % 3;
    const LocalBasis b = build_local_basis(one_triangle(rng, c, {f}), 0, c.chart, opt);
    // local edge f runs from vertex f+1 to f+2; there lambda_{f+1} = 1 - t
    const int v1 = (f + 1) % 3, v2 = (f + 2) % 3;
    const Poly l2 = Poly::lambda(v1);
    const double ref[3][2] = {{0, 0}, {1, 0}, {0, 1}};
    for (double t = 0.0; t <= 1.0; t += 0.125) {
      const double r = (1 - t) * ref[v1][0] + t * ref[v2][0], s = (1 - t) * ref[v1][1] + t * ref[v2][1];
      worst = std::max(worst, std::abs(b.enrich[0](r, s) - 1.0));
      worst = std::max(worst, std::abs(b.enrich[1](r, s) - l2(r, s)));
    }
  }
  EXPECT_LT(worst, 1e-12);

  // two free edges: m23 vanishes on both, leaving l3, l3^2, l2, l2^2
  double worst_v = 0.0;
  for (int k = 0; k < 30; ++k) {
    const ChartCase& c = cases[k % 3];
    const int e1 = k % 3;
    const LocalBasis b = build_local_basis(one_triangle(rng, c, {(e1 + 1) % 3, (e1 + 2) % 3}), 0, c.chart, opt);
    const Poly l2 = Poly::lambda((e1 + 1) % 3), l3 = Poly::lambda((e1 + 2) % 3);
    const Poly trace[4] = {l3, l3 * l3, l2, l2 * l2};
    for (double t = 0.0; t <= 1.0; t += 0.125) {
      // edge with l2 = 0 joins vertices e1 and e1+2; edge with l3 = 0 joins e1 and e1+1
      const double ref[3][2] = {{0, 0}, {1, 0}, {0, 1}};
      for (int side = 0; side < 2; ++side) {
        const int other = side == 0 ? (e1 + 2) % 3 : (e1 + 1) % 3;
        const double r = (1 - t) * ref[e1][0] + t * ref[other][0], s = (1 - t) * ref[e1][1] + t * ref[other][1];
        for (int j = 0; j < 4; ++j) worst_v = std::max(worst_v, std::abs(b.enrich[j](r, s) - trace[j](r, s)));
      }
    }
  }
  EXPECT_LT(worst_v, 1e-12);
}

TEST(FeSpace, LayoutCounts) {
  RectMeshSpec s;
  s.nx = s.ny = 2;
  s.tags = {Tag::F, Tag::F, Tag::D, Tag::D};  // the bottom-right corner triangle has two free edges
  const Mesh m = generate_rect_mesh(s);
  const SurfaceChart chart = SurfaceChart::plate();
  const DofLayout L = build_dof_layout(m, chart, true, true);
  int pe = 0, pv = 0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    pe += L.basis(t).kind == ElementKind::Pe;
    pv += L.basis(t).kind == ElementKind::Pv;
  }
  EXPECT_EQ(pv, 1);
  EXPECT_EQ(pe, 2);
  EXPECT_EQ(L.block1(), 15 * m.num_triangles());
  EXPECT_EQ(L.block2(), 3 * (2 * pe + 4 * pv));
  EXPECT_EQ(L.block3(), 5 * m.num_vertices());
  const DofLayout P1 = build_dof_layout(m, chart, false, false);
  EXPECT_EQ(P1.primal_size(), P1.block1());
  EXPECT_EQ(P1.size(), P1.block1());

  // every global primal index is used exactly once
  std::vector<int> hits(L.primal_size(), 0);
  for (int t = 0; t < m.num_triangles(); ++t)
    for (int d : L.primal_dofs(t)) ++hits[d];
  for (int h : hits) EXPECT_EQ(h, 1);

  const Mesh lone({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {{0, 1, Tag::F}, {1, 2, Tag::F}, {2, 0, Tag::F}});
  EXPECT_THROW(build_dof_layout(lone, chart, true, false), ConfigError);
}

TEST(FeSpace, ProjectionReproducesLocalSpace) {
  RectMeshSpec s;
  s.nx = s.ny = 3;
  s.tags = {Tag::F, Tag::D, Tag::F, Tag::F};
  const Mesh m = generate_rect_mesh(s);
  const SurfaceChart chart = SurfaceChart::cylinder(1.5);
  const DofLayout L = build_dof_layout(m, chart, true, false);
  // globally affine fields lie in every local space
  const PrimalFunction f = [](const Point2& x) {
    FieldSample<double> v;
    v.theta = {1 + 2 * x[0], -x[1]};
    v.u = {0.5 - x[0] + x[1], 3 * x[1]};
    v.w = 2 - x[0];
    v.grad_theta = {{{2, 0}, {0, -1}}};
    v.grad_u = {{{-1, 1}, {0, 3}}};
    v.grad_w = {-1, 0};
    return v;
  };
  const Eigen::VectorXd x = project_primal(f, m, chart, L);
  double err = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const ElementMap em(m.corners(t));
    for (const auto& p : {std::array<double, 2>{0.2, 0.3}, std::array<double, 2>{0.6, 0.1}}) {
      const auto a = eval_primal(L, em, t, x, p[0], p[1]);
      const auto b = f(em.map(p[0], p[1]));
      for (int k = 0; k < 5; ++k) err = std::max(err, std::abs(field_value(a, k) - field_value(b, k)));
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) err = std::max(err, std::abs(a.grad_u[i][j] - b.grad_u[i][j]));
    }
  }
  EXPECT_LT(err, 1e-12);
}
