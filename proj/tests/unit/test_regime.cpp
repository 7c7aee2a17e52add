#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "shellfem/regime.hpp"

using namespace shellfem;

namespace {

Problem normal_load_problem(SurfaceChart chart, std::array<Tag, 4> tags, double eps, double p3 = 1.0) {
  Problem p;
  RectMeshSpec s;
  s.nx = s.ny = 4;
  s.tags = tags;
  p.mesh = generate_rect_mesh(s);
  p.chart = std::move(chart);
  p.epsilon = eps;
  p.loads.volume = [p3](const Point2&, const GeometryEval&) { return std::array<double, 5>{0, 0, 0, 0, p3}; };
  return p;
}

}  // namespace

TEST(Regime, ClassificationRules) {
  const RegimeThresholds th;
  // DG far below mixed: locking of DG, so bending
  EXPECT_EQ(classify(1.0, 1.0, 1.0, 0.05, th), Verdict::Bending);
  // mixed norms decay to zero under extrapolation
  EXPECT_EQ(classify(1.0, 0.3, 0.02, 0.9, th), Verdict::NonBending);
  // settled nonzero limit
  EXPECT_EQ(classify(1.0, 0.99, 0.985, 0.5, th), Verdict::Bending);
  // neither
  EXPECT_EQ(classify(1.0, 0.7, 0.4, 0.9, th), Verdict::Inconclusive);
  // zero DG with a nonzero mixed solution counts as locking
  EXPECT_EQ(classify(1.0, 1.0, 1.0, 0.0, th), Verdict::Bending);
  const RegimeReport r = make_report(2.0, 1.0, 0.5, 1.0, th);
  EXPECT_DOUBLE_EQ(r.dg_over_mixed, 0.5);
  EXPECT_DOUBLE_EQ(r.half_over_eps, 0.5);
  EXPECT_DOUBLE_EQ(r.extrap_over_eps, 0.25);
}

TEST(Regime, ExtrapolationRemovesTheQuadraticTerm) {
  std::mt19937 rng(1);
  std::normal_distribution<double> N01;
  Eigen::VectorXd x0(20), v(20);
  for (int i = 0; i < 20; ++i) {
    x0(i) = N01(rng);
    v(i) = N01(rng);
  }
  // equal inputs are a fixed point
  EXPECT_LT((extrapolate(x0, x0) - x0).norm(), 1e-14 * x0.norm());
  const double e = 0.3;
  const Eigen::VectorXd xe = x0 + e * e * v, xh = x0 + 0.25 * e * e * v;
  EXPECT_LT((extrapolate(xe, xh) - x0).norm(), 1e-14 * x0.norm() * 10);
}

TEST(Regime, CantileverCylinderIsBendingDominated) {
  const Problem p = normal_load_problem(SurfaceChart::cylinder(1.0), {Tag::F, Tag::F, Tag::F, Tag::D}, 1e-3);
  const RegimeRun run = detect_regime(p);
  EXPECT_EQ(run.report.verdict, Verdict::Bending);
  EXPECT_GT(1.0 / run.report.dg_over_mixed, 10.0);
  EXPECT_EQ(&recommend_solution(run.report, run.mixed, run.dg), &run.mixed);
  EXPECT_EQ(static_cast<int>(run.report.element_extrap.size()), p.mesh.num_triangles());
  EXPECT_NEAR(std::sqrt(split_eps2(run.report.half_epsilon)), 0.5 * std::sqrt(split_eps2(p.epsilon)), 1e-15);
}

TEST(Regime, ScalingTheLoadScalesTheNormsAndKeepsTheVerdict) {
  const SurfaceChart c = SurfaceChart::cylinder(1.0);
  const RegimeReport a = detect_regime(normal_load_problem(c, {Tag::F, Tag::F, Tag::F, Tag::D}, 1e-2)).report;
  const RegimeReport b = detect_regime(normal_load_problem(c, {Tag::F, Tag::F, Tag::F, Tag::D}, 1e-2, -7.5)).report;
  EXPECT_EQ(a.verdict, b.verdict);
  EXPECT_NEAR(b.norm_mixed_eps, 7.5 * a.norm_mixed_eps, 1e-9 * b.norm_mixed_eps);
  EXPECT_NEAR(b.norm_mixed_half_eps, 7.5 * a.norm_mixed_half_eps, 1e-9 * b.norm_mixed_half_eps);
  EXPECT_NEAR(b.norm_extrap, 7.5 * a.norm_extrap, 1e-9 * b.norm_extrap);
  EXPECT_NEAR(b.norm_dg, 7.5 * a.norm_dg, 1e-9 * b.norm_dg);
  EXPECT_NEAR(b.dg_over_mixed, a.dg_over_mixed, 1e-9);
}

TEST(Regime, ClampedPlateSolutionIsStableInEpsilon) {
  const std::array<Tag, 4> D{Tag::D, Tag::D, Tag::D, Tag::D};
  const RegimeReport a = detect_regime(normal_load_problem(SurfaceChart::plate(), D, 1e-2)).report;
  const RegimeReport b = detect_regime(normal_load_problem(SurfaceChart::plate(), D, 1e-3)).report;
  EXPECT_EQ(a.verdict, Verdict::Bending);
  EXPECT_EQ(b.verdict, Verdict::Bending);
  EXPECT_NEAR(a.half_over_eps, 1.0, 0.01);
  EXPECT_NEAR(b.norm_mixed_eps, a.norm_mixed_eps, 0.01 * a.norm_mixed_eps);
}

TEST(Regime, InconclusiveVerdictHasNoRecommendation) {
  RegimeReport r;
  r.verdict = Verdict::Inconclusive;
  const ShellSolution s;
  EXPECT_THROW(recommend_solution(r, s, s), SolverError);
  r.verdict = Verdict::NonBending;
  EXPECT_NO_THROW(recommend_solution(r, s, s));
}
