#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "shellfem/assembly.hpp"

using namespace shellfem;

namespace {

constexpr double pi = std::numbers::pi;

Mesh square(int n, std::array<Tag, 4> tags, double x0 = 0, double x1 = 1, double y0 = 0, double y1 = 1) {
  RectMeshSpec s;
  s.x0 = x0;
  s.x1 = x1;
  s.y0 = y0;
  s.y1 = y1;
  s.nx = s.ny = n;
  s.tags = tags;
  return generate_rect_mesh(s);
}

double asym(const SpMat& A) { return SpMat(A - SpMat(A.transpose())).norm() / std::max(A.norm(), 1e-300); }

double min_eig(const SpMat& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(A)};
  return es.eigenvalues().minCoeff();
}

}  // namespace

TEST(Assembly, GreenIdentityOnCubicFields) {
  const std::array<Expression, 2> f{Expression::parse("x1^3 - 2*x1*x2^2 + x2"),
                                    Expression::parse("x1^2*x2 + 3*x2^3 - x1")};
  const std::array<Point2, 3> tri{Point2{0.2, 0.1}, Point2{0.9, 0.3}, Point2{0.4, 0.8}};
  EXPECT_LT(green_identity_check(tri, SurfaceChart::plate(), f), 1e-12);
  EXPECT_LT(green_identity_check(tri, SurfaceChart::cylinder(1.7), f), 1e-12);
  const std::array<Point2, 3> st{Point2{1.0, 0.1}, Point2{1.4, 0.3}, Point2{1.1, 0.6}};
  EXPECT_LT(green_identity_check(st, SurfaceChart::sphere(1.0), f, 8), 1e-8);
}

TEST(Assembly, EdgeQuadratureMeasuresSurfaceLength) {
  const double R = 1.5;
  double len = 0.0;
  for (const auto& s :
       quadrature_edge_transform({1.0, 0.2}, {1.0, 0.9}, SurfaceChart::sphere(R), EdgeIntegrand::ScalarArclength))
    len += s.weight;
  EXPECT_NEAR(len, R * std::sin(1.0) * 0.7, 1e-13);  // along a parallel
  len = 0.0;
  for (const auto& s :
       quadrature_edge_transform({0.5, 0.2}, {1.5, 0.2}, SurfaceChart::sphere(R), EdgeIntegrand::ScalarArclength))
    len += s.weight;
  EXPECT_NEAR(len, R * 1.0, 1e-13);  // along a meridian
}

TEST(Assembly, FormMatricesAreSymmetricAndSemidefinite) {
  const Mesh m = square(2, {Tag::D, Tag::S, Tag::F, Tag::F}, 0.5, 1.5, 0.2, 1.0);
  const SurfaceChart chart = SurfaceChart::sphere(1.0);
  const Material mat;
  const DofLayout L = build_dof_layout(m, chart, true, true);
  const Discretization d{m, chart, mat, L, {}};
  const FormMatrices F = assemble_forms(d);
  const int np = L.primal_size();
  for (int f = 0; f < NumForms; ++f) EXPECT_LT(asym(F.m[f]), 1e-13) << "form " << f;
  EXPECT_LT(asym(F.C), 1e-13);
  for (Form f : {Rp, Gp, Tp, Qrho, Qgam, Qtau}) EXPECT_GT(min_eig(F[f].topLeftCorner(np, np)), -1e-10) << f;
  EXPECT_GT(min_eig(F[QH].topLeftCorner(np, np)), 0.0);
  // the compliance block is definite on the auxiliary unknowns
  const int na = L.block3();
  EXPECT_GT(min_eig(F.C.bottomRightCorner(na, na)), 0.0);
  EXPECT_EQ(F.B.rows(), L.size());
}

TEST(Assembly, RigidMotionsOfAFreePlateCarryNoEnergy) {
  // affine rigid motions lie in the discrete space of a plate
  const Mesh m = square(3, {Tag::F, Tag::F, Tag::F, Tag::F});
  const SurfaceChart chart = SurfaceChart::plate();
  const Material mat;
  SpaceOptions opt;
  const DofLayout L(m, chart, opt, false);
  const Discretization d{m, chart, mat, L, {}};
  const FormMatrices F = assemble_forms(d);
  const PrimalFunction rigid = [](const Point2& x) {
    // translation (0.3, -0.2, 0.5) plus rotation omega = (0.4, 0.7, -0.1)
    FieldSample<double> f;
    f.u = {0.3 + 0.1 * x[1], -0.2 - 0.1 * x[0]};
    f.grad_u = {{{0, 0.1}, {-0.1, 0}}};
    f.w = 0.5 + 0.4 * x[1] - 0.7 * x[0];
    f.grad_w = {-0.7, 0.4};
    f.theta = {0.7, -0.4};
    return f;
  };
  const Eigen::VectorXd x = project_primal(rigid, m, chart, L);
  for (Form f : {R0, Rp, G0, Gp, T0, Tp})
    EXPECT_LT(std::abs(x.dot(F[f] * x)), 1e-13 * F[f].norm() * x.squaredNorm()) << f;
  // a non-rigid field does carry energy
  Eigen::VectorXd y = x;
  y(0) += 1.0;
  EXPECT_GT(y.dot(F[Rp] * y), 1e-3);
}

TEST(Assembly, MatrixFreePathsAgreeWithMatrices) {
  const Mesh m = square(2, {Tag::D, Tag::F, Tag::S, Tag::F}, 0.0, 1.0, 0.0, 1.0);
  const SurfaceChart chart = SurfaceChart::cylinder(1.2);
  const Material mat{1.3, 0.8, 5.0 / 6.0};
  const DofLayout L = build_dof_layout(m, chart, true, true);
  const Discretization d{m, chart, mat, L, {}};
  const FormMatrices F = assemble_forms(d);
  std::mt19937 rng(8);
  std::normal_distribution<double> N;
  Eigen::VectorXd x(L.size()), y(L.size()), z = Eigen::VectorXd::Zero(L.size());
  for (int i = 0; i < L.size(); ++i) {
    x(i) = i < L.primal_size() ? N(rng) : 0.0;
    y(i) = i < L.primal_size() ? N(rng) : 0.0;
  }
  for (int i = L.primal_size(); i < L.size(); ++i) z(i) = N(rng);
  const AuxSource Z = discrete_aux(L, z);
  const FormValues v = evaluate_forms(d, discrete_source(L, x), discrete_source(L, y), &Z, &Z);
  for (int f = 0; f < NumForms; ++f) {
    const double ref = x.dot(F.m[f] * y);
    EXPECT_NEAR(v.v[f], ref, 1e-10 * (1 + std::abs(ref))) << "form " << f;
  }
  EXPECT_NEAR(v.b, z.dot(F.B * y), 1e-10 * (1 + std::abs(v.b)));
  EXPECT_NEAR(v.c, z.dot(F.C * z), 1e-10 * (1 + std::abs(v.c)));

  const FormVectors a = apply_forms(d, discrete_source(L, y), &Z);
  for (int f = 0; f < NumForms; ++f)
    EXPECT_LT((a.v[f] - F.m[f] * y).norm(), 1e-10 * (1 + a.v[f].norm())) << "form " << f;
  EXPECT_LT((a.b - F.B.transpose() * z).norm(), 1e-10 * (1 + a.b.norm()));
}

TEST(Assembly, ThreadCountDoesNotChangeTheMatrices) {
  const Mesh m = refine_uniform(square(3, {Tag::D, Tag::F, Tag::F, Tag::F}));
  const SurfaceChart chart = SurfaceChart::sphere(1.0);
  const Mesh shifted = [&] {
    std::vector<Point2> v = m.vertices();
    for (auto& p : v) p[0] += 0.5;
    return Mesh(v, m.triangles(), m.boundary_segments());
  }();
  const Material mat;
  const DofLayout L = build_dof_layout(shifted, chart, true, true);
  AssemblyConfig one, four;
  four.jobs = 4;
  const FormMatrices A = assemble_forms({shifted, chart, mat, L, one});
  const FormMatrices B = assemble_forms({shifted, chart, mat, L, four});
  for (int f = 0; f < NumForms; ++f) EXPECT_EQ(SpMat(A.m[f] - B.m[f]).norm(), 0.0);
  EXPECT_EQ(SpMat(A.B - B.B).norm(), 0.0);
}

TEST(Assembly, LoadOfAUniformPressure) {
  // p3 = 1 paired with w = 1 gives the surface area
  const double R = 2.0;
  const Mesh m = square(3, {Tag::D, Tag::D, Tag::D, Tag::D}, 0.0, pi / 2, 0.0, 1.0);
  const SurfaceChart chart = SurfaceChart::cylinder(R);
  const DofLayout L = build_dof_layout(m, chart, false, false);
  const Discretization d{m, chart, Material{}, L, {}};
  LoadFunctional f;
  f.volume = [](const Point2&, const GeometryEval&) { return std::array<double, 5>{0, 0, 0, 0, 1}; };
  const Eigen::VectorXd b = assemble_load(d, f);
  const PrimalFunction one = [](const Point2&) {
    FieldSample<double> s;
    s.w = 1.0;
    return s;
  };
  EXPECT_NEAR(b.dot(project_primal(one, m, chart, L)), pi / 2, 1e-13);
  // a unit line load on the free edges pairs with arc length
  LoadFunctional g;
  g.boundary = [](const Point2&, const GeometryEval& ge, Tag tag, const Point2&, const Point2& t) {
    return std::array<double, 5>{0, 0, 0, 0, tag == Tag::D ? arc_factor(ge, t) : 0.0};
  };
  EXPECT_NEAR(assemble_load(d, g).dot(project_primal(one, m, chart, L)), 2 * (pi / 2 + 1), 1e-13);
}
