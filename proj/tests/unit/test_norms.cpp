#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "shellfem/norms.hpp"

using namespace shellfem;

namespace {

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

Eigen::VectorXd random_primal(const DofLayout& L, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> N01;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(L.size());
  for (int i = 0; i < L.primal_size(); ++i) x(i) = N01(rng);
  return x;
}

}  // namespace

TEST(Norms, AuxMassIntegratesConstants) {
  const Mesh m = square(3, {Tag::D, Tag::D, Tag::D, Tag::D}, 0.0, 2.0, 0.0, 0.5);
  const DofLayout L = build_dof_layout(m, SurfaceChart::plate(), true, true);
  const SpMat M = aux_mass(m, L);
  for (int comp = 0; comp < 5; ++comp) {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(L.size());
    for (int v = 0; v < m.num_vertices(); ++v) z(L.aux_dof(v, comp)) = 1.0;
    // M12 carries both off-diagonal entries of the symmetric tensor
    EXPECT_NEAR(quad_form(M, z), comp == 2 ? 2.0 : 1.0, 1e-13) << comp;
  }
}

TEST(Norms, DualNormOfADiagonalGram) {
  Triplets t;
  const Eigen::Vector4d q(2.0, 0.5, 4.0, 9.0), r(1.0, -1.0, 2.0, 7.0);
  for (int i = 0; i < 4; ++i) t.emplace_back(i, i, q(i));
  SpMat Q(4, 4);
  Q.setFromTriplets(t.begin(), t.end());
  // only the leading three unknowns enter
  EXPECT_NEAR(dual_norm(Q, r, 3), std::sqrt(0.5 + 2.0 + 1.0), 1e-15);
  EXPECT_DOUBLE_EQ(dual_norm(Q, r, 0), 0.0);
}

TEST(Norms, SampledNormsEqualTheQuadraticForms) {
  const Mesh m = square(2, {Tag::D, Tag::F, Tag::S, Tag::F}, 0.3, 1.2, 0.1, 0.9);
  const SurfaceChart chart = SurfaceChart::cylinder(1.3);
  const Material mat;
  const DofLayout L = build_dof_layout(m, chart, true, false);
  const Discretization d{m, chart, mat, L, {}};
  const FormMatrices F = assemble_forms(d);
  const Eigen::VectorXd x = random_primal(L, 5);
  const NormReport r = discrete_norms(d, discrete_source(L, x));
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
  EXPECT_LT(rel(r.rho, std::sqrt(quad_form(F[Qrho], x))), 1e-11);
  EXPECT_LT(rel(r.gamma, std::sqrt(quad_form(F[Qgam], x))), 1e-11);
  EXPECT_LT(rel(r.tau, std::sqrt(quad_form(F[Qtau], x))), 1e-11);
  EXPECT_LT(rel(r.H, std::sqrt(quad_form(F[QH], x))), 1e-11);
  EXPECT_NEAR(r.a * r.a, r.rho * r.rho + r.gamma * r.gamma + r.tau * r.tau, 1e-11 * r.a * r.a);
}

TEST(Norms, KornExtremesByLanczosMatchDenseEigenvalues) {
  const Mesh m = square(2, {Tag::D, Tag::D, Tag::D, Tag::D});
  const SurfaceChart chart = SurfaceChart::cylinder(1.0);
  const Material mat;
  const DofLayout L = build_dof_layout(m, chart, true, false);
  const Discretization d{m, chart, mat, L, {}};
  const FormMatrices F = assemble_forms(d);
  const int n = L.primal_size();
  ASSERT_LE(n, 600);
  const KornRatio dense = korn_ratio(F, n);
  EXPECT_GT(dense.min_ratio, 0.0);
  EXPECT_GE(dense.max_ratio, dense.min_ratio);
  // a full Krylov space reproduces the extreme eigenvalues
  const SpMat Qa = F[Qrho] + F[Qgam] + F[Qtau];
  const double lmax = detail::pencil_max(Qa, F[QH], n, n, 7);
  const double lmin = 1.0 / detail::pencil_max(F[QH], Qa, n, n, 11);
  EXPECT_NEAR(lmax, dense.max_ratio, 1e-8 * dense.max_ratio);
  EXPECT_NEAR(lmin, dense.min_ratio, 1e-8 * dense.min_ratio);
  const KornRatio s = korn_ratio_sampled(F, n, 200);
  EXPECT_GE(s.min_ratio, dense.min_ratio * (1 - 1e-12));
  EXPECT_LE(s.max_ratio, dense.max_ratio * (1 + 1e-12));
}

TEST(Norms, RigidMotionsMakeTheKornRatioVanish) {
  // free plate: affine rigid motions have |x|_a = 0
  const Mesh m = square(2, {Tag::F, Tag::F, Tag::F, Tag::F});
  const SurfaceChart chart = SurfaceChart::plate();
  const Material mat;
  const DofLayout L = build_dof_layout(m, chart, false, false);
  const Discretization d{m, chart, mat, L, {}};
  const FormMatrices F = assemble_forms(d);
  const KornRatio k = korn_ratio(F, L.primal_size());
  EXPECT_LT(k.min_ratio, 1e-10 * k.max_ratio);
}

TEST(Norms, ScalingAFieldScalesItsNorms) {
  const SurfaceChart chart = SurfaceChart::sphere(1.0);
  const Material mat;
  const Mesh ms = square(2, {Tag::D, Tag::F, Tag::F, Tag::F}, 0.6, 1.4, 0.2, 1.0);
  const DofLayout Ls = build_dof_layout(ms, chart, true, false);
  const Discretization d{ms, chart, mat, Ls, {}};
  const Eigen::VectorXd x = random_primal(Ls, 9);
  const NormReport a = discrete_norms(d, discrete_source(Ls, x));
  const NormReport b = discrete_norms(d, discrete_source(Ls, -3.0 * x));
  EXPECT_NEAR(b.H, 3.0 * a.H, 1e-12 * b.H);
  EXPECT_NEAR(b.a, 3.0 * a.a, 1e-12 * b.a);
}
