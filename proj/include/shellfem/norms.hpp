#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <random>

#include "shellfem/assembly.hpp"
#include "shellfem/solve.hpp"

namespace shellfem {

struct Energies {
  double bending = 0.0;   // rho_h(x; x), penalty included
  double membrane = 0.0;  // gamma_h(x; x)
  double shear = 0.0;     // tau_h(x; x)
  double total_scaled = 0.0;    // e^2 bending + membrane + shear
  double total_original = 0.0;  // bending + eps^-2 (membrane + shear)
};

struct NormReport {
  double rho = 0.0, gamma = 0.0, tau = 0.0, a = 0.0, H = 0.0;
  double V = std::numeric_limits<double>::quiet_NaN();
  double weak_V = std::numeric_limits<double>::quiet_NaN();
  Energies energy;
};

inline double quad_form(const SpMat& Q, const Eigen::VectorXd& x) { return x.dot(Q * x); }

inline double safe_sqrt(double v) { return std::sqrt(std::max(v, 0.0)); }

/// Norms of a field that need no assembled matrices; sampled by quadrature.
inline NormReport discrete_norms(const Discretization& d, const PrimalSource& x) {
  const FormValues v = evaluate_forms(d, x, x);
  NormReport r;
  r.rho = safe_sqrt(v[Qrho]);
  r.gamma = safe_sqrt(v[Qgam]);
  r.tau = safe_sqrt(v[Qtau]);
  r.a = safe_sqrt(v[Qrho] + v[Qgam] + v[Qtau]);
  r.H = safe_sqrt(v[QH]);
  return r;
}

/// Mass matrix of the auxiliary block: sum over the four M^{ab} components
/// and both xi^a of their L2 products.
inline SpMat aux_mass(const Mesh& mesh, const DofLayout& L, int quad_degree = 4) {
  const TriangleRule tq = triangle_rule(quad_degree);
  Triplets trip;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementMap m(mesh.corners(t));
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(15, 15);
    for (std::size_t k = 0; k < tq.points.size(); ++k) {
      const AuxOps Z = aux_basis_ops(tq.points[k][0], tq.points[k][1]);
      K += tq.weights[k] * std::abs(m.det) * Z.transpose() * Z;
    }
    const auto a = L.aux_dofs(t);
    detail::scatter(trip, std::vector<int>(a.begin(), a.end()), std::vector<int>(a.begin(), a.end()), K);
  }
  SpMat M(L.size(), L.size());
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

/// Dual norm sqrt(r^T Q^{-1} r) over the leading n unknowns.
inline double dual_norm(const SpMat& Q, const Eigen::VectorXd& r, int n) {
  if (n == 0) return 0.0;
  Eigen::SimplicialLDLT<SpMat> f(detail::leading_block(Q, n));
  if (f.info() != Eigen::Success) throw SolverError("H_h Gram matrix is not factorizable");
  const Eigen::VectorXd y = f.solve(r.head(n));
  return safe_sqrt(r.head(n).dot(y));
}

/// sup over primal test functions of b_h(N, eta; psi) / |psi|_H.
inline double weak_Vbar_norm(const ShellSystem& s, const Eigen::VectorXd& aux_full) {
  const Eigen::VectorXd r = s.forms->B.transpose() * aux_full;
  return dual_norm((*s.forms)[QH], r, s.layout->primal_size());
}

inline NormReport solution_norms(const Mesh& mesh, const ShellSystem& s, const ShellSolution& sol) {
  const FormMatrices& F = *s.forms;
  const Eigen::VectorXd x = sol.full();
  NormReport r;
  const double qr = quad_form(F[Qrho], x), qg = quad_form(F[Qgam], x), qt = quad_form(F[Qtau], x);
  r.rho = safe_sqrt(qr);
  r.gamma = safe_sqrt(qg);
  r.tau = safe_sqrt(qt);
  r.a = safe_sqrt(qr + qg + qt);
  r.H = safe_sqrt(quad_form(F[QH], x));
  const double C = s.penalty;
  r.energy.bending = quad_form(F[R0], x) + C * quad_form(F[Rp], x);
  r.energy.membrane = quad_form(F[G0], x) + C * quad_form(F[Gp], x);
  r.energy.shear = quad_form(F[T0], x) + C * quad_form(F[Tp], x);
  const double e2 = split_eps2(sol.epsilon);
  r.energy.total_scaled = e2 * r.energy.bending + r.energy.membrane + r.energy.shear;
  r.energy.total_original = r.energy.bending + membrane_coef(sol.epsilon) * (r.energy.membrane + r.energy.shear);
  if (s.layout->has_aux() && sol.aux.size()) {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(x.size());
    z.tail(sol.aux.size()) = sol.aux;
    r.V = safe_sqrt(quad_form(aux_mass(mesh, *s.layout), z));
    r.weak_V = weak_Vbar_norm(s, z);
  }
  return r;
}

namespace detail {

/// Largest eigenvalue of the pencil (A, B) on the leading n unknowns, B
/// positive definite, by Lanczos with full reorthogonalization on
/// L^{-1} P A P^T L^{-T}.
inline double pencil_max(const SpMat& A, const SpMat& B, int n, int steps, unsigned seed) {
  const SpMat An = leading_block(A, n), Bn = leading_block(B, n);
  Eigen::SimplicialLLT<SpMat> llt(Bn);
  if (llt.info() != Eigen::Success) throw SolverError("Gram matrix is not positive definite");
  const auto& P = llt.permutationP();
  auto apply = [&](const Eigen::VectorXd& v) {
    // y = L^{-1} P A P^T L^{-T} v
    Eigen::VectorXd t = llt.matrixU().solve(v);
    t = P.transpose() * t;
    t = An * t;
    t = P * t;
    return Eigen::VectorXd(llt.matrixL().solve(t));
  };
  const int k = std::min(steps, n);
  std::mt19937 rng(seed);
  std::normal_distribution<double> N01;
  Eigen::MatrixXd V(n, k + 1);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = N01(rng);
  V.col(0) = v.normalized();
  Eigen::VectorXd alpha(k), beta = Eigen::VectorXd::Zero(k);
  int m = k;
  for (int j = 0; j < k; ++j) {
    Eigen::VectorXd w = apply(V.col(j));
    alpha(j) = V.col(j).dot(w);
    for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
    beta(j) = w.norm();
    if (beta(j) < 1e-13 * std::abs(alpha(j)) || j + 1 == k) {
      m = j + 1;
      break;
    }
    V.col(j + 1) = w / beta(j);
  }
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  for (int j = 0; j < m; ++j) {
    T(j, j) = alpha(j);
    if (j + 1 < m) T(j, j + 1) = T(j + 1, j) = beta(j);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace detail

struct KornRatio {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
};

/// Extreme generalized Rayleigh quotients |x|^2_a / |x|^2_H over the primal
/// space. Dense eigensolve for small systems, Lanczos otherwise.
inline KornRatio korn_ratio(const FormMatrices& F, int n, int lanczos_steps = 80) {
  const SpMat Qa = F[Qrho] + F[Qgam] + F[Qtau];
  KornRatio k;
  if (n <= 600) {
    const Eigen::MatrixXd A = Eigen::MatrixXd(detail::leading_block(Qa, n));
    const Eigen::MatrixXd B = Eigen::MatrixXd(detail::leading_block(F[QH], n));
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B, Eigen::EigenvaluesOnly);
    k.min_ratio = es.eigenvalues().minCoeff();
    k.max_ratio = es.eigenvalues().maxCoeff();
    return k;
  }
  k.max_ratio = detail::pencil_max(Qa, F[QH], n, lanczos_steps, 7);
  k.min_ratio = 1.0 / detail::pencil_max(F[QH], Qa, n, lanczos_steps, 11);
  return k;
}

/// Rayleigh quotients of random vectors: bracketed by the extreme values.
inline KornRatio korn_ratio_sampled(const FormMatrices& F, int n, int samples, unsigned seed = 3) {
  const SpMat Qa = F[Qrho] + F[Qgam] + F[Qtau];
  std::mt19937 rng(seed);
  std::normal_distribution<double> N01;
  KornRatio k{std::numeric_limits<double>::infinity(), 0.0};
  Eigen::VectorXd x = Eigen::VectorXd::Zero(F.n);
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < n; ++i) x(i) = N01(rng);
    const double q = quad_form(Qa, x) / quad_form(F[QH], x);
    k.min_ratio = std::min(k.min_ratio, q);
    k.max_ratio = std::max(k.max_ratio, q);
  }
  return k;
}

/// Residual of the discrete equations at a given field, measured in the
/// dual H_h norm over the test space of the method:
///   DG:    R + eps^-2 (G + T) applied to x, minus the load, over block 1
///   mixed: R + G + T applied to x plus b_h(Z; .), minus the load, over the
///          primal space.
/// x may be the exact fields (sampled at quadrature points) or a discrete
/// interpolant.
inline double consistency_residual(const Discretization& d, const ShellSystem& s, const PrimalSource& x, Method method,
                                   double eps, const AuxSource* Z = nullptr) {
  const FormVectors v = apply_forms(d, x, method == Method::Mixed ? Z : nullptr);
  const double C = s.penalty;
  const double theta = method == Method::Mixed ? 1.0 : membrane_coef(eps);
  Eigen::VectorXd r = v.v[R0] + C * v.v[Rp] + theta * (v.v[G0] + C * v.v[Gp] + v.v[T0] + C * v.v[Tp]);
  if (method == Method::Mixed && Z) r += v.b;
  r -= s.load;
  const int n = method == Method::Mixed ? s.layout->primal_size() : s.layout->block1();
  return dual_norm((*s.forms)[QH], r, n);
}

}  // namespace shellfem
