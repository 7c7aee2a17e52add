#pragma once

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cmath>
#include <memory>
#include <sstream>
#include <string>

#include "shellfem/assembly.hpp"
#include "shellfem/error.hpp"
#include "shellfem/fe_space.hpp"
#include "shellfem/mesh.hpp"

namespace shellfem {

enum class Method { Mixed, DG };
enum class DgScaling { Original, Scaled };

inline const char* method_name(Method m) { return m == Method::Mixed ? "mixed" : "dg"; }

/// The half-thickness eps enters the model through the membrane/shear
/// coefficient eps^-2. The mixed method splits that as 1 + e^-2, where e is
/// returned here as e^2 = eps^2 / (1 - eps^2).
inline double split_eps2(double eps) {
  if (!(eps > 0.0) || !(eps < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  return eps * eps / (1.0 - eps * eps);
}

/// Inverse of split_eps2: the half-thickness whose split parameter is e.
inline double eps_from_split(double e) { return e / std::sqrt(1.0 + e * e); }

inline double membrane_coef(double eps) { return 1.0 / (eps * eps); }

struct Problem {
  Mesh mesh;
  SurfaceChart chart;
  Material material;
  double epsilon = 0.1;
  LoadFunctional loads;
  AssemblyConfig assembly;
  SpaceOptions space;
  DgScaling dg_scaling = DgScaling::Scaled;
};

/// Assembled forms and load vector on one layout.
struct ShellSystem {
  std::shared_ptr<const DofLayout> layout;
  std::shared_ptr<const FormMatrices> forms;
  Eigen::VectorXd load;
  double penalty = 0.0;

  /// R + theta (G + T), penalties included, over the full layout size.
  SpMat a_theta(double theta) const {
    const FormMatrices& F = *forms;
    const double C = penalty;
    SpMat r = F[R0] + C * F[Rp];
    SpMat gt = F[G0] + C * F[Gp] + F[T0] + C * F[Tp];
    return r + theta * gt;
  }
};

namespace detail {

inline double inf_norm(const SpMat& K) {
  Eigen::VectorXd rs = Eigen::VectorXd::Zero(K.rows());
  for (int k = 0; k < K.outerSize(); ++k)
    for (SpMat::InnerIterator it(K, k); it; ++it) rs(it.row()) += std::abs(it.value());
  return K.rows() ? rs.maxCoeff() : 0.0;
}

inline SpMat leading_block(const SpMat& K, int n) { return K.topLeftCorner(n, n); }

}  // namespace detail

/// Normwise backward error |Kx - f| / (|K| |x| + |f|) in the infinity norm.
inline double backward_error(const SpMat& K, const Eigen::VectorXd& x, const Eigen::VectorXd& f) {
  const double den = detail::inf_norm(K) * x.lpNorm<Eigen::Infinity>() + f.lpNorm<Eigen::Infinity>();
  if (den == 0.0) return 0.0;
  return (K * x - f).lpNorm<Eigen::Infinity>() / den;
}

struct LinearSolve {
  Eigen::VectorXd x;
  double residual = 0.0;
  std::string solver;
};

/// Symmetric sparse solve: LDL^T first, sparse LU as fallback. Throws
/// SolverError when neither reaches the residual tolerance.
inline LinearSolve solve_symmetric(const SpMat& K, const Eigen::VectorXd& f, const std::string& hint = "",
                                   double tol = 1e-10) {
  LinearSolve out;
  if (f.size() == 0) return out;
  Eigen::SimplicialLDLT<SpMat> ldlt(K);
  if (ldlt.info() == Eigen::Success) {
    out.x = ldlt.solve(f);
    out.residual = backward_error(K, out.x, f);
    out.solver = "ldlt";
    if (out.x.allFinite() && out.residual <= tol) return out;
  }
  SpMat Kc = K;
  Kc.makeCompressed();
  Eigen::SparseLU<SpMat> lu;
  lu.compute(Kc);
  if (lu.info() != Eigen::Success) throw SolverError("factorization failed" + (hint.empty() ? "" : "; " + hint));
  out.x = lu.solve(f);
  out.residual = backward_error(K, out.x, f);
  out.solver = "lu";
  if (!out.x.allFinite() || out.residual > tol) {
    std::ostringstream os;
    os << "residual " << out.residual << " above tolerance " << tol;
    if (!hint.empty()) os << "; " << hint;
    throw SolverError(os.str());
  }
  return out;
}

/// True when every LDL^T pivot of the leading n x n block of K exceeds
/// `rel` times its largest diagonal entry. Round-off turns the zero pivots of
/// a singular form into tiny positive ones, so plain Cholesky success is not
/// enough.
inline bool positive_definite(const SpMat& K, int n, double rel = 1e-10) {
  if (n == 0) return true;
  const SpMat Kn = detail::leading_block(K, n);
  Eigen::SimplicialLDLT<SpMat> ldlt(Kn);
  if (ldlt.info() != Eigen::Success) return false;
  const double dmax = Eigen::VectorXd(Kn.diagonal()).maxCoeff();
  return dmax > 0.0 && ldlt.vectorD().minCoeff() > rel * dmax;
}

inline double initial_penalty(const Problem& p) {
  std::vector<Point2> pts = p.mesh.vertices();
  for (int t = 0; t < p.mesh.num_triangles(); ++t) {
    const auto c = p.mesh.corners(t);
    pts.push_back({(c[0][0] + c[1][0] + c[2][0]) / 3.0, (c[0][1] + c[1][1] + c[2][1]) / 3.0});
  }
  return 10.0 * p.material.mu * (1.0 + max_geometry_magnitude_sq(p.chart, pts));
}

/// Doubles the penalty from `start` until A(1) is positive definite on the
/// primal block; at most 10 doublings.
inline double probe_penalty(const FormMatrices& F, int n_primal, double start) {
  double C = start;
  for (int k = 0; k <= 10; ++k, C *= 2.0) {
    const SpMat A = F[R0] + C * F[Rp] + F[G0] + C * F[Gp] + F[T0] + C * F[Tp];
    if (positive_definite(A, n_primal)) return C;
  }
  throw SolverError("no penalty up to 2^10 times the initial value makes the primal form coercive; check that the "
                    "boundary conditions exclude rigid motions");
}

/// Assembles forms and loads on a layout. The penalty is taken from `penalty`
/// when positive, else from the problem config, else by the probe.
inline ShellSystem assemble_system(const Problem& p, bool enrichment, bool with_aux, double penalty = 0.0) {
  ShellSystem s;
  SpaceOptions opt = p.space;
  opt.enrichment = enrichment && p.space.enrichment;
  opt.quad_degree = p.assembly.quad_tri_degree;
  s.layout = std::make_shared<const DofLayout>(p.mesh, p.chart, opt, with_aux);
  const Discretization d{p.mesh, p.chart, p.material, *s.layout, p.assembly};
  s.forms = std::make_shared<const FormMatrices>(assemble_forms(d));
  s.load = assemble_load(d, p.loads);
  if (penalty > 0.0)
    s.penalty = penalty;
  else if (p.assembly.penalty_C > 0.0)
    s.penalty = p.assembly.penalty_C;
  else
    s.penalty = probe_penalty(*s.forms, s.layout->primal_size(), initial_penalty(p));
  return s;
}

struct ShellSolution {
  Method method = Method::Mixed;
  double epsilon = 0.0;
  double penalty = 0.0;
  double residual = 0.0;
  std::string solver;
  std::shared_ptr<const DofLayout> layout;
  Eigen::VectorXd primal;  // blocks 1 (+2)
  Eigen::VectorXd aux;     // block 3, empty for DG

  /// Primal coefficients padded to the layout size (aux entries zero).
  Eigen::VectorXd full() const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(layout->size());
    v.head(primal.size()) = primal;
    if (aux.size()) v.tail(aux.size()) = aux;
    return v;
  }

  PrimalSource source() const {
    return {[L = layout, x = full()](int t, const ElementMap& m, const Point2&, double r, double s,
                                     const GeometryEval& g) {
      return ops_from_sample(eval_primal(*L, m, t, x, r, s), coeffs(g));
    }};
  }

  AuxSource aux_source() const {
    return {[L = layout, x = full()](int t, const Point2&, double r, double s) {
      const auto d = L->aux_dofs(t);
      Eigen::Matrix<double, 15, 1> c;
      for (int k = 0; k < 15; ++k) c(k) = x(d[k]);
      return AuxCol(aux_basis_ops(r, s) * c);
    }};
  }
};

/// Full mixed matrix [A(1) B^T; B -e^2 C] over the layout.
inline SpMat mixed_matrix(const ShellSystem& s, double eps) {
  const FormMatrices& F = *s.forms;
  SpMat Bt = F.B.transpose();
  return s.a_theta(1.0) + SpMat(F.B) + Bt - split_eps2(eps) * F.C;
}

inline ShellSolution solve_mixed(const ShellSystem& s, double eps) {
  if (!s.layout->has_aux()) throw ConfigError("mixed solve needs the auxiliary block");
  const SpMat K = mixed_matrix(s, eps);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(s.layout->size());
  f.head(s.layout->primal_size()) = s.load.head(s.layout->primal_size());
  const auto r = solve_symmetric(K, f, "raise the penalty or refine the mesh");
  ShellSolution sol;
  sol.method = Method::Mixed;
  sol.epsilon = eps;
  sol.penalty = s.penalty;
  sol.residual = r.residual;
  sol.solver = r.solver;
  sol.layout = s.layout;
  sol.primal = r.x.head(s.layout->primal_size());
  sol.aux = r.x.tail(s.layout->block3());
  return sol;
}

/// DG matrix and load on the leading n unknowns, in either scaling.
inline std::pair<SpMat, Eigen::VectorXd> dg_system(const ShellSystem& s, double eps, DgScaling scaling, int n) {
  if (scaling == DgScaling::Original)
    return {detail::leading_block(s.a_theta(membrane_coef(eps)), n), s.load.head(n)};
  const double e2 = split_eps2(eps);
  const FormMatrices& F = *s.forms;
  const double C = s.penalty;
  const SpMat r = F[R0] + C * F[Rp];
  const SpMat gt = F[G0] + C * F[Gp] + F[T0] + C * F[Tp];
  const SpMat K = e2 * r + (e2 + 1.0) * gt;
  return {detail::leading_block(K, n), e2 * s.load.head(n)};
}

inline ShellSolution solve_dg(const ShellSystem& s, double eps, DgScaling scaling = DgScaling::Scaled) {
  const int n = s.layout->block1();
  const auto [K, f] = dg_system(s, eps, scaling, n);
  const auto r = solve_symmetric(K, f, "check the mesh condition report or raise the penalty");
  ShellSolution sol;
  sol.method = Method::DG;
  sol.epsilon = eps;
  sol.penalty = s.penalty;
  sol.residual = r.residual;
  sol.solver = r.solver;
  sol.layout = s.layout;
  sol.primal = Eigen::VectorXd::Zero(s.layout->primal_size());
  sol.primal.head(n) = r.x;
  return sol;
}

/// Single-program path: the full system with parameter theta. Mixed uses
/// theta = 1 and the whole matrix; DG uses theta = eps^-2 and the leading
/// block-1 submatrix.
inline ShellSolution realize_via_theta(const ShellSystem& full, double eps, Method mode) {
  if (mode == Method::Mixed) return solve_mixed(full, eps);
  return solve_dg(full, eps, DgScaling::Original);
}

/// Reduced DG layout (P1 everywhere, no auxiliary block) for the problem.
inline ShellSolution solve_problem_dg(const Problem& p, double penalty = 0.0) {
  return solve_dg(assemble_system(p, false, false, penalty), p.epsilon, p.dg_scaling);
}

inline ShellSolution solve_problem_mixed(const Problem& p, double penalty = 0.0) {
  return solve_mixed(assemble_system(p, true, true, penalty), p.epsilon);
}

}  // namespace shellfem
