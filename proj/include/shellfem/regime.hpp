#pragma once

#include <cmath>
#include <string>

#include "shellfem/mesh.hpp"
#include "shellfem/norms.hpp"
#include "shellfem/solve.hpp"

namespace shellfem {

struct RegimeThresholds {
  double big = 10.0;        // mixed / DG ratio that signals locking of DG
  double zero = 0.1;        // extrapolated norm counted as vanishing
  double stabilize = 0.05;  // relative change counted as a settled limit
};

enum class Verdict { Bending, NonBending, Inconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Bending: return "bending-dominated";
    case Verdict::NonBending: return "non-bending (membrane/shear or intermediate)";
    default: return "inconclusive";
  }
}

struct RegimeReport {
  double epsilon = 0.0, half_epsilon = 0.0;
  double norm_mixed_eps = 0.0, norm_mixed_half_eps = 0.0, norm_extrap = 0.0, norm_dg = 0.0;
  double dg_over_mixed = 0.0, extrap_over_eps = 0.0, half_over_eps = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  RegimeThresholds thresholds;
  MeshConditionReport mesh_eps, mesh_half_eps;
  double penalty = 0.0;
  std::vector<double> element_extrap;  // per-element H_h volume part of the extrapolation
};

/// (4 x_half - x) / 3: removes the e^2 term of x(e) = x0 + e^2 v.
inline Eigen::VectorXd extrapolate(const Eigen::VectorXd& x_eps, const Eigen::VectorXd& x_half) {
  return (4.0 * x_half - x_eps) / 3.0;
}

inline Verdict classify(double n_eps, double n_half, double n_extrap, double n_dg, const RegimeThresholds& th) {
  if (n_dg > 0.0 ? n_eps / n_dg >= th.big : n_eps > 0.0) return Verdict::Bending;
  const bool decreasing = n_eps > n_half && n_half > n_extrap;
  if (decreasing && n_extrap <= th.zero * n_eps) return Verdict::NonBending;
  if (std::abs(n_extrap - n_half) <= th.stabilize * n_half && n_extrap > th.zero * n_eps) return Verdict::Bending;
  return Verdict::Inconclusive;
}

inline RegimeReport make_report(double n_eps, double n_half, double n_extrap, double n_dg,
                                const RegimeThresholds& th) {
  RegimeReport r;
  r.norm_mixed_eps = n_eps;
  r.norm_mixed_half_eps = n_half;
  r.norm_extrap = n_extrap;
  r.norm_dg = n_dg;
  r.dg_over_mixed = n_eps > 0 ? n_dg / n_eps : 0.0;
  r.extrap_over_eps = n_eps > 0 ? n_extrap / n_eps : 0.0;
  r.half_over_eps = n_eps > 0 ? n_half / n_eps : 0.0;
  r.thresholds = th;
  r.verdict = classify(n_eps, n_half, n_extrap, n_dg, th);
  return r;
}

struct RegimeRun {
  RegimeReport report;
  ShellSolution mixed, mixed_half, dg;
};

/// Runs the mixed method at eps and at half the split parameter, the DG
/// method at eps, and classifies the problem. Loads are taken as given
/// (independent of eps).
inline RegimeRun detect_regime(const Problem& p, const RegimeThresholds& th = {}) {
  const double e = std::sqrt(split_eps2(p.epsilon));
  const double eps_half = eps_from_split(0.5 * e);
  const ShellSystem full = assemble_system(p, true, true);
  const ShellSystem reduced = assemble_system(p, false, false, full.penalty);
  RegimeRun run;
  run.mixed = solve_mixed(full, p.epsilon);
  run.mixed_half = solve_mixed(full, eps_half);
  run.dg = solve_dg(reduced, p.epsilon, p.dg_scaling);
  const SpMat& QHf = (*full.forms)[QH];
  const Eigen::VectorXd x0 = run.mixed.full(), x1 = run.mixed_half.full();
  Eigen::VectorXd xe = Eigen::VectorXd::Zero(x0.size());
  const int np = full.layout->primal_size();
  xe.head(np) = extrapolate(x0.head(np), x1.head(np));
  const double n_eps = safe_sqrt(quad_form(QHf, x0));
  const double n_half = safe_sqrt(quad_form(QHf, x1));
  const double n_ext = safe_sqrt(quad_form(QHf, xe));
  const double n_dg = safe_sqrt(quad_form((*reduced.forms)[QH], run.dg.full()));
  run.report = make_report(n_eps, n_half, n_ext, n_dg, th);
  run.report.epsilon = p.epsilon;
  run.report.half_epsilon = eps_half;
  run.report.penalty = full.penalty;
  run.report.mesh_eps = mesh_condition_report(p.mesh, p.chart, e);
  run.report.mesh_half_eps = mesh_condition_report(p.mesh, p.chart, 0.5 * e);
  // element map: volume part of the H_h norm of the extrapolation
  const TriangleRule tq = triangle_rule(p.assembly.quad_tri_degree);
  for (int t = 0; t < p.mesh.num_triangles(); ++t) {
    const ElementMap m(p.mesh.corners(t));
    double s = 0.0;
    for (std::size_t k = 0; k < tq.points.size(); ++k) {
      const FieldSample<double> f = eval_primal(*full.layout, m, t, xe, tq.points[k][0], tq.points[k][1]);
      double v = f.w * f.w + f.grad_w[0] * f.grad_w[0] + f.grad_w[1] * f.grad_w[1];
      for (int a = 0; a < 2; ++a) {
        v += f.theta[a] * f.theta[a] + f.u[a] * f.u[a];
        for (int b = 0; b < 2; ++b) v += f.grad_theta[a][b] * f.grad_theta[a][b] + f.grad_u[a][b] * f.grad_u[a][b];
      }
      s += tq.weights[k] * std::abs(m.det) * v;
    }
    run.report.element_extrap.push_back(std::sqrt(s));
  }
  return run;
}

inline const ShellSolution& recommend_solution(const RegimeReport& r, const ShellSolution& mixed,
                                               const ShellSolution& dg) {
  switch (r.verdict) {
    case Verdict::Bending: return mixed;
    case Verdict::NonBending: return dg;
    default:
      throw SolverError("regime verdict is inconclusive; refine the mesh or adjust the thresholds");
  }
}

}  // namespace shellfem
