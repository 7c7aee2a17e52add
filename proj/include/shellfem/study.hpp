#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "shellfem/config.hpp"
#include "shellfem/norms.hpp"
#include "shellfem/output.hpp"
#include "shellfem/regime.hpp"
#include "shellfem/solve.hpp"

namespace shellfem {

inline std::vector<Method> methods_of(MethodChoice c) {
  if (c == MethodChoice::Mixed) return {Method::Mixed};
  if (c == MethodChoice::DG) return {Method::DG};
  return {Method::Mixed, Method::DG};
}

/// The epsilon-weighted energy norm e |x|_rho + |x|_gamma + |x|_tau (split e).
inline double weighted_energy(const NormReport& n, double eps) {
  return std::sqrt(split_eps2(eps)) * n.rho + n.gamma + n.tau;
}

struct SolveResult {
  ShellSystem system;
  ShellSolution solution;
  NormReport norms;
};

/// Solves one problem with one method. The penalty is shared through
/// `penalty` (0 selects it from the config or the probe on the enriched
/// space, so both methods see the same value).
inline SolveResult solve_with(const ProblemSpec& spec, const Problem& p, Method m, double penalty) {
  SolveResult r;
  if (m == Method::Mixed) {
    r.system = assemble_system(p, true, true, penalty);
    r.solution = solve_mixed(r.system, p.epsilon);
  } else if (spec.single_program || spec.theta) {
    r.system = assemble_system(p, true, true, penalty);
    const int n = r.system.layout->block1();
    const double theta = spec.theta ? *spec.theta : membrane_coef(p.epsilon);
    const auto ls = solve_symmetric(detail::leading_block(r.system.a_theta(theta), n), r.system.load.head(n));
    r.solution.method = Method::DG;
    r.solution.epsilon = p.epsilon;
    r.solution.penalty = r.system.penalty;
    r.solution.residual = ls.residual;
    r.solution.solver = ls.solver;
    r.solution.layout = r.system.layout;
    r.solution.primal = Eigen::VectorXd::Zero(r.system.layout->primal_size());
    r.solution.primal.head(n) = ls.x;
  } else {
    r.system = assemble_system(p, false, false, penalty);
    r.solution = solve_dg(r.system, p.epsilon, p.dg_scaling);
  }
  r.norms = solution_norms(p.mesh, r.system, r.solution);
  return r;
}

/// Penalty used by every solve of a study on this mesh.
inline double study_penalty(const Problem& p) {
  if (p.assembly.penalty_C > 0.0) return p.assembly.penalty_C;
  SpaceOptions opt = p.space;
  const DofLayout L(p.mesh, p.chart, opt, false);
  const Discretization d{p.mesh, p.chart, p.material, L, p.assembly};
  return probe_penalty(assemble_forms(d), L.primal_size(), initial_penalty(p));
}

inline void write_meshcond(const std::string& path, const std::vector<std::pair<int, const Mesh*>>& meshes,
                           const SurfaceChart& chart, double eps) {
  CsvWriter w(path, {"level", "h_max", "shape_regularity", "error_factor", "dg_condition_lhs", "dg_condition_met"});
  const double e = std::sqrt(split_eps2(eps));
  for (const auto& [lvl, m] : meshes) {
    const auto r = mesh_condition_report(*m, chart, e);
    w.row({std::to_string(lvl), fmt(m->h_max()), fmt(m->shape_regularity()), fmt(r.error_factor), fmt(r.dg_condition_lhs),
           r.dg_condition_met ? "yes" : "no"});
  }
}

inline std::vector<std::string> norm_cells(const NormReport& n) {
  return {fmt(n.rho),
          fmt(n.gamma),
          fmt(n.tau),
          fmt(n.a),
          fmt(n.H),
          fmt(n.V),
          fmt(n.weak_V),
          fmt(n.energy.bending),
          fmt(n.energy.membrane),
          fmt(n.energy.shear),
          fmt(n.energy.total_scaled),
          fmt(n.energy.total_original)};
}

inline const std::vector<std::string>& norm_header() {
  static const std::vector<std::string> h{"rho_norm",       "gamma_norm",      "tau_norm",     "a_norm",
                                          "H_norm",         "V_norm",          "weak_V_norm",  "bending_energy",
                                          "membrane_energy", "shear_energy",   "total_scaled", "total_original"};
  return h;
}

inline void run_solve(const ProblemSpec& spec, const std::string& out) {
  std::filesystem::create_directories(out);
  const Problem p = spec.problem();
  const double C = study_penalty(p);
  std::vector<std::string> header{"method", "epsilon", "penalty", "ndof", "residual"};
  const auto& nh = norm_header();
  header.insert(header.end(), nh.begin(), nh.end());
  CsvWriter w(out + "/norms.csv", header);
  std::vector<SolveResult> results;
  std::vector<VtkField> fields;
  for (Method m : methods_of(spec.method)) {
    results.push_back(solve_with(spec, p, m, C));
    const auto& r = results.back();
    std::vector<std::string> row{method_name(m), fmt(p.epsilon), fmt(r.system.penalty),
                                 std::to_string(r.solution.primal.size() + r.solution.aux.size()),
                                 fmt(r.solution.residual)};
    const auto cells = norm_cells(r.norms);
    row.insert(row.end(), cells.begin(), cells.end());
    w.row(row);
  }
  for (const auto& r : results)
    fields.push_back({method_name(r.solution.method), r.solution.layout.get(), r.solution.full()});
  write_vtk(out + "/fields.vtk", p.mesh, p.chart, fields);
  write_meshcond(out + "/meshcond.csv", {{0, &p.mesh}}, p.chart, p.epsilon);
}

/// Maps triangles of `fine` to their ancestors `levels` refinements up.
inline std::vector<int> ancestors(const std::vector<const Mesh*>& chain) {
  // chain: coarse, ..., fine; each mesh's parent() refers to the previous one
  std::vector<int> a(chain.back()->num_triangles());
  for (int t = 0; t < int(a.size()); ++t) a[t] = t;
  for (int k = int(chain.size()) - 1; k > 0; --k)
    for (int& t : a) t = chain[k]->parent()[t];
  return a;
}

struct ConvergenceRow {
  int level = 0;
  double h = 0.0;
  int ndof = 0;
  Method method = Method::Mixed;
  double err_H = 0.0, rel_H = 0.0, err_energy = 0.0, rel_energy = 0.0;
  double order_H = std::nan(""), order_energy = std::nan("");
  bool self = false;
};

/// Refinement study. With an exact solution, errors are measured against it;
/// otherwise level l is compared with level l + 1 (self-convergence) and one
/// extra level is solved.
inline std::vector<ConvergenceRow> convergence_study(const ProblemSpec& spec) {
  std::vector<Mesh> meshes{spec.mesh};
  const bool self = !spec.exact;
  const int nsolve = spec.levels + (self ? 1 : 0);
  for (int l = 1; l < nsolve; ++l) meshes.push_back(refine_uniform(meshes.back()));
  std::vector<ConvergenceRow> rows;
  for (Method m : methods_of(spec.method)) {
    std::vector<SolveResult> sols;
    std::vector<Problem> probs;
    for (int l = 0; l < nsolve; ++l) probs.push_back(spec.problem(meshes[l], spec.epsilon));
    for (int l = 0; l < nsolve; ++l) sols.push_back(solve_with(spec, probs[l], m, study_penalty(probs[l])));
    for (int l = 0; l < spec.levels; ++l) {
      ConvergenceRow r;
      r.level = l;
      r.h = meshes[l].h_max();
      r.ndof = int(sols[l].solution.primal.size() + sols[l].solution.aux.size());
      r.method = m;
      r.self = self;
      NormReport e, ref;
      if (!self) {
        const Discretization d{probs[l].mesh, probs[l].chart, probs[l].material, *sols[l].system.layout,
                               probs[l].assembly};
        e = discrete_norms(d, difference(spec.exact->source(), sols[l].solution.source()));
        ref = discrete_norms(d, spec.exact->source());
      } else {
        const Problem& pf = probs[l + 1];
        const Discretization d{pf.mesh, pf.chart, pf.material, *sols[l + 1].system.layout, pf.assembly};
        const PrimalSource coarse = coarse_source(*sols[l].solution.layout, meshes[l], sols[l].solution.full(),
                                                  ancestors({&meshes[l], &meshes[l + 1]}));
        e = discrete_norms(d, difference(sols[l + 1].solution.source(), coarse));
        ref = sols[l + 1].norms;
      }
      r.err_H = e.H;
      r.rel_H = ref.H > 0 ? e.H / ref.H : std::nan("");
      r.err_energy = weighted_energy(e, spec.epsilon);
      const double re = weighted_energy(ref, spec.epsilon);
      r.rel_energy = re > 0 ? r.err_energy / re : std::nan("");
      if (!rows.empty() && rows.back().method == m && r.err_H > 0) {
        const auto& prev = rows.back();
        const double hr = std::log(prev.h / r.h);
        r.order_H = std::log(prev.err_H / r.err_H) / hr;
        r.order_energy = std::log(prev.err_energy / r.err_energy) / hr;
      }
      rows.push_back(r);
    }
  }
  return rows;
}

/// Observed order between the first and last rows of one method.
inline double overall_order(const std::vector<ConvergenceRow>& rows, Method m, bool energy) {
  const ConvergenceRow *a = nullptr, *b = nullptr;
  for (const auto& r : rows)
    if (r.method == m) {
      if (!a) a = &r;
      b = &r;
    }
  if (!a || a == b) return std::nan("");
  const double ea = energy ? a->err_energy : a->err_H, eb = energy ? b->err_energy : b->err_H;
  return std::log(ea / eb) / std::log(a->h / b->h);
}

inline void run_converge(const ProblemSpec& spec, const std::string& out) {
  std::filesystem::create_directories(out);
  const auto rows = convergence_study(spec);
  CsvWriter w(out + "/convergence.csv", {"method", "level", "h", "ndof", "error_H", "rel_error_H", "order_H",
                                         "error_energy", "rel_error_energy", "order_energy", "reference"});
  for (const auto& r : rows)
    w.row({method_name(r.method), std::to_string(r.level), fmt(r.h), std::to_string(r.ndof), fmt(r.err_H),
           fmt(r.rel_H), fmt(r.order_H), fmt(r.err_energy), fmt(r.rel_energy), fmt(r.order_energy),
           r.self ? "self-convergence" : "exact"});
  std::vector<Mesh> meshes{spec.mesh};
  for (int l = 1; l < spec.levels; ++l) meshes.push_back(refine_uniform(meshes.back()));
  std::vector<std::pair<int, const Mesh*>> mc;
  for (int l = 0; l < spec.levels; ++l) mc.push_back({l, &meshes[l]});
  write_meshcond(out + "/meshcond.csv", mc, spec.chart, spec.epsilon);
}

struct LockingRow {
  double epsilon = 0.0;
  Method method = Method::Mixed;
  double norm_H = 0.0, energy = 0.0, rel_error = 0.0, rel_error_H = 0.0;
};

/// Fixed mesh, several thicknesses, both methods. The reference is the exact
/// solution when given, else the mixed solution on a refined mesh.
inline std::vector<LockingRow> locking_study(const ProblemSpec& spec) {
  std::vector<const Mesh*> chain{&spec.mesh};
  std::vector<Mesh> fine;
  fine.reserve(spec.reference_refinements);
  for (int k = 0; k < spec.reference_refinements; ++k) {
    fine.push_back(refine_uniform(k ? fine.back() : spec.mesh));
    chain.push_back(&fine.back());
  }
  const std::vector<int> anc = ancestors(chain);
  std::vector<LockingRow> rows;
  for (double eps : spec.epsilons) {
    const Problem p = spec.problem(spec.mesh, eps);
    const double C = study_penalty(p);
    std::optional<SolveResult> ref;
    std::optional<Problem> pf;
    if (!spec.exact) {
      pf = spec.problem(*chain.back(), eps);
      ref = solve_with(spec, *pf, Method::Mixed, study_penalty(*pf));
    }
    for (Method m : {Method::Mixed, Method::DG}) {
      const SolveResult r = solve_with(spec, p, m, C);
      LockingRow row;
      row.epsilon = eps;
      row.method = m;
      row.norm_H = r.norms.H;
      row.energy = r.norms.energy.total_scaled;
      if (spec.exact) {
        const Discretization d{p.mesh, p.chart, p.material, *r.system.layout, p.assembly};
        const auto e = discrete_norms(d, difference(spec.exact->source(), r.solution.source()));
        const auto x = discrete_norms(d, spec.exact->source());
        row.rel_error = weighted_energy(e, eps) / weighted_energy(x, eps);
        row.rel_error_H = e.H / x.H;
      } else {
        const Discretization d{pf->mesh, pf->chart, pf->material, *ref->system.layout, pf->assembly};
        const PrimalSource coarse = coarse_source(*r.solution.layout, spec.mesh, r.solution.full(), anc);
        const auto e = discrete_norms(d, difference(ref->solution.source(), coarse));
        row.rel_error = weighted_energy(e, eps) / weighted_energy(ref->norms, eps);
        row.rel_error_H = e.H / ref->norms.H;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

inline void run_locking(const ProblemSpec& spec, const std::string& out) {
  std::filesystem::create_directories(out);
  const auto rows = locking_study(spec);
  CsvWriter w(out + "/locking.csv", {"epsilon", "method", "H_norm", "total_scaled_energy", "rel_energy_error",
                                     "rel_H_error", "reference"});
  for (const auto& r : rows)
    w.row({fmt(r.epsilon), method_name(r.method), fmt(r.norm_H), fmt(r.energy), fmt(r.rel_error), fmt(r.rel_error_H),
           spec.exact ? "exact" : "refined-mixed"});
  write_meshcond(out + "/meshcond.csv", {{0, &spec.mesh}}, spec.chart, spec.epsilons.empty() ? spec.epsilon : spec.epsilons.back());
}

inline std::string regime_text(const RegimeReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << "verdict: " << verdict_name(r.verdict) << "\n"
     << "epsilon: " << r.epsilon << "\n"
     << "half epsilon: " << r.half_epsilon << "\n"
     << "penalty: " << r.penalty << "\n"
     << "H norm, mixed at epsilon: " << r.norm_mixed_eps << "\n"
     << "H norm, mixed at half epsilon: " << r.norm_mixed_half_eps << "\n"
     << "H norm, extrapolation: " << r.norm_extrap << "\n"
     << "H norm, DG at epsilon: " << r.norm_dg << "\n"
     << "ratio DG / mixed: " << r.dg_over_mixed << "\n"
     << "ratio half / epsilon: " << r.half_over_eps << "\n"
     << "ratio extrapolation / epsilon: " << r.extrap_over_eps << "\n"
     << "thresholds: big " << r.thresholds.big << ", zero " << r.thresholds.zero << ", stabilize "
     << r.thresholds.stabilize << "\n"
     << "mesh condition at epsilon: lhs " << r.mesh_eps.dg_condition_lhs << (r.mesh_eps.dg_condition_met ? " (satisfied)" : " (violated)")
     << "\n"
     << "mesh condition at half epsilon: lhs " << r.mesh_half_eps.dg_condition_lhs
     << (r.mesh_half_eps.dg_condition_met ? " (satisfied)" : " (violated)") << "\n";
  return os.str();
}

inline RegimeReport run_regime(const ProblemSpec& spec, const std::string& out) {
  std::filesystem::create_directories(out);
  const Problem p = spec.problem();
  const RegimeRun run = detect_regime(p, spec.thresholds);
  std::ofstream(out + "/regime.txt") << regime_text(run.report);
  CsvWriter w(out + "/regime.csv", {"norm_mixed_eps", "norm_mixed_half_eps", "norm_extrap", "norm_dg",
                                    "dg_over_mixed", "half_over_eps", "extrap_over_eps", "verdict"});
  const auto& r = run.report;
  w.row({fmt(r.norm_mixed_eps), fmt(r.norm_mixed_half_eps), fmt(r.norm_extrap), fmt(r.norm_dg),
         fmt(r.dg_over_mixed), fmt(r.half_over_eps), fmt(r.extrap_over_eps), verdict_name(r.verdict)});
  std::vector<VtkField> fields{{"mixed", run.mixed.layout.get(), run.mixed.full()},
                               {"dg", run.dg.layout.get(), run.dg.full()}};
  write_vtk(out + "/fields.vtk", p.mesh, p.chart, fields, {{"extrap_norm", r.element_extrap}});
  write_meshcond(out + "/meshcond.csv", {{0, &p.mesh}}, p.chart, p.epsilon);
  return r;
}

}  // namespace shellfem
