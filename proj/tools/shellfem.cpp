#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>

#include "shellfem/shellfem.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Naghdi shell finite elements: mixed and DG methods"};
  app.require_subcommand(1);
  std::string config, out = ".";
  int jobs = 1;
  const char* names[] = {"solve", "converge", "locking", "regime"};
  const char* help[] = {"single solve: norms.csv, fields.vtk, meshcond.csv",
                        "uniform refinement study: convergence.csv, meshcond.csv",
                        "fixed mesh, several thicknesses: locking.csv, meshcond.csv",
                        "bending / non-bending detection: regime.txt, regime.csv, fields.vtk, meshcond.csv"};
  for (int k = 0; k < 4; ++k) {
    auto* sub = app.add_subcommand(names[k], help[k]);
    sub->add_option("config", config, "problem configuration file")->required();
    sub->add_option("--jobs", jobs, "assembly threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", out, "output directory");
  }
  CLI11_PARSE(app, argc, argv);

  try {
    shellfem::ProblemSpec spec = shellfem::load_problem(config);
    spec.assembly.jobs = jobs;
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "solve") {
      shellfem::run_solve(spec, out);
    } else if (cmd == "converge") {
      shellfem::run_converge(spec, out);
    } else if (cmd == "locking") {
      shellfem::run_locking(spec, out);
    } else {
      const auto r = shellfem::run_regime(spec, out);
      std::printf("%s\n", shellfem::verdict_name(r.verdict));
    }
  } catch (const shellfem::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
