#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "shellfem/error.hpp"
#include "shellfem/fe_space.hpp"
#include "shellfem/geometry.hpp"
#include "shellfem/mesh.hpp"

namespace shellfem {

/// Fixed-format number for CSV output; identical input gives identical bytes.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw Error("cannot write " + path);
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

/// One named discrete primal field for VTK output.
struct VtkField {
  std::string name;
  const DofLayout* layout;
  Eigen::VectorXd coeffs;
};

/// Legacy ASCII unstructured grid. Each triangle gets its own three points on
/// the midsurface so discontinuous fields keep their per-corner values.
inline void write_vtk(const std::string& path, const Mesh& mesh, const SurfaceChart& chart,
                      const std::vector<VtkField>& fields, const std::vector<std::pair<std::string, std::vector<double>>>&
                                                                   cell_data = {}) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  const int nt = mesh.num_triangles();
  out << "# vtk DataFile Version 3.0\nshell fields\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << 3 * nt << " double\n";
  char buf[128];
  for (int t = 0; t < nt; ++t)
    for (const auto& c : mesh.corners(t)) {
      const Vec3 x = chart.position(c);
      std::snprintf(buf, sizeof buf, "%.10e %.10e %.10e\n", x[0], x[1], x[2]);
      out << buf;
    }
  out << "CELLS " << nt << " " << 4 * nt << "\n";
  for (int t = 0; t < nt; ++t) out << "3 " << 3 * t << " " << 3 * t + 1 << " " << 3 * t + 2 << "\n";
  out << "CELL_TYPES " << nt << "\n";
  for (int t = 0; t < nt; ++t) out << "5\n";
  if (!cell_data.empty()) {
    out << "CELL_DATA " << nt << "\n";
    for (const auto& [name, v] : cell_data) {
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (double x : v) {
        std::snprintf(buf, sizeof buf, "%.10e\n", x);
        out << buf;
      }
    }
  }
  out << "POINT_DATA " << 3 * nt << "\n";
  const double rs[3][2] = {{0, 0}, {1, 0}, {0, 1}};
  for (const auto& f : fields) {
    std::vector<FieldSample<double>> samples;
    samples.reserve(3 * nt);
    for (int t = 0; t < nt; ++t) {
      const ElementMap m(mesh.corners(t));
      for (const auto& p : rs) samples.push_back(eval_primal(*f.layout, m, t, f.coeffs, p[0], p[1]));
    }
    auto vec = [&](const std::string& n, auto get) {
      out << "VECTORS " << f.name << "_" << n << " double\n";
      for (const auto& s : samples) {
        const auto v = get(s);
        std::snprintf(buf, sizeof buf, "%.10e %.10e 0\n", v[0], v[1]);
        out << buf;
      }
    };
    vec("theta", [](const FieldSample<double>& s) { return s.theta; });
    vec("u", [](const FieldSample<double>& s) { return s.u; });
    out << "SCALARS " << f.name << "_w double 1\nLOOKUP_TABLE default\n";
    for (const auto& s : samples) {
      std::snprintf(buf, sizeof buf, "%.10e\n", s.w);
      out << buf;
    }
  }
}

}  // namespace shellfem
