#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "shellfem/error.hpp"
#include "shellfem/expression.hpp"
#include "shellfem/geometry.hpp"
#include "shellfem/manufactured.hpp"
#include "shellfem/mesh.hpp"
#include "shellfem/regime.hpp"
#include "shellfem/solve.hpp"

namespace shellfem {

/// Section/key/value text: `[section]` headers, `key = value` lines,
/// comments from `#` or `;` to end of line. Keys are unique per section.
class IniFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
    mutable bool used = false;
  };

  static IniFile parse(const std::string& text) {
    IniFile f;
    std::istringstream in(text);
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      const auto c = raw.find_first_of("#;");
      std::string s = trim(c == std::string::npos ? raw : raw.substr(0, c));
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') throw ConfigError("line " + std::to_string(line) + ": unterminated section header");
        section = trim(s.substr(1, s.size() - 2));
        f.sections_.push_back(section);
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line) + ": expected key = value");
      const std::string key = trim(s.substr(0, eq));
      if (section.empty()) throw ConfigError("line " + std::to_string(line) + ": key outside of a section");
      auto& sec = f.data_[section];
      if (sec.count(key)) throw ConfigError("line " + std::to_string(line) + ": duplicate key '" + key + "'");
      sec[key] = {trim(s.substr(eq + 1)), line};
    }
    return f;
  }

  bool has(const std::string& sec, const std::string& key) const {
    auto it = data_.find(sec);
    return it != data_.end() && it->second.count(key);
  }
  bool has_section(const std::string& sec) const { return data_.count(sec) > 0; }

  const Entry* find(const std::string& sec, const std::string& key) const {
    auto it = data_.find(sec);
    if (it == data_.end()) return nullptr;
    auto k = it->second.find(key);
    if (k == it->second.end()) return nullptr;
    k->second.used = true;
    return &k->second;
  }

  std::string get(const std::string& sec, const std::string& key, const std::string& def) const {
    const Entry* e = find(sec, key);
    return e ? e->value : def;
  }

  double number(const std::string& sec, const std::string& key, double def) const {
    const Entry* e = find(sec, key);
    if (!e) return def;
    try {
      std::size_t pos = 0;
      const double v = std::stod(e->value, &pos);
      if (pos == e->value.size()) return v;
    } catch (const std::exception&) {
    }
    // allow constant expressions such as pi/3
    try {
      return Expression::parse(e->value)(0.0, 0.0);
    } catch (const ConfigError& err) {
      throw ConfigError(where(sec, key, *e) + ": not a number (" + err.what() + ")");
    }
  }

  int integer(const std::string& sec, const std::string& key, int def) const {
    const double v = number(sec, key, def);
    if (v != std::floor(v)) throw ConfigError(where(sec, key, *find(sec, key)) + ": expected an integer");
    return int(v);
  }

  bool boolean(const std::string& sec, const std::string& key, bool def) const {
    const Entry* e = find(sec, key);
    if (!e) return def;
    if (e->value == "true" || e->value == "yes" || e->value == "1" || e->value == "on") return true;
    if (e->value == "false" || e->value == "no" || e->value == "0" || e->value == "off") return false;
    throw ConfigError(where(sec, key, *e) + ": expected true or false");
  }

  std::vector<double> list(const std::string& sec, const std::string& key) const {
    const Entry* e = find(sec, key);
    std::vector<double> out;
    if (!e) return out;
    std::stringstream ss(e->value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      try {
        out.push_back(Expression::parse(item)(0.0, 0.0));
      } catch (const ConfigError& err) {
        throw ConfigError(where(sec, key, *e) + ": bad list item '" + item + "'");
      }
    }
    return out;
  }

  Expression expression(const std::string& sec, const std::string& key, const std::string& def) const {
    const Entry* e = find(sec, key);
    try {
      return Expression::parse(e ? e->value : def);
    } catch (const ConfigError& err) {
      throw ConfigError((e ? where(sec, key, *e) : sec + "." + key) + ": " + err.what());
    }
  }

  /// Throws on the first key that no accessor has read.
  void check_all_used() const {
    for (const auto& [sec, keys] : data_)
      for (const auto& [k, e] : keys)
        if (!e.used) throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + k + "' in [" + sec + "]");
  }

  static std::string where(const std::string& sec, const std::string& key, const Entry& e) {
    return "line " + std::to_string(e.line) + " (" + sec + "." + key + ")";
  }

 private:
  std::map<std::string, std::map<std::string, Entry>> data_;
  std::vector<std::string> sections_;

  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }
};

enum class MethodChoice { Mixed, DG, Both };
enum class ScalingChoice { Auto, Original, Scaled };

/// Everything a study needs, parsed from a config file.
struct ProblemSpec {
  SurfaceChart chart;
  Mesh mesh;
  std::string mesh_source;
  Material material;
  double epsilon = 0.1;
  LoadFunctional loads;
  std::optional<ManufacturedSolution> exact;
  std::array<Expression, 10> load_expr;  // p1 p2 p3 q1 q2 q3 r1 r2 m1 m2
  MethodChoice method = MethodChoice::Both;
  ScalingChoice scaling = ScalingChoice::Auto;
  bool single_program = false;
  std::optional<double> theta;
  AssemblyConfig assembly;
  SpaceOptions space;
  int levels = 3;
  std::vector<double> epsilons{1e-2, 1e-3, 1e-4};
  int reference_refinements = 1;
  RegimeThresholds thresholds;

  DgScaling dg_scaling(double eps) const {
    if (scaling == ScalingChoice::Original) return DgScaling::Original;
    if (scaling == ScalingChoice::Scaled) return DgScaling::Scaled;
    return eps <= 1e-2 ? DgScaling::Scaled : DgScaling::Original;
  }

  /// Problem at a given half-thickness on a given mesh. Manufactured loads
  /// are rebuilt for that thickness; given loads are kept.
  Problem problem(const Mesh& m, double eps) const {
    Problem p;
    p.mesh = m;
    p.chart = chart;
    p.material = material;
    p.epsilon = eps;
    p.loads = exact ? exact->loads(material, membrane_coef(eps)) : loads;
    p.assembly = assembly;
    p.space = space;
    p.dg_scaling = dg_scaling(eps);
    return p;
  }
  Problem problem() const { return problem(mesh, epsilon); }
};

namespace detail {

inline Tag tag_value(const IniFile& ini, const std::string& key, Tag def) {
  const auto* e = ini.find("boundary", key);
  if (!e) return def;
  try {
    return parse_tag(e->value);
  } catch (const Error&) {
    throw ConfigError(IniFile::where("boundary", key, *e) + ": tag must be D, S or F");
  }
}

inline Grading grading(const IniFile& ini, const std::string& axis) {
  Grading g;
  g.ratio = ini.number("mesh", "grade_" + axis, 1.0);
  const std::string t = ini.get("mesh", "grade_" + axis + "_toward", "low");
  if (t == "low")
    g.toward = Grading::Toward::Low;
  else if (t == "high")
    g.toward = Grading::Toward::High;
  else if (t == "both")
    g.toward = Grading::Toward::Both;
  else
    throw ConfigError("mesh.grade_" + axis + "_toward must be low, high or both");
  return g;
}

inline LoadFunctional given_loads(const std::array<Expression, 10>& e) {
  LoadFunctional L;
  // p^a, p^3 act on (u, w); m^a act on theta
  L.volume = [e](const Point2& x, const GeometryEval&) {
    return std::array<double, 5>{e[8](x[0], x[1]), e[9](x[0], x[1]), e[0](x[0], x[1]), e[1](x[0], x[1]),
                                 e[2](x[0], x[1])};
  };
  // per unit arc length: r^a on S and F, q^a, q^3 on F
  L.boundary = [e](const Point2& x, const GeometryEval& g, Tag tag, const Point2&, const Point2& t) {
    std::array<double, 5> r{};
    if (tag != Tag::S && tag != Tag::F) return r;
    const double s = arc_factor(g, t);
    r[0] = s * e[6](x[0], x[1]);
    r[1] = s * e[7](x[0], x[1]);
    if (tag == Tag::F) {
      r[2] = s * e[3](x[0], x[1]);
      r[3] = s * e[4](x[0], x[1]);
      r[4] = s * e[5](x[0], x[1]);
    }
    return r;
  };
  return L;
}

}  // namespace detail

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Parses a config. `base_dir` resolves relative mesh file paths.
inline ProblemSpec parse_problem(const std::string& text, const std::string& base_dir = ".") {
  const IniFile ini = IniFile::parse(text);
  ProblemSpec s;

  const std::string kind = ini.get("chart", "kind", "plate");
  if (kind == "plate")
    s.chart = SurfaceChart::plate();
  else if (kind == "cylinder")
    s.chart = SurfaceChart::cylinder(ini.number("chart", "radius", 1.0));
  else if (kind == "sphere")
    s.chart = SurfaceChart::sphere(ini.number("chart", "radius", 1.0));
  else if (kind == "hypar")
    s.chart = SurfaceChart::hypar(ini.number("chart", "c11", 0.0), ini.number("chart", "c12", 1.0),
                                  ini.number("chart", "c22", 0.0));
  else if (kind == "expression")
    s.chart = SurfaceChart(charts::ExpressionChart(ini.expression("chart", "x", "x1"),
                                                   ini.expression("chart", "y", "x2"),
                                                   ini.expression("chart", "z", "0")));
  else
    throw ConfigError("chart.kind must be plate, cylinder, sphere, hypar or expression");

  const double x0 = ini.number("domain", "x0", 0.0), x1 = ini.number("domain", "x1", 1.0);
  const double y0 = ini.number("domain", "y0", 0.0), y1 = ini.number("domain", "y1", 1.0);

  const int refine = ini.integer("mesh", "refine", 0);
  if (ini.has("mesh", "file")) {
    std::string path = ini.get("mesh", "file", "");
    if (!path.empty() && path.front() != '/') path = base_dir + "/" + path;
    s.mesh = load_mesh(read_file(path));
    s.mesh_source = path;
  } else {
    RectMeshSpec r;
    r.x0 = x0;
    r.x1 = x1;
    r.y0 = y0;
    r.y1 = y1;
    r.nx = ini.integer("mesh", "nx", 4);
    r.ny = ini.integer("mesh", "ny", r.nx);
    r.grade_x = detail::grading(ini, "x");
    r.grade_y = detail::grading(ini, "y");
    r.tags = {detail::tag_value(ini, "bottom", Tag::D), detail::tag_value(ini, "right", Tag::D),
              detail::tag_value(ini, "top", Tag::D), detail::tag_value(ini, "left", Tag::D)};
    s.mesh = generate_rect_mesh(r);
    s.mesh_source = "generated";
  }
  for (int k = 0; k < refine; ++k) s.mesh = refine_uniform(s.mesh);
  {
    // the chart domain is the bounding box of the mesh
    double lo0 = 1e300, hi0 = -1e300, lo1 = 1e300, hi1 = -1e300;
    for (const auto& v : s.mesh.vertices()) {
      lo0 = std::min(lo0, v[0]);
      hi0 = std::max(hi0, v[0]);
      lo1 = std::min(lo1, v[1]);
      hi1 = std::max(hi1, v[1]);
    }
    s.chart.set_domain(Polygon::rectangle(lo0, hi0, lo1, hi1));
  }

  s.material.lambda = ini.number("material", "lambda", 1.0);
  s.material.mu = ini.number("material", "mu", 1.0);
  s.material.kappa = ini.number("material", "kappa", 5.0 / 6.0);
  s.material.validate();
  s.epsilon = ini.number("material", "epsilon", 0.1);
  split_eps2(s.epsilon);

  static const char* load_keys[] = {"p1", "p2", "p3", "q1", "q2", "q3", "r1", "r2", "m1", "m2"};
  for (int k = 0; k < 10; ++k) s.load_expr[k] = ini.expression("loads", load_keys[k], "0");
  s.loads = detail::given_loads(s.load_expr);

  if (ini.has_section("exact")) {
    static const char* keys[] = {"theta1", "theta2", "u1", "u2", "w"};
    std::array<Expression, 5> f;
    for (int k = 0; k < 5; ++k) f[k] = ini.expression("exact", keys[k], "0");
    s.exact = ManufacturedSolution(f);
  }

  const std::string method = ini.get("method", "method", "both");
  if (method == "mixed")
    s.method = MethodChoice::Mixed;
  else if (method == "dg")
    s.method = MethodChoice::DG;
  else if (method == "both")
    s.method = MethodChoice::Both;
  else
    throw ConfigError("method.method must be mixed, dg or both");
  const std::string pen = ini.get("method", "penalty", "auto");
  if (pen != "auto") {
    s.assembly.penalty_C = ini.number("method", "penalty", 0.0);
    if (!(s.assembly.penalty_C > 0.0)) throw ConfigError("method.penalty must be positive or auto");
  }
  if (ini.has("method", "theta")) {
    s.theta = ini.number("method", "theta", 1.0);
    if (!(*s.theta >= 0.0)) throw ConfigError("method.theta must be nonnegative");
  }
  s.single_program = ini.boolean("method", "single_program", false);
  const std::string sc = ini.get("method", "dg_scaling", "auto");
  if (sc == "auto")
    s.scaling = ScalingChoice::Auto;
  else if (sc == "original")
    s.scaling = ScalingChoice::Original;
  else if (sc == "scaled")
    s.scaling = ScalingChoice::Scaled;
  else
    throw ConfigError("method.dg_scaling must be auto, original or scaled");
  s.space.enrichment = ini.boolean("method", "enrichment", true);
  s.space.full_spaces = ini.boolean("method", "full_spaces", false);
  s.assembly.quad_tri_degree = ini.integer("method", "quad_degree", 8);
  s.assembly.quad_edge_points = ini.integer("method", "edge_points", 5);
  if (s.assembly.quad_tri_degree < 1 || s.assembly.quad_tri_degree > 20)
    throw ConfigError("method.quad_degree must be in 1..20");
  if (s.assembly.quad_edge_points < 1 || s.assembly.quad_edge_points > 20)
    throw ConfigError("method.edge_points must be in 1..20");
  s.space.quad_degree = s.assembly.quad_tri_degree;

  s.levels = ini.integer("study", "levels", 3);
  if (s.levels < 1) throw ConfigError("study.levels must be at least 1");
  if (ini.has("study", "epsilons")) s.epsilons = ini.list("study", "epsilons");
  for (double e : s.epsilons) split_eps2(e);
  s.reference_refinements = ini.integer("study", "reference_refinements", 1);
  s.thresholds.big = ini.number("study", "t_big", 10.0);
  s.thresholds.zero = ini.number("study", "t_zero", 0.1);
  s.thresholds.stabilize = ini.number("study", "stabilize", 0.05);

  ini.check_all_used();
  return s;
}

inline ProblemSpec load_problem(const std::string& path) {
  const auto slash = path.find_last_of('/');
  return parse_problem(read_file(path), slash == std::string::npos ? "." : path.substr(0, slash));
}

}  // namespace shellfem
