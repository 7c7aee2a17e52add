#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "shellfem/error.hpp"
#include "shellfem/geometry.hpp"

namespace shellfem {

enum class Tag { Interior, D, S, F };

inline char tag_char(Tag t) {
  switch (t) {
    case Tag::D: return 'D';
    case Tag::S: return 'S';
    case Tag::F: return 'F';
    default: return 'I';
  }
}

inline Tag parse_tag(const std::string& s) {
  if (s == "D") return Tag::D;
  if (s == "S") return Tag::S;
  if (s == "F") return Tag::F;
  throw ConfigError("boundary tag must be D, S or F, got '" + s + "'");
}

struct BoundarySegment {
  int a = 0, b = 0;
  Tag tag = Tag::D;
};

/// One mesh edge. For interior edges side 0 is the lower triangle index,
/// which fixes the jump sign [v] = v|side0 - v|side1.
struct Edge {
  std::array<int, 2> v{};
  std::array<int, 2> tri{-1, -1};
  std::array<int, 2> local{-1, -1};  // local edge index in each triangle
  Tag tag = Tag::Interior;
  double length = 0.0;

  bool interior() const { return tri[1] >= 0; }
};

/// Parameter-plane data of an edge as seen from one adjacent triangle.
struct EdgeGeometry {
  Point2 nbar{};     // unit outward normal
  Point2 tangent{};  // unit tangent, v[0] -> v[1]
  double length = 0.0;
  int side = 0;
};

class Mesh {
public:
  Mesh() = default;

  /// Builds adjacency and validates. Clockwise triangles are reordered; each
  /// reorder is recorded in notes().
  Mesh(std::vector<Point2> vertices, std::vector<std::array<int, 3>> triangles,
       std::vector<BoundarySegment> boundary)
      : vertices_(std::move(vertices)), triangles_(std::move(triangles)), boundary_(std::move(boundary)) {
    build();
  }

  const std::vector<Point2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<BoundarySegment>& boundary_segments() const { return boundary_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& interior_edges() const { return interior_; }
  const std::vector<int>& boundary_edges() const { return boundary_edges_; }
  const std::array<int, 3>& triangle_edges(int t) const { return tri_edges_[t]; }
  const std::vector<std::string>& notes() const { return notes_; }

  int num_vertices() const { return int(vertices_.size()); }
  int num_triangles() const { return int(triangles_.size()); }

  std::array<Point2, 3> corners(int t) const {
    const auto& tr = triangles_[t];
    return {vertices_[tr[0]], vertices_[tr[1]], vertices_[tr[2]]};
  }

  double area(int t) const {
    const auto c = corners(t);
    return 0.5 * ((c[1][0] - c[0][0]) * (c[2][1] - c[0][1]) - (c[2][0] - c[0][0]) * (c[1][1] - c[0][1]));
  }

  /// Diameter: longest edge.
  double h_tau(int t) const {
    const auto c = corners(t);
    double h = 0.0;
    for (int i = 0; i < 3; ++i) h = std::max(h, dist(c[i], c[(i + 1) % 3]));
    return h;
  }

  double h_max() const {
    double h = 0.0;
    for (int t = 0; t < num_triangles(); ++t) h = std::max(h, h_tau(t));
    return h;
  }

  /// Circumscribed over inscribed diameter of one triangle.
  double shape_ratio(int t) const {
    const auto c = corners(t);
    const double a = dist(c[1], c[2]), b = dist(c[0], c[2]), e = dist(c[0], c[1]);
    const double A = area(t);
    const double circ = a * b * e / (2.0 * A);
    const double insc = 4.0 * A / (a + b + e);
    return circ / insc;
  }

  double shape_regularity() const {
    double k = 0.0;
    for (int t = 0; t < num_triangles(); ++t) k = std::max(k, shape_ratio(t));
    return k;
  }

  /// Edge geometry seen from side s (0 or 1) of edge e.
  EdgeGeometry edge_geometry(int e, int s = 0) const {
    const Edge& ed = edges_[e];
    const Point2& p = vertices_[ed.v[0]];
    const Point2& q = vertices_[ed.v[1]];
    EdgeGeometry g;
    g.length = ed.length;
    g.side = s;
    g.tangent = {(q[0] - p[0]) / ed.length, (q[1] - p[1]) / ed.length};
    Point2 n{g.tangent[1], -g.tangent[0]};
    const auto& tr = triangles_[ed.tri[s]];
    const Point2& opp = vertices_[tr[ed.local[s]]];
    if ((opp[0] - p[0]) * n[0] + (opp[1] - p[1]) * n[1] > 0) n = {-n[0], -n[1]};
    g.nbar = n;
    return g;
  }

  /// Number of local edges of triangle t tagged F.
  int free_edge_count(int t) const {
    int n = 0;
    for (int e : tri_edges_[t]) n += edges_[e].tag == Tag::F;
    return n;
  }

  /// Child-to-parent triangle map, filled by refine_uniform.
  const std::vector<int>& parent() const { return parent_; }
  void set_parent(std::vector<int> p) { parent_ = std::move(p); }

  /// Index of the triangle containing x (closed), or -1.
  int locate(const Point2& x, double tol = 1e-12) const {
    for (int t = 0; t < num_triangles(); ++t) {
      const auto c = corners(t);
      const auto l = barycentric(c, x);
      if (l[0] >= -tol && l[1] >= -tol && l[2] >= -tol) return t;
    }
    return -1;
  }

  static std::array<double, 3> barycentric(const std::array<Point2, 3>& c, const Point2& x) {
    const double det = (c[1][0] - c[0][0]) * (c[2][1] - c[0][1]) - (c[2][0] - c[0][0]) * (c[1][1] - c[0][1]);
    const double l1 = ((x[0] - c[0][0]) * (c[2][1] - c[0][1]) - (c[2][0] - c[0][0]) * (x[1] - c[0][1])) / det;
    const double l2 = ((c[1][0] - c[0][0]) * (x[1] - c[0][1]) - (x[0] - c[0][0]) * (c[1][1] - c[0][1])) / det;
    return {1.0 - l1 - l2, l1, l2};
  }

  static double dist(const Point2& a, const Point2& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

private:
  void build() {
    const int nv = num_vertices();
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
      auto& tr = triangles_[t];
      for (int i : tr)
        if (i < 0 || i >= nv)
          throw MeshError("triangle " + std::to_string(t) + " references missing vertex " + std::to_string(i));
      if (tr[0] == tr[1] || tr[1] == tr[2] || tr[0] == tr[2])
        throw MeshError("triangle " + std::to_string(t) + " repeats a vertex");
      const double a = area(int(t));
      if (std::abs(a) < 1e-300) throw MeshError("triangle " + std::to_string(t) + " is degenerate");
      if (a < 0) {
        std::swap(tr[1], tr[2]);
        notes_.push_back("triangle " + std::to_string(t) + " reordered to counterclockwise");
      }
    }

    std::map<std::pair<int, int>, int> index;
    tri_edges_.assign(triangles_.size(), {-1, -1, -1});
    for (int t = 0; t < num_triangles(); ++t) {
      for (int i = 0; i < 3; ++i) {
        // local edge i is opposite local vertex i
        const int a = triangles_[t][(i + 1) % 3], b = triangles_[t][(i + 2) % 3];
        const auto key = std::minmax(a, b);
        auto it = index.find(key);
        if (it == index.end()) {
          Edge e;
          e.v = {key.first, key.second};
          e.tri[0] = t;
          e.local[0] = i;
          e.length = dist(vertices_[a], vertices_[b]);
          index.emplace(key, int(edges_.size()));
          tri_edges_[t][i] = int(edges_.size());
          edges_.push_back(e);
        } else {
          Edge& e = edges_[it->second];
          if (e.tri[1] >= 0)
            throw MeshError("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                            ") is shared by more than two triangles");
          e.tri[1] = t;
          e.local[1] = i;
          tri_edges_[t][i] = it->second;
        }
      }
    }

    std::vector<int> tagged(edges_.size(), 0);
    for (std::size_t k = 0; k < boundary_.size(); ++k) {
      const auto& seg = boundary_[k];
      const auto key = std::minmax(seg.a, seg.b);
      auto it = index.find(key);
      if (it == index.end())
        throw MeshError("boundary entry " + std::to_string(k) + " references (" + std::to_string(seg.a) + ", " +
                        std::to_string(seg.b) + "), which is not a mesh edge");
      Edge& e = edges_[it->second];
      if (e.interior())
        throw MeshError("boundary entry " + std::to_string(k) + " tags interior edge (" + std::to_string(seg.a) +
                        ", " + std::to_string(seg.b) + ")");
      if (tagged[it->second]++) throw MeshError("boundary edge tagged twice: entry " + std::to_string(k));
      e.tag = seg.tag;
    }
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      if (edges_[i].interior()) {
        interior_.push_back(int(i));
      } else {
        if (!tagged[i])
          throw MeshError("boundary edge (" + std::to_string(edges_[i].v[0]) + ", " + std::to_string(edges_[i].v[1]) +
                          ") has no tag");
        boundary_edges_.push_back(int(i));
      }
    }
  }

  std::vector<Point2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<BoundarySegment> boundary_;
  std::vector<Edge> edges_;
  std::vector<int> interior_, boundary_edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::vector<std::string> notes_;
  std::vector<int> parent_;
};

/// Geometric grading of one axis: cell widths grow by 1/ratio away from the
/// chosen side, so ratio = 1 is uniform.
struct Grading {
  double ratio = 1.0;
  enum class Toward { Low, High, Both } toward = Toward::Low;
};

inline std::vector<double> graded_nodes(double a, double b, int n, const Grading& g) {
  if (!(g.ratio > 0.0 && g.ratio <= 1.0)) throw ConfigError("grading ratio must be in (0, 1]");
  std::vector<double> w(n);
  if (g.toward == Grading::Toward::Both) {
    for (int i = 0; i < n; ++i) w[i] = std::pow(1.0 / g.ratio, std::min(i, n - 1 - i));
  } else {
    for (int i = 0; i < n; ++i) w[i] = std::pow(1.0 / g.ratio, i);
    if (g.toward == Grading::Toward::High) std::reverse(w.begin(), w.end());
  }
  double total = 0.0;
  for (double x : w) total += x;
  std::vector<double> x(n + 1);
  x[0] = a;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += w[i];
    x[i + 1] = a + (b - a) * acc / total;
  }
  x[n] = b;
  return x;
}

/// Side order: bottom (x2 = y0), right (x1 = x1max), top, left.
struct RectMeshSpec {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  int nx = 1, ny = 1;
  std::array<Tag, 4> tags{Tag::D, Tag::D, Tag::D, Tag::D};
  Grading grade_x, grade_y;
};

/// Each cell is split along the diagonal from its lower-left corner.
inline Mesh generate_rect_mesh(const RectMeshSpec& s) {
  if (s.nx < 1 || s.ny < 1) throw ConfigError("nx and ny must be positive");
  if (!(s.x1 > s.x0 && s.y1 > s.y0)) throw ConfigError("rectangle bounds must be increasing");
  const auto xs = graded_nodes(s.x0, s.x1, s.nx, s.grade_x);
  const auto ys = graded_nodes(s.y0, s.y1, s.ny, s.grade_y);
  std::vector<Point2> v;
  for (int j = 0; j <= s.ny; ++j)
    for (int i = 0; i <= s.nx; ++i) v.push_back({xs[i], ys[j]});
  auto id = [&](int i, int j) { return j * (s.nx + 1) + i; };
  std::vector<std::array<int, 3>> t;
  for (int j = 0; j < s.ny; ++j)
    for (int i = 0; i < s.nx; ++i) {
      t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  std::vector<BoundarySegment> b;
  for (int i = 0; i < s.nx; ++i) b.push_back({id(i, 0), id(i + 1, 0), s.tags[0]});
  for (int j = 0; j < s.ny; ++j) b.push_back({id(s.nx, j), id(s.nx, j + 1), s.tags[1]});
  for (int i = s.nx; i > 0; --i) b.push_back({id(i, s.ny), id(i - 1, s.ny), s.tags[2]});
  for (int j = s.ny; j > 0; --j) b.push_back({id(0, j), id(0, j - 1), s.tags[3]});
  return Mesh(std::move(v), std::move(t), std::move(b));
}

/// Splits every triangle into four through its edge midpoints. Children of
/// triangle t are 4t .. 4t+3; the corner children keep the parent's
/// orientation so all children are similar to the parent.
inline Mesh refine_uniform(const Mesh& m) {
  std::vector<Point2> v = m.vertices();
  std::vector<int> mid(m.edges().size());
  for (std::size_t e = 0; e < m.edges().size(); ++e) {
    const auto& ed = m.edges()[e];
    const Point2& p = m.vertices()[ed.v[0]];
    const Point2& q = m.vertices()[ed.v[1]];
    mid[e] = int(v.size());
    v.push_back({0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])});
  }
  std::vector<std::array<int, 3>> t;
  std::vector<int> parent;
  for (int k = 0; k < m.num_triangles(); ++k) {
    const auto& tr = m.triangles()[k];
    const auto& te = m.triangle_edges(k);
    const int m0 = mid[te[0]], m1 = mid[te[1]], m2 = mid[te[2]];  // opposite vertex 0, 1, 2
    t.push_back({tr[0], m2, m1});
    t.push_back({m2, tr[1], m0});
    t.push_back({m1, m0, tr[2]});
    t.push_back({m0, m1, m2});
    for (int c = 0; c < 4; ++c) parent.push_back(k);
  }
  std::map<std::pair<int, int>, int> edge_index;
  for (std::size_t e = 0; e < m.edges().size(); ++e) edge_index[{m.edges()[e].v[0], m.edges()[e].v[1]}] = int(e);
  std::vector<BoundarySegment> b;
  for (const auto& seg : m.boundary_segments()) {
    const auto key = std::minmax(seg.a, seg.b);
    const int mm = mid[edge_index.at({key.first, key.second})];
    b.push_back({seg.a, mm, seg.tag});
    b.push_back({mm, seg.b, seg.tag});
  }
  Mesh out(std::move(v), std::move(t), std::move(b));
  out.set_parent(std::move(parent));
  return out;
}

namespace detail {

inline std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

inline std::string save_mesh(const Mesh& m) {
  std::ostringstream os;
  os << "naghdi-mesh 1\n";
  os << "vertices " << m.num_vertices() << "\n";
  for (const auto& p : m.vertices()) os << detail::fmt17(p[0]) << " " << detail::fmt17(p[1]) << "\n";
  os << "triangles " << m.num_triangles() << "\n";
  for (const auto& t : m.triangles()) os << t[0] << " " << t[1] << " " << t[2] << "\n";
  os << "boundary " << m.boundary_segments().size() << "\n";
  for (const auto& s : m.boundary_segments()) os << s.a << " " << s.b << " " << tag_char(s.tag) << "\n";
  return os.str();
}

/// Parses the line-oriented mesh format. Errors carry 1-based line numbers.
inline Mesh load_mesh(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) -> MeshError {
    return MeshError("mesh line " + std::to_string(lineno) + ": " + what);
  };
  auto next = [&](std::vector<std::string>& tok) -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      tok.clear();
      for (std::string w; ls >> w;) tok.push_back(w);
      if (!tok.empty()) return true;
    }
    return false;
  };
  auto to_int = [&](const std::string& s) {
    int v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw fail("expected integer, got '" + s + "'");
    return v;
  };
  auto to_double = [&](const std::string& s) {
    double v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
      throw fail("expected number, got '" + s + "'");
    return v;
  };
  std::vector<std::string> tok;
  if (!next(tok) || tok.size() != 2 || tok[0] != "naghdi-mesh" || tok[1] != "1")
    throw fail("expected header 'naghdi-mesh 1'");
  auto section = [&](const char* name) {
    if (!next(tok) || tok.size() != 2 || tok[0] != name) throw fail(std::string("expected '") + name + " N'");
    const int n = to_int(tok[1]);
    if (n < 0) throw fail("negative count");
    return n;
  };
  std::vector<Point2> v;
  const int nv = section("vertices");
  for (int i = 0; i < nv; ++i) {
    if (!next(tok) || tok.size() != 2) throw fail("expected 'x1 x2'");
    v.push_back({to_double(tok[0]), to_double(tok[1])});
  }
  std::vector<std::array<int, 3>> t;
  const int nt = section("triangles");
  for (int i = 0; i < nt; ++i) {
    if (!next(tok) || tok.size() != 3) throw fail("expected 'i j k'");
    t.push_back({to_int(tok[0]), to_int(tok[1]), to_int(tok[2])});
  }
  std::vector<BoundarySegment> b;
  const int nb = section("boundary");
  for (int i = 0; i < nb; ++i) {
    if (!next(tok) || tok.size() != 3) throw fail("expected 'i j TAG'");
    if (tok[2] != "D" && tok[2] != "S" && tok[2] != "F") throw fail("tag must be D, S or F");
    b.push_back({to_int(tok[0]), to_int(tok[1]), parse_tag(tok[2])});
  }
  if (next(tok)) throw fail("unexpected trailing content");
  return Mesh(std::move(v), std::move(t), std::move(b));
}

struct MeshConditionReport {
  double error_factor = 1.0;      // 1 + eps^-1 max h^2 (first-order seminorms)
  double dg_condition_lhs = 0.0;  // max h^2 (first- plus second-order seminorms)
  bool dg_condition_met = true;   // dg_condition_lhs <= eps
  double h_max = 0.0;
};

/// Mesh diagnostics for the thickness parameter eps: the error-estimate
/// factor and the DG stability condition with unit constant.
inline MeshConditionReport mesh_condition_report(const Mesh& m, const SurfaceChart& chart, double eps,
                                                 int lattice = 2) {
  if (!(eps > 0)) throw ConfigError("epsilon must be positive");
  double f1 = 0.0, f12 = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto c = m.corners(t);
    const double h2 = m.h_tau(t) * m.h_tau(t);
    const double s1 = geometry_seminorms(chart, c, 1, lattice).sum();
    const double s2 = geometry_seminorms(chart, c, 2, lattice).sum();
    f1 = std::max(f1, h2 * s1);
    f12 = std::max(f12, h2 * (s1 + s2));
  }
  MeshConditionReport r;
  r.error_factor = 1.0 + f1 / eps;
  r.dg_condition_lhs = f12;
  r.dg_condition_met = f12 <= eps;
  r.h_max = m.h_max();
  return r;
}

}  // namespace shellfem
