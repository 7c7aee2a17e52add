#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "shellfem/error.hpp"
#include "shellfem/expression.hpp"
#include "shellfem/tensor.hpp"

namespace shellfem {

using Point2 = std::array<double, 2>;

/// Polygon in the parameter plane, counterclockwise.
struct Polygon {
  std::vector<Point2> vertices;

  static Polygon rectangle(double x0, double x1, double y0, double y1) {
    return Polygon{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
  }

  double diameter() const {
    double d = 0.0;
    for (const auto& p : vertices)
      for (const auto& q : vertices) d = std::max(d, std::hypot(p[0] - q[0], p[1] - q[1]));
    return d;
  }

  /// Closed containment test; points within `tol` of an edge count as inside.
  bool contains(const Point2& p, double tol) const {
    const std::size_t n = vertices.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const auto& a = vertices[i];
      const auto& b = vertices[j];
      const double ex = b[0] - a[0], ey = b[1] - a[1];
      const double len2 = ex * ex + ey * ey;
      double t = len2 > 0 ? ((p[0] - a[0]) * ex + (p[1] - a[1]) * ey) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      if (std::hypot(p[0] - a[0] - t * ex, p[1] - a[1] - t * ey) <= tol) return true;
      if (((a[1] > p[1]) != (b[1] > p[1])) && (p[0] < (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0]))
        inside = !inside;
    }
    return inside;
  }
};

/// Partial derivatives of the chart map up to third order at one point.
/// d1[a] = d Phi / dx_a, d2[a][b] = d^2 Phi / dx_a dx_b, d3[a][b][c] likewise.
struct ChartJet {
  Vec3 position{};
  std::array<Vec3, 2> d1{};
  std::array<std::array<Vec3, 2>, 2> d2{};
  std::array<std::array<std::array<Vec3, 2>, 2>, 2> d3{};
};

namespace charts {

struct Plate {
  ChartJet jet(const Point2& x) const {
    ChartJet j;
    j.position = {x[0], x[1], 0.0};
    j.d1[0] = {1.0, 0.0, 0.0};
    j.d1[1] = {0.0, 1.0, 0.0};
    return j;
  }
};

/// Phi(x1, x2) = (R cos(x1/R), R sin(x1/R), x2): x1 is arc length around the
/// circumference and x2 runs along the rulings.
struct Cylinder {
  double radius = 1.0;
  ChartJet jet(const Point2& x) const {
    const double r = radius, t = x[0] / r, c = std::cos(t), s = std::sin(t);
    ChartJet j;
    j.position = {r * c, r * s, x[1]};
    j.d1[0] = {-s, c, 0.0};
    j.d1[1] = {0.0, 0.0, 1.0};
    j.d2[0][0] = {-c / r, -s / r, 0.0};
    j.d3[0][0][0] = {s / (r * r), -c / (r * r), 0.0};
    return j;
  }
};

/// Polar chart Phi = R (sin x1 cos x2, sin x1 sin x2, cos x1); x1 is the
/// colatitude, so the poles x1 = 0, pi are degenerate.
struct Sphere {
  double radius = 1.0;
  ChartJet jet(const Point2& x) const {
    const double r = radius;
    const double s1 = std::sin(x[0]), c1 = std::cos(x[0]), s2 = std::sin(x[1]), c2 = std::cos(x[1]);
    ChartJet j;
    j.position = {r * s1 * c2, r * s1 * s2, r * c1};
    j.d1[0] = {r * c1 * c2, r * c1 * s2, -r * s1};
    j.d1[1] = {-r * s1 * s2, r * s1 * c2, 0.0};
    j.d2[0][0] = {-r * s1 * c2, -r * s1 * s2, -r * c1};
    j.d2[0][1] = j.d2[1][0] = {-r * c1 * s2, r * c1 * c2, 0.0};
    j.d2[1][1] = {-r * s1 * c2, -r * s1 * s2, 0.0};
    const Vec3 d111{-r * c1 * c2, -r * c1 * s2, r * s1};
    const Vec3 d112{r * s1 * s2, -r * s1 * c2, 0.0};
    const Vec3 d122{-r * c1 * c2, -r * c1 * s2, 0.0};
    const Vec3 d222{r * s1 * s2, -r * s1 * c2, 0.0};
    j.d3[0][0][0] = d111;
    j.d3[0][0][1] = j.d3[0][1][0] = j.d3[1][0][0] = d112;
    j.d3[0][1][1] = j.d3[1][0][1] = j.d3[1][1][0] = d122;
    j.d3[1][1][1] = d222;
    return j;
  }
};

/// Graph of the quadratic z = c11 x1^2 + c12 x1 x2 + c22 x2^2
/// (c11 = c22 = 0 gives the hyperbolic paraboloid z = c12 x1 x2).
struct Hypar {
  double c11 = 0.0, c12 = 1.0, c22 = 0.0;
  ChartJet jet(const Point2& x) const {
    ChartJet j;
    j.position = {x[0], x[1], c11 * x[0] * x[0] + c12 * x[0] * x[1] + c22 * x[1] * x[1]};
    j.d1[0] = {1.0, 0.0, 2.0 * c11 * x[0] + c12 * x[1]};
    j.d1[1] = {0.0, 1.0, c12 * x[0] + 2.0 * c22 * x[1]};
    j.d2[0][0] = {0.0, 0.0, 2.0 * c11};
    j.d2[0][1] = j.d2[1][0] = {0.0, 0.0, c12};
    j.d2[1][1] = {0.0, 0.0, 2.0 * c22};
    return j;
  }
};

/// Chart given by three user expressions in x1, x2. Derivatives are taken
/// symbolically once at construction.
class ExpressionChart {
public:
  ExpressionChart(Expression x, Expression y, Expression z) {
    comp_ = {std::move(x), std::move(y), std::move(z)};
    for (int c = 0; c < 3; ++c) {
      for (int a = 0; a < 2; ++a) {
        d1_[a][c] = comp_[c].derivative(a);
        for (int b = 0; b < 2; ++b) {
          d2_[a][b][c] = d1_[a][c].derivative(b);
          for (int k = 0; k < 2; ++k) d3_[a][b][k][c] = d2_[a][b][c].derivative(k);
        }
      }
    }
  }

  ChartJet jet(const Point2& x) const {
    ChartJet j;
    for (int c = 0; c < 3; ++c) {
      j.position[c] = comp_[c](x[0], x[1]);
      for (int a = 0; a < 2; ++a) {
        j.d1[a][c] = d1_[a][c](x[0], x[1]);
        for (int b = 0; b < 2; ++b) {
          j.d2[a][b][c] = d2_[a][b][c](x[0], x[1]);
          for (int k = 0; k < 2; ++k) j.d3[a][b][k][c] = d3_[a][b][k][c](x[0], x[1]);
        }
      }
    }
    return j;
  }

  const std::array<Expression, 3>& components() const { return comp_; }

private:
  std::array<Expression, 3> comp_;
  std::array<std::array<Expression, 3>, 2> d1_;
  std::array<std::array<std::array<Expression, 3>, 2>, 2> d2_;
  std::array<std::array<std::array<std::array<Expression, 3>, 2>, 2>, 2> d3_;
};

}  // namespace charts

/// Analytic parameterization of the shell midsurface over a parameter domain.
class SurfaceChart {
public:
  using Kind = std::variant<charts::Plate, charts::Cylinder, charts::Sphere, charts::Hypar, charts::ExpressionChart>;

  SurfaceChart() : kind_(charts::Plate{}) {}
  explicit SurfaceChart(Kind kind, std::optional<Polygon> domain = std::nullopt)
      : kind_(std::move(kind)), domain_(std::move(domain)) {
    if (domain_) tol_ = 1e-10 * std::max(1.0, domain_->diameter());
  }

  static SurfaceChart plate(std::optional<Polygon> d = std::nullopt) { return SurfaceChart(charts::Plate{}, d); }
  static SurfaceChart cylinder(double r, std::optional<Polygon> d = std::nullopt) {
    if (!(r > 0)) throw ConfigError("cylinder radius must be positive");
    return SurfaceChart(charts::Cylinder{r}, d);
  }
  static SurfaceChart sphere(double r, std::optional<Polygon> d = std::nullopt) {
    if (!(r > 0)) throw ConfigError("sphere radius must be positive");
    return SurfaceChart(charts::Sphere{r}, d);
  }
  static SurfaceChart hypar(double c11, double c12, double c22, std::optional<Polygon> d = std::nullopt) {
    return SurfaceChart(charts::Hypar{c11, c12, c22}, d);
  }

  const std::optional<Polygon>& domain() const { return domain_; }
  void set_domain(Polygon p) {
    tol_ = 1e-10 * std::max(1.0, p.diameter());
    domain_ = std::move(p);
  }

  std::string name() const {
    static constexpr const char* names[] = {"plate", "cylinder", "sphere", "hypar", "expression"};
    return names[kind_.index()];
  }

  ChartJet jet(const Point2& x) const {
    if (domain_ && !domain_->contains(x, tol_))
      throw GeometryError("point (" + std::to_string(x[0]) + ", " + std::to_string(x[1]) +
                          ") is outside the chart domain");
    return std::visit([&](const auto& c) { return c.jet(x); }, kind_);
  }

  Vec3 position(const Point2& x) const { return jet(x).position; }

  /// True when all fundamental-form coefficients are constant in x (plate,
  /// cylinder in cylindrical coordinates).
  bool constant_coefficients() const {
    return std::holds_alternative<charts::Plate>(kind_) || std::holds_alternative<charts::Cylinder>(kind_);
  }

  const Kind& kind() const { return kind_; }

private:
  Kind kind_;
  std::optional<Polygon> domain_;
  double tol_ = 1e-10;
};

/// Differential-geometric coefficients of the midsurface at one point.
/// Derivative fields carry the direction as their last index.
struct GeometryEval {
  Point2 x{};
  Vec3 position{};
  std::array<Vec3, 2> tangent{};  // covariant basis a_1, a_2
  Vec3 normal{};                  // a_3
  Mat2<double> a_cov{}, a_con{};
  double sqrt_a = 1.0;
  Mat2<double> b_cov{};
  Mat2<double> b_mix{};  // b_mix[a][b] = b^a_b
  Mat2<double> c_cov{};
  Tensor3<double> christoffel{};  // christoffel[c][a][b] = Gamma^c_{ab}

  std::array<Mat2<double>, 2> d_a_cov{}, d_a_con{}, d_b_cov{}, d_b_mix{}, d_c_cov{};
  std::array<Tensor3<double>, 2> d_christoffel{};
  Vec2<double> d_sqrt_a{};

  /// d_b_cov etc. indexed as [direction][a][b]; these accessors give the
  /// component-major view used by the seminorm code.
  double db_cov(int a, int b, int d) const { return d_b_cov[d][a][b]; }
  double db_mix(int a, int b, int d) const { return d_b_mix[d][a][b]; }
  double dgamma(int c, int a, int b, int d) const { return d_christoffel[d][c][a][b]; }
};

inline Mat2<double> inverse(const Mat2<double>& m) {
  const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  return {{{m[1][1] / det, -m[0][1] / det}, {-m[1][0] / det, m[0][0] / det}}};
}

inline Mat2<double> matmul(const Mat2<double>& a, const Mat2<double>& b) {
  Mat2<double> r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return r;
}

/// Fills every coefficient of GeometryEval from the chart jet. Derivatives of
/// b, Gamma and the metric come from the third derivatives of the chart.
inline GeometryEval geometry_from_jet(const Point2& x, const ChartJet& j) {
  GeometryEval g;
  g.x = x;
  g.position = j.position;
  g.tangent = j.d1;
  const auto& a = j.d1;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) g.a_cov[i][k] = dot(a[i], a[k]);
  const Vec3 N = cross(a[0], a[1]);
  const double len = norm(N);
  if (!(len >= 1e-12)) throw GeometryError("degenerate tangent vectors (|a1 x a2| < 1e-12)");
  g.sqrt_a = len;
  g.normal = (1.0 / len) * N;
  g.a_con = inverse(g.a_cov);

  Tensor3<double> E{};  // E[m][a][b] = a_m . d_b a_a
  for (int m = 0; m < 2; ++m)
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q) E[m][p][q] = dot(a[m], j.d2[p][q]);

  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) {
      g.b_cov[p][q] = dot(g.normal, j.d2[p][q]);
      for (int c = 0; c < 2; ++c) g.christoffel[c][p][q] = g.a_con[c][0] * E[0][p][q] + g.a_con[c][1] * E[1][p][q];
    }
  g.b_mix = matmul(g.a_con, g.b_cov);
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) g.c_cov[p][q] = g.b_mix[0][p] * g.b_cov[0][q] + g.b_mix[1][p] * g.b_cov[1][q];

  for (int d = 0; d < 2; ++d) {
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q) g.d_a_cov[d][p][q] = dot(j.d2[p][d], a[q]) + dot(a[p], j.d2[q][d]);
    // d(A^-1) = -A^-1 dA A^-1
    const Mat2<double> t = matmul(matmul(g.a_con, g.d_a_cov[d]), g.a_con);
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q) g.d_a_con[d][p][q] = -t[p][q];

    const Vec3 dN = cross(j.d2[0][d], a[1]) + cross(a[0], j.d2[1][d]);
    const double nd = dot(g.normal, dN);
    g.d_sqrt_a[d] = nd;
    const Vec3 dn = (1.0 / len) * (dN - nd * g.normal);

    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q) g.d_b_cov[d][p][q] = dot(dn, j.d2[p][q]) + dot(g.normal, j.d3[p][q][d]);

    for (int c = 0; c < 2; ++c)
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) {
          double s = 0.0;
          for (int m = 0; m < 2; ++m) {
            const double dE = dot(j.d2[m][d], j.d2[p][q]) + dot(a[m], j.d3[p][q][d]);
            s += g.d_a_con[d][c][m] * E[m][p][q] + g.a_con[c][m] * dE;
          }
          g.d_christoffel[d][c][p][q] = s;
        }

    const Mat2<double> m1 = matmul(g.d_a_con[d], g.b_cov);
    const Mat2<double> m2 = matmul(g.a_con, g.d_b_cov[d]);
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q) g.d_b_mix[d][p][q] = m1[p][q] + m2[p][q];
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q) {
        double s = 0.0;
        for (int c = 0; c < 2; ++c)
          s += g.d_b_mix[d][c][p] * g.b_cov[c][q] + g.b_mix[c][p] * g.d_b_cov[d][c][q];
        g.d_c_cov[d][p][q] = s;
      }
  }
  return g;
}

inline GeometryEval eval_geometry(const SurfaceChart& chart, const Point2& x) {
  return geometry_from_jet(x, chart.jet(x));
}

/// Subset of the geometry used by the strain operators, over a scalar type
/// that may carry derivatives (Dual).
template <class T>
struct GeomCoeffs {
  Mat2<T> a_con;
  Mat2<T> b_cov;
  Mat2<T> b_mix;
  Mat2<T> c_cov;
  Tensor3<T> christoffel;
};

inline GeomCoeffs<double> coeffs(const GeometryEval& g) {
  return {g.a_con, g.b_cov, g.b_mix, g.c_cov, g.christoffel};
}

inline GeomCoeffs<Dual> coeffs_dual(const GeometryEval& g) {
  GeomCoeffs<Dual> c;
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) {
      c.a_con[p][q] = Dual(g.a_con[p][q], g.d_a_con[0][p][q], g.d_a_con[1][p][q]);
      c.b_cov[p][q] = Dual(g.b_cov[p][q], g.d_b_cov[0][p][q], g.d_b_cov[1][p][q]);
      c.b_mix[p][q] = Dual(g.b_mix[p][q], g.d_b_mix[0][p][q], g.d_b_mix[1][p][q]);
      c.c_cov[p][q] = Dual(g.c_cov[p][q], g.d_c_cov[0][p][q], g.d_c_cov[1][p][q]);
      for (int k = 0; k < 2; ++k)
        c.christoffel[k][p][q] =
            Dual(g.christoffel[k][p][q], g.d_christoffel[0][k][p][q], g.d_christoffel[1][k][p][q]);
    }
  return c;
}

/// Isotropic material constants. kappa defaults to the conventional 5/6.
struct Material {
  double lambda = 1.0;
  double mu = 1.0;
  double kappa = 5.0 / 6.0;

  void validate() const {
    if (!(mu > 0.0)) throw ConfigError("mu must be positive");
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
    if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  }
};

/// a^{abcd} = mu (a^{ac} a^{bd} + a^{bc} a^{ad}) + 2 mu lambda / (2 mu + lambda) a^{ab} a^{cd}
template <class T>
Tensor4<T> elastic_tensor(const Mat2<T>& a_con, const Material& m) {
  const double k = 2.0 * m.mu * m.lambda / (2.0 * m.mu + m.lambda);
  Tensor4<T> e;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d)
          e[a][b][c][d] = T(m.mu) * (a_con[a][c] * a_con[b][d] + a_con[b][c] * a_con[a][d]) +
                          T(k) * a_con[a][b] * a_con[c][d];
  return e;
}

/// a_{abcd} = 1/(2 mu) [ 1/2 (a_{ad} a_{bc} + a_{bd} a_{ac}) - lambda/(2 mu + 3 lambda) a_{ab} a_{cd} ]
inline Tensor4<double> compliance_tensor(const Mat2<double>& a_cov, const Material& m) {
  const double k = m.lambda / (2.0 * m.mu + 3.0 * m.lambda);
  Tensor4<double> e;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d)
          e[a][b][c][d] = (0.5 * (a_cov[a][d] * a_cov[b][c] + a_cov[b][d] * a_cov[a][c]) -
                           k * a_cov[a][b] * a_cov[c][d]) /
                          (2.0 * m.mu);
  return e;
}

struct ElasticTensors {
  Tensor4<double> elastic;
  Tensor4<double> compliance;
  double lam = 0.0, mu = 0.0, kappa = 0.0;
};

inline ElasticTensors eval_elastic(const GeometryEval& g, const Material& m) {
  m.validate();
  return {elastic_tensor(g.a_con, m), compliance_tensor(g.a_cov, m), m.lambda, m.mu, m.kappa};
}

/// Sums over components of sampled W^{k,inf}(tau) seminorms of the
/// Christoffel symbols, b_{ab} and b^a_b.
struct GeometrySeminorms {
  double christoffel = 0.0;
  double b_cov = 0.0;
  double b_mix = 0.0;
  double sum() const { return christoffel + b_cov + b_mix; }
};

/// Sample points of a triangle: the lattice with `n` subdivisions per edge
/// (n = 2 gives vertices and edge midpoints).
inline std::vector<Point2> triangle_lattice(const std::array<Point2, 3>& tri, int n) {
  std::vector<Point2> pts;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n - i; ++j) {
      const double l1 = double(i) / n, l2 = double(j) / n, l0 = 1.0 - l1 - l2;
      pts.push_back({l0 * tri[0][0] + l1 * tri[1][0] + l2 * tri[2][0], l0 * tri[0][1] + l1 * tri[1][1] + l2 * tri[2][1]});
    }
  return pts;
}

/// order 0: max |coefficient|; order 1: max over first partials; order 2:
/// max over second partials, formed by central differences of the analytic
/// first derivatives (diagnostic only).
inline GeometrySeminorms geometry_seminorms(const SurfaceChart& chart, const std::array<Point2, 3>& tri, int order,
                                            int lattice = 2) {
  if (order < 0 || order > 2) throw ConfigError("seminorm order must be 0, 1 or 2");
  const auto pts = triangle_lattice(tri, lattice);
  std::array<double, 8> gmax{};  // Gamma^c_{ab}, flattened c*4 + a*2 + b
  std::array<double, 4> bmax{}, mmax{};
  double diam = 0.0;
  for (int i = 0; i < 3; ++i)
    diam = std::max(diam, std::hypot(tri[i][0] - tri[(i + 1) % 3][0], tri[i][1] - tri[(i + 1) % 3][1]));
  const double h = 1e-5 * std::max(diam, 1e-3);

  auto update = [&](const GeometryEval& g, const GeometryEval* gp, const GeometryEval* gm, int dir) {
    for (int c = 0; c < 2; ++c)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          double v = 0.0;
          if (order == 0) v = std::abs(g.christoffel[c][a][b]);
          if (order == 1) v = std::max(std::abs(g.dgamma(c, a, b, 0)), std::abs(g.dgamma(c, a, b, 1)));
          if (order == 2)
            for (int e = 0; e < 2; ++e)
              v = std::max(v, std::abs((gp->dgamma(c, a, b, e) - gm->dgamma(c, a, b, e)) / (2 * h)));
          gmax[c * 4 + a * 2 + b] = std::max(gmax[c * 4 + a * 2 + b], v);
        }
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        double vb = 0.0, vm = 0.0;
        if (order == 0) {
          vb = std::abs(g.b_cov[a][b]);
          vm = std::abs(g.b_mix[a][b]);
        }
        if (order == 1) {
          vb = std::max(std::abs(g.db_cov(a, b, 0)), std::abs(g.db_cov(a, b, 1)));
          vm = std::max(std::abs(g.db_mix(a, b, 0)), std::abs(g.db_mix(a, b, 1)));
        }
        if (order == 2)
          for (int e = 0; e < 2; ++e) {
            vb = std::max(vb, std::abs((gp->db_cov(a, b, e) - gm->db_cov(a, b, e)) / (2 * h)));
            vm = std::max(vm, std::abs((gp->db_mix(a, b, e) - gm->db_mix(a, b, e)) / (2 * h)));
          }
        bmax[a * 2 + b] = std::max(bmax[a * 2 + b], vb);
        mmax[a * 2 + b] = std::max(mmax[a * 2 + b], vm);
      }
    (void)dir;
  };

  for (const auto& p : pts) {
    const GeometryEval g = eval_geometry(chart, p);
    if (order < 2) {
      update(g, nullptr, nullptr, 0);
      continue;
    }
    // Second derivatives: difference the analytic first derivatives in each
    // direction; the stencil may step slightly outside the element, so use
    // the unchecked jet when the chart domain would reject it.
    for (int dir = 0; dir < 2; ++dir) {
      Point2 pp = p, pm = p;
      pp[dir] += h;
      pm[dir] -= h;
      SurfaceChart free_chart(chart.kind());
      const GeometryEval gp = eval_geometry(free_chart, pp);
      const GeometryEval gm = eval_geometry(free_chart, pm);
      update(g, &gp, &gm, dir);
    }
  }
  GeometrySeminorms s;
  for (double v : gmax) s.christoffel += v;
  for (double v : bmax) s.b_cov += v;
  for (double v : mmax) s.b_mix += v;
  return s;
}

/// Upper bounds of |b|^2 and |Gamma|^2 over the sample points, used to set
/// the default penalty constant.
inline double max_geometry_magnitude_sq(const SurfaceChart& chart, const std::vector<Point2>& pts) {
  double bsq = 0.0, gsq = 0.0;
  for (const auto& p : pts) {
    const GeometryEval g = eval_geometry(chart, p);
    double b = 0.0, c = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k) {
        b += g.b_mix[i][k] * g.b_mix[i][k];
        for (int l = 0; l < 2; ++l) c += g.christoffel[i][k][l] * g.christoffel[i][k][l];
      }
    bsq = std::max(bsq, b);
    gsq = std::max(gsq, c);
  }
  return bsq + gsq;
}

}  // namespace shellfem
