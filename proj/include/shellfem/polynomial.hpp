#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace shellfem {

/// Bivariate polynomial of total degree <= 3 in reference coordinates (r, s).
/// Coefficients follow the monomial order 1, r, s, r^2, rs, s^2, r^3, r^2 s,
/// r s^2, s^3.
struct Poly {
  std::array<double, 10> c{};

  static constexpr std::array<std::array<int, 2>, 10> exps{
      {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}, {3, 0}, {2, 1}, {1, 2}, {0, 3}}};

  static int index(int i, int j) {
    const int d = i + j;
    return d * (d + 1) / 2 + j;
  }

  static Poly constant(double v) {
    Poly p;
    p.c[0] = v;
    return p;
  }

  /// Barycentric coordinate k on the reference triangle: 1 - r - s, r, s.
  static Poly lambda(int k) {
    Poly p;
    if (k == 0) {
      p.c[0] = 1.0;
      p.c[1] = -1.0;
      p.c[2] = -1.0;
    } else {
      p.c[k] = 1.0;
    }
    return p;
  }

  int degree() const {
    for (int k = 9; k >= 0; --k)
      if (c[k] != 0.0) return exps[k][0] + exps[k][1];
    return 0;
  }

  double operator()(double r, double s) const {
    const double r2 = r * r, s2 = s * s;
    return c[0] + c[1] * r + c[2] * s + c[3] * r2 + c[4] * r * s + c[5] * s2 + c[6] * r2 * r + c[7] * r2 * s +
           c[8] * r * s2 + c[9] * s2 * s;
  }

  /// Partials with respect to r and s.
  std::array<double, 2> grad(double r, double s) const {
    const double r2 = r * r, s2 = s * s, rs = r * s;
    return {c[1] + 2 * c[3] * r + c[4] * s + 3 * c[6] * r2 + 2 * c[7] * rs + c[8] * s2,
            c[2] + c[4] * r + 2 * c[5] * s + c[7] * r2 + 2 * c[8] * rs + 3 * c[9] * s2};
  }

  Poly& operator+=(const Poly& o) {
    for (int k = 0; k < 10; ++k) c[k] += o.c[k];
    return *this;
  }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator*(double s, Poly a) {
    for (double& v : a.c) v *= s;
    return a;
  }
  friend Poly operator*(const Poly& a, const Poly& b) {
    Poly p;
    for (int i = 0; i < 10; ++i) {
      if (a.c[i] == 0.0) continue;
      for (int j = 0; j < 10; ++j) {
        if (b.c[j] == 0.0) continue;
        const int ei = exps[i][0] + exps[j][0], ej = exps[i][1] + exps[j][1];
        if (ei + ej > 3) throw std::logic_error("polynomial product exceeds degree 3");
        p.c[index(ei, ej)] += a.c[i] * b.c[j];
      }
    }
    return p;
  }
};

}  // namespace shellfem
