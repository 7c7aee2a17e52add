#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "shellfem/error.hpp"

namespace shellfem {

struct GaussRule {
  std::vector<double> nodes;    // on [0, 1]
  std::vector<double> weights;  // sum to 1
};

/// n-point Gauss-Legendre rule mapped to [0, 1]; nodes by Newton iteration on
/// the Legendre recurrence.
inline GaussRule gauss_legendre(int n) {
  if (n < 1 || n > 64) throw ConfigError("Gauss rule size must be in [1, 64]");
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = 0.5 * (1.0 - x);
    r.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    r.weights[i] = r.weights[n - 1 - i] = 0.5 * w;
  }
  return r;
}

/// Rule on the reference triangle {r, s >= 0, r + s <= 1}; weights sum to 1/2.
struct TriangleRule {
  std::vector<std::array<double, 2>> points;
  std::vector<double> weights;
};

/// Collapsed (Duffy) tensor Gauss rule exact for polynomials of total degree
/// `degree`.
inline TriangleRule triangle_rule(int degree) {
  if (degree < 0 || degree > 40) throw ConfigError("triangle quadrature degree must be in [0, 40]");
  const int n = (degree + 2 + 1) / 2;
  const GaussRule g = gauss_legendre(n);
  TriangleRule t;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double u = g.nodes[i], v = g.nodes[j];
      t.points.push_back({u, (1.0 - u) * v});
      t.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - u));
    }
  return t;
}

}  // namespace shellfem
