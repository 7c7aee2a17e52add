#pragma once

#include "shellfem/geometry.hpp"
#include "shellfem/tensor.hpp"

namespace shellfem {

/// Values and parameter-coordinate partials of (theta, u, w) at one point.
/// grad_theta[a][b] = d_b theta_a, likewise grad_u; grad_w[a] = d_a w.
template <class T>
struct FieldSample {
  Vec2<T> theta{};
  Vec2<T> u{};
  T w{};
  Mat2<T> grad_theta{};
  Mat2<T> grad_u{};
  Vec2<T> grad_w{};

  FieldSample() {
    theta = u = grad_w = zero_vec2<T>();
    grad_theta = grad_u = zero_mat2<T>();
    w = T(0.0);
  }
};

template <class T>
struct StrainSample {
  Mat2<T> rho;
  Mat2<T> gamma;
  Vec2<T> tau;
};

template <class T>
struct CovariantDerivatives {
  Mat2<T> u;      // u[a][b] = u_{a|b}
  Mat2<T> theta;  // theta[a][b] = theta_{a|b}
};

template <class T>
CovariantDerivatives<T> covariant_derivatives(const FieldSample<T>& f, const GeomCoeffs<T>& g) {
  CovariantDerivatives<T> d;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      d.u[a][b] = f.grad_u[a][b] - g.christoffel[0][a][b] * f.u[0] - g.christoffel[1][a][b] * f.u[1];
      d.theta[a][b] =
          f.grad_theta[a][b] - g.christoffel[0][a][b] * f.theta[0] - g.christoffel[1][a][b] * f.theta[1];
    }
  return d;
}

/// Bending, membrane and transverse shear strains.
template <class T>
StrainSample<T> strains(const FieldSample<T>& f, const GeomCoeffs<T>& g) {
  const auto d = covariant_derivatives(f, g);
  StrainSample<T> s;
  // bu[a][b] = b^c_a u_{c|b}
  Mat2<T> bu;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) bu[a][b] = g.b_mix[0][a] * d.u[0][b] + g.b_mix[1][a] * d.u[1][b];
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      s.rho[a][b] = T(0.5) * (d.theta[a][b] + d.theta[b][a]) - T(0.5) * (bu[a][b] + bu[b][a]) + g.c_cov[a][b] * f.w;
      s.gamma[a][b] = T(0.5) * (d.u[a][b] + d.u[b][a]) - g.b_cov[a][b] * f.w;
    }
  for (int a = 0; a < 2; ++a)
    s.tau[a] = f.grad_w[a] + g.b_mix[0][a] * f.u[0] + g.b_mix[1][a] * f.u[1] + f.theta[a];
  return s;
}

}  // namespace shellfem
