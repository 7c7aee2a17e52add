#pragma once

#include <array>
#include <cmath>

namespace shellfem {

// Small fixed-size tensors over the two surface indices. Index order follows
// the written order of the component, e.g. Tensor3<T> g; g[c][a][b] is
// Gamma^c_{ab}, and for derivative fields the last index is the direction.
template <class T>
using Vec2 = std::array<T, 2>;
template <class T>
using Mat2 = std::array<std::array<T, 2>, 2>;
template <class T>
using Tensor3 = std::array<Mat2<T>, 2>;
template <class T>
using Tensor4 = std::array<std::array<Mat2<T>, 2>, 2>;

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

template <class T>
Mat2<T> zero_mat2() {
  Mat2<T> m{};
  for (auto& row : m) row.fill(T(0.0));
  return m;
}

template <class T>
Vec2<T> zero_vec2() {
  return {T(0.0), T(0.0)};
}

/// Forward-mode dual number carrying the two partial derivatives with respect
/// to the parameter coordinates x1, x2. Used to differentiate stress fields
/// when building manufactured loads.
struct Dual {
  double v = 0.0;
  std::array<double, 2> d{0.0, 0.0};

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit promotion of constants
  Dual(double value, double d1, double d2) : v(value), d{d1, d2} {}

  Dual& operator+=(const Dual& o) {
    v += o.v;
    d[0] += o.d[0];
    d[1] += o.d[1];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    d[0] -= o.d[0];
    d[1] -= o.d[1];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    d[0] = d[0] * o.v + v * o.d[0];
    d[1] = d[1] * o.v + v * o.d[1];
    v *= o.v;
    return *this;
  }
};

inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator-(const Dual& a) { return {-a.v, -a.d[0], -a.d[1]}; }

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.v; }

}  // namespace shellfem
