#pragma once

#include <cmath>

namespace igac {

// Hyper-dual number a + b e1 + c e2 + d e1 e2 with e1^2 = e2^2 = 0.
// Seeding x + e1 u + e2 v yields f, f' u, f' v and u^T f'' v exactly, which is
// how closed-form metrics provide derivatives without finite differences.
struct HyperDual {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  constexpr HyperDual() = default;
  constexpr HyperDual(double value) : a(value) {}  // NOLINT(google-explicit-constructor)
  constexpr HyperDual(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {}

  HyperDual& operator+=(const HyperDual& o) { return *this = *this + o; }
  HyperDual& operator-=(const HyperDual& o) { return *this = *this - o; }
  HyperDual& operator*=(const HyperDual& o) { return *this = *this * o; }
  HyperDual& operator/=(const HyperDual& o) { return *this = *this / o; }

  friend constexpr HyperDual operator+(const HyperDual& x, const HyperDual& y) {
    return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d};
  }
  friend constexpr HyperDual operator-(const HyperDual& x, const HyperDual& y) {
    return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d};
  }
  friend constexpr HyperDual operator-(const HyperDual& x) { return {-x.a, -x.b, -x.c, -x.d}; }
  friend constexpr HyperDual operator*(const HyperDual& x, const HyperDual& y) {
    return {x.a * y.a, x.a * y.b + x.b * y.a, x.a * y.c + x.c * y.a, x.a * y.d + x.b * y.c + x.c * y.b + x.d * y.a};
  }
  friend constexpr HyperDual operator/(const HyperDual& x, const HyperDual& y) { return x * inverse(y); }
  friend constexpr HyperDual inverse(const HyperDual& y) {
    const double inv = 1.0 / y.a;
    const double inv2 = inv * inv;
    return {inv, -y.b * inv2, -y.c * inv2, -y.d * inv2 + 2.0 * y.b * y.c * inv2 * inv};
  }
};

// Applies a scalar function with value f, first derivative f1, second f2.
inline HyperDual chain(const HyperDual& x, double f, double f1, double f2) {
  return {f, f1 * x.b, f1 * x.c, f1 * x.d + f2 * x.b * x.c};
}

inline HyperDual sqrt(const HyperDual& x) {
  const double s = std::sqrt(x.a);
  return chain(x, s, 0.5 / s, -0.25 / (s * x.a));
}
inline HyperDual exp(const HyperDual& x) {
  const double e = std::exp(x.a);
  return chain(x, e, e, e);
}
inline HyperDual log(const HyperDual& x) { return chain(x, std::log(x.a), 1.0 / x.a, -1.0 / (x.a * x.a)); }

inline double value_of(double x) { return x; }
inline double value_of(const HyperDual& x) { return x.a; }

}  // namespace igac
