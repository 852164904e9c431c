#pragma once

// Forward-mode automatic differentiation with a fixed number of tangent
// directions. A Dual<N> carries a value and its partial derivatives with
// respect to N seeded inputs; arithmetic propagates them by the chain rule.

#include <array>
#include <cmath>
#include <cstddef>
#include <type_traits>

namespace drr {

template <std::size_t N>
struct Dual {
  double value = 0.0;
  std::array<double, N> grad{};

  constexpr Dual() = default;
  constexpr Dual(double v) : value(v) {}  // NOLINT: implicit constants are intended
  constexpr Dual(double v, const std::array<double, N>& g) : value(v), grad(g) {}

  /// Independent variable number `index` among the N inputs.
  static constexpr Dual variable(double v, std::size_t index) {
    Dual d(v);
    d.grad[index] = 1.0;
    return d;
  }

  constexpr Dual& operator+=(const Dual& o) {
    value += o.value;
    for (std::size_t i = 0; i < N; ++i) grad[i] += o.grad[i];
    return *this;
  }
  constexpr Dual& operator-=(const Dual& o) {
    value -= o.value;
    for (std::size_t i = 0; i < N; ++i) grad[i] -= o.grad[i];
    return *this;
  }
  constexpr Dual& operator*=(const Dual& o) { return *this = *this * o; }
  constexpr Dual& operator/=(const Dual& o) { return *this = *this / o; }

  friend constexpr Dual operator-(const Dual& a) {
    Dual r(-a.value);
    for (std::size_t i = 0; i < N; ++i) r.grad[i] = -a.grad[i];
    return r;
  }
  friend constexpr Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend constexpr Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend constexpr Dual operator*(const Dual& a, const Dual& b) {
    Dual r(a.value * b.value);
    for (std::size_t i = 0; i < N; ++i) r.grad[i] = a.grad[i] * b.value + a.value * b.grad[i];
    return r;
  }
  friend constexpr Dual operator/(const Dual& a, const Dual& b) {
    Dual r(a.value / b.value);
    const double inv = 1.0 / b.value;
    for (std::size_t i = 0; i < N; ++i) r.grad[i] = (a.grad[i] - r.value * b.grad[i]) * inv;
    return r;
  }

  // Scalar overloads avoid materializing zero tangents.
  friend constexpr Dual operator+(Dual a, double b) { a.value += b; return a; }
  friend constexpr Dual operator+(double a, Dual b) { b.value += a; return b; }
  friend constexpr Dual operator-(Dual a, double b) { a.value -= b; return a; }
  friend constexpr Dual operator-(double a, const Dual& b) { return -b + a; }
  friend constexpr Dual operator*(Dual a, double b) {
    a.value *= b;
    for (auto& g : a.grad) g *= b;
    return a;
  }
  friend constexpr Dual operator*(double a, const Dual& b) { return b * a; }
  friend constexpr Dual operator/(const Dual& a, double b) {
    Dual r(a.value / b);
    for (std::size_t i = 0; i < N; ++i) r.grad[i] = a.grad[i] / b;
    return r;
  }
  friend constexpr Dual operator/(double a, const Dual& b) {
    Dual r(a / b.value);
    const double scale = -r.value / b.value;
    for (std::size_t i = 0; i < N; ++i) r.grad[i] = scale * b.grad[i];
    return r;
  }

  // Comparisons look at the value only: branches are locally constant.
  friend constexpr bool operator<(const Dual& a, const Dual& b) { return a.value < b.value; }
  friend constexpr bool operator>(const Dual& a, const Dual& b) { return a.value > b.value; }
  friend constexpr bool operator<=(const Dual& a, const Dual& b) { return a.value <= b.value; }
  friend constexpr bool operator>=(const Dual& a, const Dual& b) { return a.value >= b.value; }
};

template <std::size_t N>
Dual<N> sqrt(const Dual<N>& a) {
  Dual<N> r(std::sqrt(a.value));
  const double scale = 0.5 / r.value;
  for (std::size_t i = 0; i < N; ++i) r.grad[i] = scale * a.grad[i];
  return r;
}

template <std::size_t N>
Dual<N> sin(const Dual<N>& a) {
  Dual<N> r(std::sin(a.value));
  const double c = std::cos(a.value);
  for (std::size_t i = 0; i < N; ++i) r.grad[i] = c * a.grad[i];
  return r;
}

template <std::size_t N>
Dual<N> cos(const Dual<N>& a) {
  Dual<N> r(std::cos(a.value));
  const double s = -std::sin(a.value);
  for (std::size_t i = 0; i < N; ++i) r.grad[i] = s * a.grad[i];
  return r;
}

template <std::size_t N>
bool isfinite(const Dual<N>& a) {
  if (!std::isfinite(a.value)) return false;
  for (double g : a.grad)
    if (!std::isfinite(g)) return false;
  return true;
}

inline constexpr double value_of(double x) { return x; }
template <std::size_t N>
constexpr double value_of(const Dual<N>& x) { return x.value; }

template <class T>
struct is_dual : std::false_type {};
template <std::size_t N>
struct is_dual<Dual<N>> : std::true_type {};

}  // namespace drr
