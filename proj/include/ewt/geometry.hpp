#pragma once

#include <array>
#include <cmath>

namespace ewt {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;

  double norm() const { return std::hypot(x, y); }
  constexpr double squared_norm() const { return x * x + y * y; }
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// Row-major 2x2 matrix.
struct Mat2 {
  double a00 = 1.0, a01 = 0.0;
  double a10 = 0.0, a11 = 1.0;

  static constexpr Mat2 identity() { return {}; }
  static constexpr Mat2 diagonal(double d0, double d1) { return {d0, 0.0, 0.0, d1}; }

  constexpr double det() const { return a00 * a11 - a01 * a10; }
  constexpr Mat2 transposed() const { return {a00, a10, a01, a11}; }
  constexpr Mat2 inverse() const {
    const double d = det();
    return {a11 / d, -a01 / d, -a10 / d, a00 / d};
  }
  constexpr bool is_diagonal() const { return a01 == 0.0 && a10 == 0.0; }

  friend constexpr Vec2 operator*(const Mat2& m, Vec2 v) {
    return {m.a00 * v.x + m.a01 * v.y, m.a10 * v.x + m.a11 * v.y};
  }
  friend constexpr Mat2 operator*(const Mat2& m, const Mat2& n) {
    return {m.a00 * n.a00 + m.a01 * n.a10, m.a00 * n.a01 + m.a01 * n.a11,
            m.a10 * n.a00 + m.a11 * n.a10, m.a10 * n.a01 + m.a11 * n.a11};
  }
  friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

}  // namespace ewt
