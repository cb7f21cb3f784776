#pragma once

// 2x2 matrix / 2-vector value types for the augmented per-SMA state
// [temperature, 1]. Small enough that hand-rolled arithmetic beats pulling
// in a matrix library.

namespace smasim {

struct Vec2 {
  double x0 = 0.0;
  double x1 = 0.0;
};

struct Mat2 {
  double m00 = 0.0;
  double m01 = 0.0;
  double m10 = 0.0;
  double m11 = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
};

inline Vec2 operator*(const Mat2& a, const Vec2& v) {
  return {a.m00 * v.x0 + a.m01 * v.x1, a.m10 * v.x0 + a.m11 * v.x1};
}

inline Mat2 operator*(double s, const Mat2& a) {
  return {s * a.m00, s * a.m01, s * a.m10, s * a.m11};
}

inline Vec2 operator*(double s, const Vec2& v) { return {s * v.x0, s * v.x1}; }

inline Vec2 operator+(const Vec2& a, const Vec2& b) {
  return {a.x0 + b.x0, a.x1 + b.x1};
}

inline Vec2 operator-(const Vec2& a, const Vec2& b) {
  return {a.x0 - b.x0, a.x1 - b.x1};
}

inline Mat2 operator-(const Mat2& a, const Mat2& b) {
  return {a.m00 - b.m00, a.m01 - b.m01, a.m10 - b.m10, a.m11 - b.m11};
}

}  // namespace smasim
