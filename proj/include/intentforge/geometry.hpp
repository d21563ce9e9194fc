#pragma once

#include <cmath>
#include <numbers>
#include <span>

namespace intentforge {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

// sqrt(dx*dx + dy*dy) everywhere, never hypot: the SIMD kernels reproduce this
// exact operation sequence.
inline double norm(Vec2 v) { return std::sqrt(v.x * v.x + v.y * v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline double squared_distance(Vec2 a, Vec2 b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline double heading_of(Vec2 v) { return std::atan2(v.y, v.x); }

/// Counter-clockwise rotation by `angle` radians.
inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

/// Absolute angular difference wrapped to [0, pi].
double angle_difference(double a, double b);

double point_to_segment_distance(Vec2 p, Vec2 a, Vec2 b);

/// Exact distance from `p` to the union of segments between consecutive
/// points. Throws std::invalid_argument for fewer than two points.
double point_to_polyline_distance(Vec2 p, std::span<const Vec2> points);

}  // namespace intentforge
