#include "intentforge/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace intentforge {

double wrap_angle(double angle) {
  constexpr double kPi = std::numbers::pi;
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, kTwoPi);
  if (a <= -kPi) a += kTwoPi;
  if (a > kPi) a -= kTwoPi;
  return a;
}

double angle_difference(double a, double b) {
  return std::abs(wrap_angle(a - b));
}

double point_to_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

double point_to_polyline_distance(Vec2 p, std::span<const Vec2> points) {
  if (points.size() < 2) {
    throw std::invalid_argument("polyline needs at least 2 points");
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    best = std::min(best, point_to_segment_distance(p, points[i], points[i + 1]));
  }
  return best;
}

}  // namespace intentforge
