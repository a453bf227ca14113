#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace xprace {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {a.x * s, a.y * s}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double length(Vec2 v) { return std::hypot(v.x, v.y); }
constexpr double length_sq(Vec2 v) { return dot(v, v); }
inline bool is_finite(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }

inline double distance(Vec2 a, Vec2 b) { return length(b - a); }

constexpr double deg_to_rad(double deg) { return deg * (std::numbers::pi / 180.0); }
constexpr double rad_to_deg(double rad) { return rad * (180.0 / std::numbers::pi); }

/// Maps any finite angle in degrees into [0, 360).
inline double normalize_degrees(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r = 0.0;  // -1e-17 + 360 rounds to 360
  return r;
}

/// Signed smallest rotation from `from` to `to`, in (-180, 180].
inline double angle_delta(double from, double to) {
  double d = normalize_degrees(to - from);
  return d > 180.0 ? d - 360.0 : d;
}

/// Unit vector for a heading measured counterclockwise from +x.
inline Vec2 unit_from_heading(double deg) {
  const double r = deg_to_rad(deg);
  return {std::cos(r), std::sin(r)};
}

/// Heading of a vector in [0, 360); zero vector maps to 0.
inline double heading_of(Vec2 v) {
  if (v.x == 0.0 && v.y == 0.0) return 0.0;
  return normalize_degrees(rad_to_deg(std::atan2(v.y, v.x)));
}

inline Vec2 rotate(Vec2 v, double deg) {
  const double r = deg_to_rad(deg);
  const double c = std::cos(r), s = std::sin(r);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

struct Segment {
  Vec2 a;
  Vec2 b;
};

struct ClosestPoint {
  Vec2 point;
  double t = 0.0;  // parameter along the segment, clamped to [0, 1]
};

inline ClosestPoint closest_point(Segment s, Vec2 p) {
  const Vec2 e = s.b - s.a;
  const double len2 = length_sq(e);
  if (len2 == 0.0) return {s.a, 0.0};
  double t = dot(p - s.a, e) / len2;
  if (t < 0.0) t = 0.0;
  if (t > 1.0) t = 1.0;
  return {s.a + e * t, t};
}

inline double point_segment_distance(Vec2 p, Segment s) {
  return distance(p, closest_point(s, p).point);
}

/// Earliest parameter t in [0, 1] along p0->p1 where the path touches the
/// segment, or nothing. Collinear overlaps report the first touching point.
inline std::optional<double> sweep_segment(Vec2 p0, Vec2 p1, Segment s) {
  constexpr double kEps = 1e-12;
  const Vec2 d = p1 - p0;
  const Vec2 e = s.b - s.a;
  const Vec2 w = s.a - p0;
  const double denom = cross(d, e);
  const double scale = std::sqrt(length_sq(d) * length_sq(e));

  if (std::abs(denom) <= kEps * scale) {
    // Parallel. Only collinear configurations can touch.
    const double dd = length_sq(d);
    if (dd == 0.0) {
      // Stationary point: touching iff it lies on the segment.
      const double el = length_sq(e);
      if (el == 0.0) return p0 == s.a ? std::optional<double>(0.0) : std::nullopt;
      if (std::abs(cross(e, p0 - s.a)) > kEps * el) return std::nullopt;
      const double u = dot(p0 - s.a, e) / el;
      if (u < -kEps || u > 1.0 + kEps) return std::nullopt;
      return 0.0;
    }
    if (std::abs(cross(d, w)) > kEps * dd * std::max(1.0, std::sqrt(length_sq(w) / dd))) {
      return std::nullopt;
    }
    const double ta = dot(s.a - p0, d) / dd;
    const double tb = dot(s.b - p0, d) / dd;
    const double lo = std::min(ta, tb), hi = std::max(ta, tb);
    if (hi < 0.0 || lo > 1.0) return std::nullopt;
    return std::max(0.0, lo);
  }

  const double t = cross(w, e) / denom;
  const double u = cross(w, d) / denom;
  if (t < -kEps || t > 1.0 + kEps) return std::nullopt;
  if (u < -kEps || u > 1.0 + kEps) return std::nullopt;
  return std::clamp(t, 0.0, 1.0);
}

/// Distance along a unit-direction ray to the segment, or nothing.
inline std::optional<double> ray_segment(Vec2 origin, Vec2 unit_dir, Segment s) {
  constexpr double kEps = 1e-12;
  const Vec2 e = s.b - s.a;
  const Vec2 w = s.a - origin;
  const double denom = cross(unit_dir, e);
  const double el = std::sqrt(length_sq(e));
  if (std::abs(denom) <= kEps * el) {
    if (std::abs(cross(unit_dir, w)) > kEps * std::max(1.0, length(w))) return std::nullopt;
    const double ta = dot(s.a - origin, unit_dir);
    const double tb = dot(s.b - origin, unit_dir);
    const double hi = std::max(ta, tb);
    if (hi < 0.0) return std::nullopt;
    return std::max(0.0, std::min(ta, tb));
  }
  const double t = cross(w, e) / denom;
  const double u = cross(w, unit_dir) / denom;
  if (t < 0.0) return std::nullopt;
  if (u < -kEps || u > 1.0 + kEps) return std::nullopt;
  return t;
}

}  // namespace xprace
