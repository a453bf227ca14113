#pragma once

// The 23-element controller input vector. Order and normalization are the
// genome input-layer contract; see docs/sensors.md.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string_view>

#include "xprace/geometry.hpp"
#include "xprace/physics.hpp"
#include "xprace/track.hpp"

namespace xprace {

inline constexpr std::size_t kSensorCount = 23;
inline constexpr int kSensorTableVersion = 1;

enum class Sensor : std::size_t {
  ship_speed_norm,
  wall_track,
  angle_diff_tracking,
  closest_wall,
  angle_diff_closest,
  wall_0,
  wall_180,
  wall_m15,
  wall_p15,
  wall_m30,
  wall_p30,
  wall_m90,
  wall_p90,
  tt_tracking,
  tt_retro_point,
  last_thrust,
  last_turn,
  wp1_angle,
  wp1_dist,
  wp2_angle,
  wp2_dist,
  wp3_angle,
  wp3_dist,
};

inline constexpr std::array<std::string_view, kSensorCount> kSensorNames = {
    "ship_speed_norm", "wall_track", "angle_diff_tracking", "closest_wall", "angle_diff_closest", "wall_0",
    "wall_180",        "wall_m15",   "wall_p15",            "wall_m30",     "wall_p30",           "wall_m90",
    "wall_p90",        "tt_tracking", "tt_retro_point",     "last_thrust",  "last_turn",          "wp1_angle",
    "wp1_dist",        "wp2_angle",  "wp2_dist",            "wp3_angle",    "wp3_dist",
};

/// True for entries encoded as signed fractions of 180 degrees.
constexpr bool is_angle_sensor(Sensor s) {
  switch (s) {
    case Sensor::angle_diff_tracking:
    case Sensor::angle_diff_closest:
    case Sensor::wp1_angle:
    case Sensor::wp2_angle:
    case Sensor::wp3_angle:
      return true;
    default:
      return false;
  }
}

/// Declared range of each entry; angles and last_turn are [-1, 1].
constexpr double sensor_lower_bound(Sensor s) {
  return (is_angle_sensor(s) || s == Sensor::last_turn) ? -1.0 : 0.0;
}

struct SensorVector {
  std::array<double, kSensorCount> values{};

  double& operator[](Sensor s) { return values[static_cast<std::size_t>(s)]; }
  double operator[](Sensor s) const { return values[static_cast<std::size_t>(s)]; }
  friend bool operator==(const SensorVector&, const SensorVector&) = default;
};

enum class ClosestWallMode { fan, exact };

struct SensorConfig {
  double max_range = 500.0;
  int max_tt_frames = 256;
  std::optional<double> retro_accel;  // defaults to physics max_thrust_accel
  ClosestWallMode closest_mode = ClosestWallMode::fan;
  int fan_rays = 72;

  double retro_deceleration(const PhysicsConfig& phys) const { return retro_accel.value_or(phys.max_thrust_accel); }

  void validate() const {
    if (!(max_range > 0.0) || !std::isfinite(max_range)) throw ConfigError("sensors.max_range must be positive");
    if (max_tt_frames <= 0) throw ConfigError("sensors.max_tt_frames must be positive");
    if (retro_accel && !(*retro_accel > 0.0)) throw ConfigError("sensors.retro_accel must be positive");
    if (fan_rays <= 0) throw ConfigError("sensors.fan_rays must be positive");
  }
};

/// Frames to cover `dist` at `closing_speed`, capped. Non-approaching
/// motion reports the cap.
inline double frames_to_cover(double dist, double closing_speed, int fps, int max_frames) {
  if (!(closing_speed > 0.0)) return max_frames;
  return std::clamp(dist / closing_speed * fps, 0.0, static_cast<double>(max_frames));
}

/// Frames until the last point where constant deceleration `decel` still
/// stops the ship short of a wall `dist` ahead.
inline double retro_point_frames(double dist, double closing_speed, double decel, int fps, int max_frames) {
  if (!(closing_speed > 0.0)) return max_frames;
  const double stopping = closing_speed * closing_speed / (2.0 * decel);
  if (dist <= stopping) return 0.0;
  return std::clamp(fps * (dist - stopping) / closing_speed, 0.0, static_cast<double>(max_frames));
}

inline double time_to_collision(const ShipState& state, const Track& track, double direction_deg,
                                const SensorConfig& cfg, const PhysicsConfig& phys) {
  const Vec2 dir = unit_from_heading(direction_deg);
  const double d = RayCaster(track, state.position).cast_dir(dir, cfg.max_range);
  return frames_to_cover(d, dot(state.velocity, dir), phys.frames_per_second, cfg.max_tt_frames);
}

inline double retro_point_time(const ShipState& state, const Track& track, double direction_deg,
                               const SensorConfig& cfg, const PhysicsConfig& phys) {
  const Vec2 dir = unit_from_heading(direction_deg);
  const double d = RayCaster(track, state.position).cast_dir(dir, cfg.max_range);
  return retro_point_frames(d, dot(state.velocity, dir), cfg.retro_deceleration(phys), phys.frames_per_second,
                            cfg.max_tt_frames);
}

inline double retro_point_time(const ShipState& state, const Track& track, const ProgressState& progress,
                               const SensorConfig& cfg, const PhysicsConfig& phys) {
  return retro_point_time(state, track, track_direction(track, progress), cfg, phys);
}

namespace detail {

inline double norm_angle(double delta_deg) { return std::clamp(delta_deg / 180.0, -1.0, 1.0); }
inline double norm_dist(double d, double range) { return std::clamp(d / range, 0.0, 1.0); }

}  // namespace detail

/// `rays` must be built for `state.position` on `track`.
inline SensorVector sense(const RayCaster& rays, const ShipState& state, const Track& track,
                          const ProgressState& progress, const ControlCommand& last_cmd, const SensorConfig& cfg,
                          const PhysicsConfig& phys) {
  using detail::norm_angle;
  using detail::norm_dist;
  const double range = cfg.max_range;
  const double h = state.heading;
  SensorVector v;

  v[Sensor::ship_speed_norm] = std::clamp(length(state.velocity) / phys.speed_norm_divisor, 0.0, 1.0);

  const double track_dir = track_direction(track, progress);
  const Vec2 track_unit = unit_from_heading(track_dir);
  const double track_dist = rays.cast_dir(track_unit, range);
  v[Sensor::wall_track] = norm_dist(track_dist, range);
  v[Sensor::angle_diff_tracking] = norm_angle(angle_delta(h, track_dir));

  // Closest wall: fan offsets are relative to the heading so the reading is
  // frame-independent. The fan is symmetric about the heading axis.
  if (cfg.closest_mode == ClosestWallMode::fan) {
    double best = range;
    double best_offset = 0.0;
    const double step = 360.0 / cfg.fan_rays;
    for (int k = 0; k < cfg.fan_rays; ++k) {
      double offset = k * step;
      if (offset > 180.0) offset -= 360.0;
      const double d = rays.cast(h + offset, range);
      // Exact ties prefer the smaller |offset|, then the positive side.
      if (d < best || (d == best && d < range &&
                       (std::abs(offset) < std::abs(best_offset) ||
                        (std::abs(offset) == std::abs(best_offset) && offset > best_offset)))) {
        best = d;
        best_offset = offset;
      }
    }
    v[Sensor::closest_wall] = norm_dist(best, range);
    v[Sensor::angle_diff_closest] = norm_angle(best_offset);
  } else {
    const auto [d, idx] = rays.nearest();
    const Vec2 q = closest_point(track.walls()[static_cast<std::size_t>(idx)].seg, state.position).point;
    v[Sensor::closest_wall] = norm_dist(d, range);
    v[Sensor::angle_diff_closest] = d > 0.0 ? norm_angle(angle_delta(h, heading_of(q - state.position))) : 0.0;
  }

  v[Sensor::wall_0] = norm_dist(rays.cast(h, range), range);
  v[Sensor::wall_180] = norm_dist(rays.cast(h + 180.0, range), range);
  v[Sensor::wall_m15] = norm_dist(rays.cast(h - 15.0, range), range);
  v[Sensor::wall_p15] = norm_dist(rays.cast(h + 15.0, range), range);
  v[Sensor::wall_m30] = norm_dist(rays.cast(h - 30.0, range), range);
  v[Sensor::wall_p30] = norm_dist(rays.cast(h + 30.0, range), range);
  v[Sensor::wall_m90] = norm_dist(rays.cast(h - 90.0, range), range);
  v[Sensor::wall_p90] = norm_dist(rays.cast(h + 90.0, range), range);

  const double closing = dot(state.velocity, track_unit);
  const double max_tt = cfg.max_tt_frames;
  v[Sensor::tt_tracking] = frames_to_cover(track_dist, closing, phys.frames_per_second, cfg.max_tt_frames) / max_tt;
  v[Sensor::tt_retro_point] =
      retro_point_frames(track_dist, closing, cfg.retro_deceleration(phys), phys.frames_per_second, cfg.max_tt_frames) /
      max_tt;

  const ControlCommand last = last_cmd.clamped();
  v[Sensor::last_thrust] = last.thrust;
  v[Sensor::last_turn] = last.turn;

  const int n = track.waypoint_count();
  constexpr Sensor kAngle[3] = {Sensor::wp1_angle, Sensor::wp2_angle, Sensor::wp3_angle};
  constexpr Sensor kDist[3] = {Sensor::wp1_dist, Sensor::wp2_dist, Sensor::wp3_dist};
  for (int i = 0; i < 3; ++i) {
    const Vec2 rel = track.waypoints()[(progress.last_waypoint_index + 1 + i) % n] - state.position;
    const double d = length(rel);
    v[kAngle[i]] = d > 0.0 ? norm_angle(angle_delta(h, heading_of(rel))) : 0.0;
    v[kDist[i]] = norm_dist(d, range);
  }
  return v;
}

inline SensorVector sense(const ShipState& state, const Track& track, const ProgressState& progress,
                          const ControlCommand& last_cmd, const SensorConfig& cfg, const PhysicsConfig& phys) {
  return sense(RayCaster(track, state.position), state, track, progress, last_cmd, cfg, phys);
}

}  // namespace xprace
