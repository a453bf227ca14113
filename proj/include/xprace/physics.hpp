#pragma once

// Fixed-timestep point-mass ship dynamics with fatal, swept wall contact.
//
// One frame integrates in a fixed order: turn, thrust, gravity, friction,
// move (semi-implicit Euler: the new velocity moves the ship).

#include <algorithm>
#include <cmath>
#include <optional>

#include "xprace/errors.hpp"
#include "xprace/geometry.hpp"
#include "xprace/track.hpp"

namespace xprace {

struct ShipState {
  Vec2 position;
  Vec2 velocity;         // world-units per second
  double heading = 0.0;  // degrees, [0, 360)
  bool alive = true;

  friend bool operator==(const ShipState&, const ShipState&) = default;
};

struct ControlCommand {
  double turn = 0.0;    // [-1, 1], fraction of max turn rate, + is counterclockwise
  double thrust = 0.0;  // [0, 1], fraction of max thrust

  ControlCommand clamped() const { return {std::clamp(turn, -1.0, 1.0), std::clamp(thrust, 0.0, 1.0)}; }
  bool finite() const { return std::isfinite(turn) && std::isfinite(thrust); }
  friend bool operator==(const ControlCommand&, const ControlCommand&) = default;
};

struct PhysicsConfig {
  int frames_per_second = 16;
  double max_thrust_accel = 40.0;  // world-units / s^2
  double max_turn_rate = 360.0;    // degrees / s
  double friction_coeff = 0.05;    // fraction of velocity lost per second
  Vec2 gravity{0.0, 0.0};          // world-units / s^2
  double speed_norm_divisor = 20.0;

  double dt() const { return 1.0 / frames_per_second; }

  void validate() const {
    if (frames_per_second <= 0) throw ConfigError("physics.frames_per_second must be positive");
    if (!(max_thrust_accel >= 0.0) || !std::isfinite(max_thrust_accel))
      throw ConfigError("physics.max_thrust_accel must be finite and >= 0");
    if (!(max_turn_rate >= 0.0) || !std::isfinite(max_turn_rate))
      throw ConfigError("physics.max_turn_rate must be finite and >= 0");
    if (!(friction_coeff >= 0.0 && friction_coeff < 1.0)) throw ConfigError("physics.friction_coeff must be in [0, 1)");
    if (!is_finite(gravity)) throw ConfigError("physics.gravity must be finite");
    if (!(speed_norm_divisor > 0.0)) throw ConfigError("physics.speed_norm_divisor must be positive");
  }
};

struct CollisionEvent {
  Vec2 point;
  int wall_id = 0;
};

struct StepOutcome {
  ShipState next_state;
  std::optional<CollisionEvent> collision;
};

inline ShipState integrate(const ShipState& state, const ControlCommand& cmd, const PhysicsConfig& cfg) {
  if (!state.alive) throw PhysicsError("integrate called on a dead ship");
  if (!is_finite(state.position) || !is_finite(state.velocity) || !std::isfinite(state.heading))
    throw PhysicsError("non-finite ship state");
  if (!cmd.finite()) throw PhysicsError("non-finite control command");

  const ControlCommand c = cmd.clamped();
  const double dt = cfg.dt();
  ShipState next = state;
  next.heading = normalize_degrees(state.heading + c.turn * cfg.max_turn_rate * dt);
  const Vec2 thrust = unit_from_heading(next.heading) * (c.thrust * cfg.max_thrust_accel);
  next.velocity = (state.velocity + (thrust + cfg.gravity) * dt) * (1.0 - cfg.friction_coeff * dt);
  next.position = state.position + next.velocity * dt;
  if (!is_finite(next.position) || !is_finite(next.velocity)) throw PhysicsError("integration produced non-finite state");
  return next;
}

struct SweepHit {
  double t = 0.0;
  int wall_id = 0;
};

/// Earliest contact of the swept segment p0->p1 with any wall; ties go to
/// the lowest wall id.
inline std::optional<SweepHit> sweep_collide(Vec2 p0, Vec2 p1, const Track& track) {
  std::optional<SweepHit> best;
  for (const auto& w : track.walls()) {
    const auto t = sweep_segment(p0, p1, w.seg);
    if (!t) continue;
    if (!best || *t < best->t || (*t == best->t && w.id < best->wall_id)) best = SweepHit{*t, w.id};
  }
  return best;
}

inline StepOutcome step(const ShipState& state, const ControlCommand& cmd, const PhysicsConfig& cfg, const Track& track) {
  StepOutcome out{integrate(state, cmd, cfg), std::nullopt};
  if (auto hit = sweep_collide(state.position, out.next_state.position, track)) {
    const Vec2 impact = state.position + (out.next_state.position - state.position) * hit->t;
    out.next_state.position = impact;
    out.next_state.alive = false;
    out.collision = CollisionEvent{impact, hit->wall_id};
  }
  return out;
}

/// As `step`, given a lower bound on the distance from `state.position` to
/// every wall. Moves shorter than the bound skip the wall sweep.
inline StepOutcome step(const ShipState& state, const ControlCommand& cmd, const PhysicsConfig& cfg, const Track& track,
                        double clearance) {
  StepOutcome out{integrate(state, cmd, cfg), std::nullopt};
  if (distance(state.position, out.next_state.position) + 1e-9 < clearance) return out;
  if (auto hit = sweep_collide(state.position, out.next_state.position, track)) {
    const Vec2 impact = state.position + (out.next_state.position - state.position) * hit->t;
    out.next_state.position = impact;
    out.next_state.alive = false;
    out.collision = CollisionEvent{impact, hit->wall_id};
  }
  return out;
}

}  // namespace xprace
