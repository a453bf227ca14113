#pragma once

// One lap attempt per start point and the shaped fitness that scores it.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <optional>
#include <string>
#include <vector>

#include "xprace/errors.hpp"
#include "xprace/neat/network.hpp"
#include "xprace/physics.hpp"
#include "xprace/sensors.hpp"
#include "xprace/track.hpp"

namespace xprace {

struct FitnessConfig {
  std::optional<double> baseline_time;  // seconds; falls back to the map's value
  double time_limit = 120.0;
  double stall_window = 3.0;
  double speed_bonus_threshold = 1.0;
  double bonus_exponent = 1.1;
  double bonus_divisor = 250.0;
  double bonus_cap = 50.0;
  double completion_exponent = 1.1;
  double time_offset = 75.0;
  double time_exponent = 1.2;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("fitness.") + name + " must be positive");
    };
    if (baseline_time) positive(*baseline_time, "baseline_time");
    positive(time_limit, "time_limit");
    positive(stall_window, "stall_window");
    positive(speed_bonus_threshold, "speed_bonus_threshold");
    positive(bonus_exponent, "bonus_exponent");
    positive(bonus_divisor, "bonus_divisor");
    positive(bonus_cap, "bonus_cap");
    positive(completion_exponent, "completion_exponent");
    positive(time_offset, "time_offset");
    positive(time_exponent, "time_exponent");
    if (!(stall_window < time_limit)) throw ConfigError("fitness.stall_window must be below fitness.time_limit");
  }

  double resolve_baseline(const Track& track) const {
    if (baseline_time) return *baseline_time;
    if (track.baseline_time()) return *track.baseline_time();
    throw ConfigError("no baseline_time for map '" + track.name() + "' (run `xprace baseline` or set fitness.baseline_time)");
  }
};

enum class Termination { finished, collision, stalled, time_limit };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::finished: return "finished";
    case Termination::collision: return "collision";
    case Termination::stalled: return "stalled";
    case Termination::time_limit: return "time_limit";
  }
  return "?";
}

struct TraceRow {
  int frame = 0;
  Vec2 position;
  double heading = 0.0;
  double speed = 0.0;
  double turn = 0.0;
  double thrust = 0.0;
  double completion = 0.0;
};

struct EpisodeResult {
  std::string start_label;
  double completion = 0.0;  // percent
  double speed_bonus = 0.0;
  std::optional<double> lap_time;    // seconds, finished laps only
  std::optional<double> time_delta;  // baseline - lap_time
  Termination termination = Termination::collision;
  int frames = 0;
  std::optional<std::vector<TraceRow>> trace;
};

struct EpisodeView {
  const SensorVector& sensors;
  const ShipState& state;
  const ProgressState& progress;
  const Track& track;
  int frame;
};

template <class C>
concept Controller = requires(C& c, const EpisodeView& v) {
  { c(v) } -> std::convertible_to<ControlCommand>;
};

/// Drives the ship from the sensor vector alone.
class NetworkController {
 public:
  explicit NetworkController(const neat::Network& net) : net_(&net) {}
  ControlCommand operator()(const EpisodeView& v) { return net_->activate(v.sensors.values, scratch_); }

 private:
  const neat::Network* net_;
  std::vector<double> scratch_;
};

/// Per-frame speed reward: zero at or below the threshold, otherwise
/// speed^e / divisor clamped to 1.
inline double frame_bonus(double speed, const FitnessConfig& cfg) {
  if (!(speed > cfg.speed_bonus_threshold)) return 0.0;
  return std::min(std::pow(speed, cfg.bonus_exponent) / cfg.bonus_divisor, 1.0);
}

template <Controller C>
EpisodeResult run_episode(C&& controller, const Track& track, const StartPoint& start, const PhysicsConfig& phys,
                          const SensorConfig& sensor_cfg, const FitnessConfig& fit, bool record_trace = false) {
  const double baseline = fit.resolve_baseline(track);
  const double dt = phys.dt();
  const int fps = phys.frames_per_second;
  const long stall_frames = static_cast<long>(std::ceil(fit.stall_window * fps - 1e-9));
  const long limit_frames = static_cast<long>(std::ceil(fit.time_limit * fps - 1e-9));

  ShipState state{start.position, {0.0, 0.0}, start.heading, true};
  ProgressState progress = initial_progress(track, start);
  ControlCommand last_cmd{};
  EpisodeResult result;
  result.start_label = start.label;
  if (record_trace) result.trace.emplace().push_back({0, state.position, state.heading, 0.0, 0.0, 0.0, 0.0});

  for (int frame = 1;; ++frame) {
    const RayCaster rays(track, state.position);
    const SensorVector sensors = sense(rays, state, track, progress, last_cmd, sensor_cfg, phys);
    ControlCommand cmd = controller(EpisodeView{sensors, state, progress, track, frame - 1});
    if (!cmd.finite()) {
      result.termination = Termination::collision;
      result.frames = frame - 1;
      break;
    }
    cmd = cmd.clamped();

    const StepOutcome out = step(state, cmd, phys, track, rays.nearest().first);
    state = out.next_state;
    last_cmd = cmd;
    progress = completion(track, state.position, progress).second;
    const double speed = length(state.velocity);

    if (state.alive && progress.frames_since_progress == 0) result.speed_bonus += frame_bonus(speed, fit);
    if (record_trace)
      result.trace->push_back({frame, state.position, state.heading, speed, cmd.turn, cmd.thrust, progress.best_completion});

    result.frames = frame;
    if (!state.alive) {
      result.termination = Termination::collision;
      break;
    }
    if (progress.finished()) {
      result.termination = Termination::finished;
      result.lap_time = frame * dt;
      result.time_delta = baseline - *result.lap_time;
      break;
    }
    if (progress.frames_since_progress >= stall_frames) {
      result.termination = Termination::stalled;
      break;
    }
    if (frame >= limit_frames) {
      result.termination = Termination::time_limit;
      break;
    }
  }
  result.completion = progress.best_completion;
  return result;
}

inline EpisodeResult run_episode(const neat::Network& net, const Track& track, const StartPoint& start,
                                 const PhysicsConfig& phys, const SensorConfig& sensor_cfg, const FitnessConfig& fit,
                                 bool record_trace = false) {
  return run_episode(NetworkController(net), track, start, phys, sensor_cfg, fit, record_trace);
}

/// C^a + min(B, cap) + (max(T + offset, 0))^b when a lap time exists.
inline double fitness(const EpisodeResult& r, const FitnessConfig& cfg) {
  if (!(r.completion >= 0.0 && r.completion <= 100.0)) throw Error("completion outside [0, 100]");
  double f = std::pow(r.completion, cfg.completion_exponent) + std::min(r.speed_bonus, cfg.bonus_cap);
  if (r.time_delta) f += std::pow(std::max(*r.time_delta + cfg.time_offset, 0.0), cfg.time_exponent);
  return f;
}

/// Sum over one result per configured start label.
inline double total_fitness(const std::vector<EpisodeResult>& results, const std::vector<std::string>& starts,
                            const FitnessConfig& cfg) {
  double total = 0.0;
  for (const auto& label : starts) {
    const EpisodeResult* found = nullptr;
    for (const auto& r : results) {
      if (r.start_label != label) continue;
      if (found) throw Error("duplicate result for start '" + label + "'");
      found = &r;
    }
    if (!found) throw Error("missing result for start '" + label + "'");
    total += fitness(*found, cfg);
  }
  if (results.size() != starts.size()) throw Error("results include unconfigured starts");
  return total;
}

}  // namespace xprace
