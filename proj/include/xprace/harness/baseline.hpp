#pragma once

// Scripted waypoint chaser used to measure a map's baseline lap time.
// It steers the hull toward the velocity error (desired minus actual) and
// applies a fixed modest thrust only when the hull points along it, so
// its speed settles near `cruise_speed`.

#include <charconv>
#include <cmath>
#include <sstream>
#include <string_view>
#include <string>
#include <vector>

#include "xprace/evaluation.hpp"

namespace xprace {

struct BaselineDriverConfig {
  double cruise_speed = 20.0;  // world-units / s
  double thrust = 0.5;
  double lookahead = 60.0;     // world-units
  double align_tolerance = 20.0;  // degrees
  double speed_tolerance = 0.5;
};

class BaselineDriver {
 public:
  BaselineDriver(const PhysicsConfig& phys, BaselineDriverConfig cfg = {}) : phys_(phys), cfg_(cfg) {}

  ControlCommand operator()(const EpisodeView& v) const {
    const Track& track = v.track;
    const int n = track.waypoint_count();
    Vec2 target = track.waypoints()[(v.progress.last_waypoint_index + 1) % n];
    for (int k = 1; k <= 4 && distance(target, v.state.position) < cfg_.lookahead; ++k)
      target = track.waypoints()[(v.progress.last_waypoint_index + 1 + k) % n];

    const Vec2 to_target = target - v.state.position;
    const double d = length(to_target);
    const Vec2 desired = d > 0.0 ? to_target * (cfg_.cruise_speed / d) : Vec2{};
    const Vec2 err = desired - v.state.velocity;
    const double turn_per_frame = phys_.max_turn_rate * phys_.dt();

    const double aim = length(err) > cfg_.speed_tolerance ? heading_of(err) : heading_of(to_target);
    const double delta = angle_delta(v.state.heading, aim);
    ControlCommand cmd;
    cmd.turn = turn_per_frame > 0.0 ? std::clamp(delta / turn_per_frame, -1.0, 1.0) : 0.0;
    cmd.thrust = (length(err) > cfg_.speed_tolerance && std::abs(delta) < cfg_.align_tolerance) ? cfg_.thrust : 0.0;
    return cmd;
  }

 private:
  PhysicsConfig phys_;
  BaselineDriverConfig cfg_;
};

struct BaselineResult {
  double baseline_time = 0.0;  // mean lap time over the starts
  std::vector<EpisodeResult> episodes;
};

/// Drives every start of the map once. Fails unless each lap finishes.
/// The fitness config only supplies the episode limits; its baseline is
/// not consulted.
inline BaselineResult measure_baseline(const Track& track, const PhysicsConfig& phys, const SensorConfig& sensors,
                                       FitnessConfig fit, const BaselineDriverConfig& driver = {}) {
  fit.baseline_time = 1.0;  // placeholder so episodes can compute T
  BaselineResult out;
  double sum = 0.0;
  for (const auto& s : track.starts()) {
    EpisodeResult r = run_episode(BaselineDriver(phys, driver), track, s, phys, sensors, fit);
    if (!r.lap_time)
      throw Error("baseline driver did not finish from start '" + s.label + "' (" + to_string(r.termination) +
                  " at " + std::to_string(r.completion) + "%)");
    sum += *r.lap_time;
    out.episodes.push_back(std::move(r));
  }
  out.baseline_time = sum / static_cast<double>(out.episodes.size());
  return out;
}

/// Map text with its baseline_time set, leaving every other line as is.
/// The line goes right after `name` when the map has none yet.
inline std::string with_baseline_time(std::string_view map_text, double seconds) {
  load_track(std::string(map_text));
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, seconds);
  const std::string entry = "baseline_time " + std::string(buf, res.ptr);

  std::istringstream in{std::string(map_text)};
  std::string line, out;
  bool done = false;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  auto first_word = [](const std::string& l) {
    const auto b = l.find_first_not_of(" \t");
    if (b == std::string::npos) return std::string();
    return l.substr(b, l.find_first_of(" \t#", b) - b);
  };
  for (auto& l : lines)
    if (!done && first_word(l) == "baseline_time") l = entry, done = true;
  for (std::size_t i = 0; i < lines.size() && !done; ++i)
    if (first_word(lines[i]) == "name") lines.insert(lines.begin() + static_cast<long>(i) + 1, entry), done = true;
  for (const auto& l : lines) out += l + "\n";
  load_track(out);
  return out;
}

}  // namespace xprace
