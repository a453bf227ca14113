#pragma once

// Trial configuration and its JSON form. See docs/config.md for the keys.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "xprace/evaluation.hpp"
#include "xprace/json_util.hpp"
#include "xprace/neat/serialize.hpp"
#include "xprace/physics.hpp"
#include "xprace/sensors.hpp"
#include "xprace/track.hpp"

namespace xprace {

inline Json physics_config_to_json(const PhysicsConfig& c) {
  return {{"frames_per_second", c.frames_per_second}, {"max_thrust_accel", c.max_thrust_accel},
          {"max_turn_rate", c.max_turn_rate},         {"friction_coeff", c.friction_coeff},
          {"gravity", {c.gravity.x, c.gravity.y}},     {"speed_norm_divisor", c.speed_norm_divisor}};
}

inline PhysicsConfig physics_config_from_json(const Json& j) {
  JsonFields f(j, "physics");
  f.allow_only({"frames_per_second", "max_thrust_accel", "max_turn_rate", "friction_coeff", "gravity",
                "speed_norm_divisor"});
  PhysicsConfig c;
  f.get("frames_per_second", c.frames_per_second);
  f.get("max_thrust_accel", c.max_thrust_accel);
  f.get("max_turn_rate", c.max_turn_rate);
  f.get("friction_coeff", c.friction_coeff);
  std::vector<double> g{c.gravity.x, c.gravity.y};
  f.get("gravity", g);
  if (g.size() != 2) throw ConfigError("physics.gravity: expected [x, y]");
  c.gravity = {g[0], g[1]};
  f.get("speed_norm_divisor", c.speed_norm_divisor);
  c.validate();
  return c;
}

inline Json sensor_config_to_json(const SensorConfig& c) {
  Json j = {{"max_range", c.max_range},
            {"max_tt_frames", c.max_tt_frames},
            {"closest_mode", c.closest_mode == ClosestWallMode::fan ? "fan" : "exact"},
            {"fan_rays", c.fan_rays}};
  j["retro_accel"] = c.retro_accel ? Json(*c.retro_accel) : Json(nullptr);
  return j;
}

inline SensorConfig sensor_config_from_json(const Json& j) {
  JsonFields f(j, "sensors");
  f.allow_only({"max_range", "max_tt_frames", "retro_accel", "closest_mode", "fan_rays"});
  SensorConfig c;
  f.get("max_range", c.max_range);
  f.get("max_tt_frames", c.max_tt_frames);
  if (const Json* r = f.find("retro_accel"); r && !r->is_null()) c.retro_accel = r->get<double>();
  std::string mode = "fan";
  f.get("closest_mode", mode);
  if (mode == "fan")
    c.closest_mode = ClosestWallMode::fan;
  else if (mode == "exact")
    c.closest_mode = ClosestWallMode::exact;
  else
    throw ConfigError("sensors.closest_mode must be \"fan\" or \"exact\"");
  f.get("fan_rays", c.fan_rays);
  c.validate();
  return c;
}

inline Json fitness_config_to_json(const FitnessConfig& c) {
  Json j = {{"time_limit", c.time_limit},
            {"stall_window", c.stall_window},
            {"speed_bonus_threshold", c.speed_bonus_threshold},
            {"bonus_exponent", c.bonus_exponent},
            {"bonus_divisor", c.bonus_divisor},
            {"bonus_cap", c.bonus_cap},
            {"completion_exponent", c.completion_exponent},
            {"time_offset", c.time_offset},
            {"time_exponent", c.time_exponent}};
  j["baseline_time"] = c.baseline_time ? Json(*c.baseline_time) : Json(nullptr);
  return j;
}

inline FitnessConfig fitness_config_from_json(const Json& j) {
  JsonFields f(j, "fitness");
  f.allow_only({"baseline_time", "time_limit", "stall_window", "speed_bonus_threshold", "bonus_exponent",
                "bonus_divisor", "bonus_cap", "completion_exponent", "time_offset", "time_exponent"});
  FitnessConfig c;
  if (const Json* b = f.find("baseline_time"); b && !b->is_null()) c.baseline_time = b->get<double>();
  f.get("time_limit", c.time_limit);
  f.get("stall_window", c.stall_window);
  f.get("speed_bonus_threshold", c.speed_bonus_threshold);
  f.get("bonus_exponent", c.bonus_exponent);
  f.get("bonus_divisor", c.bonus_divisor);
  f.get("bonus_cap", c.bonus_cap);
  f.get("completion_exponent", c.completion_exponent);
  f.get("time_offset", c.time_offset);
  f.get("time_exponent", c.time_exponent);
  c.validate();
  return c;
}

enum class TracePolicy { never, best_per_generation, top_k_per_species };

inline const char* to_string(TracePolicy p) {
  switch (p) {
    case TracePolicy::never: return "never";
    case TracePolicy::best_per_generation: return "best_per_generation";
    case TracePolicy::top_k_per_species: return "top_k_per_species";
  }
  return "?";
}

inline TracePolicy trace_policy_from(const std::string& s) {
  if (s == "never") return TracePolicy::never;
  if (s == "best_per_generation") return TracePolicy::best_per_generation;
  if (s == "top_k_per_species") return TracePolicy::top_k_per_species;
  throw ConfigError("trace_policy must be never, best_per_generation or top_k_per_species");
}

struct TrialConfig {
  std::filesystem::path map_path;
  std::vector<std::string> starts{"A", "B"};
  neat::EvolutionConfig evolution;
  PhysicsConfig physics;
  SensorConfig sensors;
  FitnessConfig fitness;
  int generations = 1000;
  int workers = 1;
  std::uint64_t seed = 1;  // overrides evolution.rng_seed
  std::filesystem::path output_dir = "runs/trial";
  int checkpoint_interval = 10;
  TracePolicy trace_policy = TracePolicy::never;
  int trace_top_k = 1;

  /// Checks the nested configs and that the map and its start labels exist.
  Track validate() const {
    if (generations < 1) throw ConfigError("generations must be >= 1");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (checkpoint_interval < 1) throw ConfigError("checkpoint_interval must be >= 1");
    if (trace_top_k < 1) throw ConfigError("trace_top_k must be >= 1");
    if (starts.empty()) throw ConfigError("starts must not be empty");
    evolution.validate();
    physics.validate();
    sensors.validate();
    fitness.validate();
    Track track = load_track_file(map_path);
    for (std::size_t i = 0; i < starts.size(); ++i) {
      if (!track.find_start(starts[i]))
        throw ConfigError("start '" + starts[i] + "' is not defined in map " + map_path.string());
      for (std::size_t k = 0; k < i; ++k)
        if (starts[k] == starts[i]) throw ConfigError("start '" + starts[i] + "' listed twice");
    }
    fitness.resolve_baseline(track);
    return track;
  }

  neat::EvolutionConfig seeded_evolution() const {
    neat::EvolutionConfig e = evolution;
    e.rng_seed = seed;
    return e;
  }
};

/// `base_dir` resolves relative map/output paths (normally the config
/// file's directory).
inline TrialConfig trial_config_from_json(const Json& j, const std::filesystem::path& base_dir = {}) {
  JsonFields f(j, "config");
  f.allow_only({"map", "starts", "generations", "workers", "seed", "output_dir", "checkpoint_interval",
                "trace_policy", "trace_top_k", "evolution", "physics", "sensors", "fitness"});
  TrialConfig c;
  std::string map;
  f.get("map", map);
  if (map.empty()) throw ConfigError("config.map is required");
  c.map_path = base_dir / map;
  f.get("starts", c.starts);
  f.get("generations", c.generations);
  f.get("workers", c.workers);
  f.get("seed", c.seed);
  std::string out;
  f.get("output_dir", out);
  if (!out.empty()) c.output_dir = base_dir / out;
  f.get("checkpoint_interval", c.checkpoint_interval);
  std::string policy = to_string(c.trace_policy);
  f.get("trace_policy", policy);
  c.trace_policy = trace_policy_from(policy);
  f.get("trace_top_k", c.trace_top_k);
  if (const Json* e = f.find("evolution")) c.evolution = neat::evolution_config_from_json(*e);
  if (const Json* p = f.find("physics")) c.physics = physics_config_from_json(*p);
  if (const Json* s = f.find("sensors")) c.sensors = sensor_config_from_json(*s);
  if (const Json* x = f.find("fitness")) c.fitness = fitness_config_from_json(*x);
  return c;
}

/// Absolute paths are written so the result can be loaded from anywhere.
inline Json trial_config_to_json(const TrialConfig& c) {
  return {{"map", std::filesystem::absolute(c.map_path).lexically_normal().string()},
          {"starts", c.starts},
          {"generations", c.generations},
          {"workers", c.workers},
          {"seed", c.seed},
          {"output_dir", std::filesystem::absolute(c.output_dir).lexically_normal().string()},
          {"checkpoint_interval", c.checkpoint_interval},
          {"trace_policy", to_string(c.trace_policy)},
          {"trace_top_k", c.trace_top_k},
          {"evolution", neat::evolution_config_to_json(c.evolution)},
          {"physics", physics_config_to_json(c.physics)},
          {"sensors", sensor_config_to_json(c.sensors)},
          {"fitness", fitness_config_to_json(c.fitness)}};
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline TrialConfig load_trial_config(const std::filesystem::path& path) {
  return trial_config_from_json(read_json_file(path), path.parent_path());
}

}  // namespace xprace
