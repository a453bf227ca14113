#pragma once

// Trace CSV files, champion documents, and deterministic replay.

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "xprace/evaluation.hpp"
#include "xprace/harness/config.hpp"
#include "xprace/harness/log.hpp"
#include "xprace/neat/serialize.hpp"

namespace xprace {

// ---------------------------------------------------------------------------
// Trace CSV

struct Trace {
  std::string start_label;
  std::optional<Termination> termination;
  std::string map_name;
  std::vector<TraceRow> rows;
};

inline constexpr std::string_view kTraceColumns = "frame,x,y,heading,speed,turn,thrust,completion";

inline std::optional<Termination> termination_from(std::string_view s) {
  for (auto t : {Termination::finished, Termination::collision, Termination::stalled, Termination::time_limit})
    if (s == to_string(t)) return t;
  return std::nullopt;
}

inline std::string trace_to_csv(const Trace& t) {
  using detail::format_real;
  std::string out = "# start=" + t.start_label;
  if (t.termination) out += std::string(" termination=") + to_string(*t.termination);
  if (!t.map_name.empty()) out += " map=" + t.map_name;
  out += "\n";
  out += kTraceColumns;
  out += "\n";
  for (const auto& r : t.rows) {
    out += std::to_string(r.frame) + "," + format_real(r.position.x) + "," + format_real(r.position.y) + "," +
           format_real(r.heading) + "," + format_real(r.speed) + "," + format_real(r.turn) + "," +
           format_real(r.thrust) + "," + format_real(r.completion) + "\n";
  }
  return out;
}

inline Trace trace_from_episode(const EpisodeResult& r, const Track& track) {
  if (!r.trace) throw Error("episode was run without trace recording");
  return Trace{r.start_label, r.termination, track.name(), *r.trace};
}

/// Accepts files with or without the leading `# key=value ...` line.
inline Trace parse_trace_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  Trace t;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string kv;
      while (meta >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
        if (key == "start") t.start_label = value;
        if (key == "termination") t.termination = termination_from(value);
        if (key == "map") t.map_name = value;
      }
      continue;
    }
    if (!header_seen) {
      if (line != kTraceColumns) throw Error("trace line " + std::to_string(lineno) + ": expected column header");
      header_seen = true;
      continue;
    }
    const auto f = detail::split_csv(line);
    if (f.size() != 8) throw Error("trace line " + std::to_string(lineno) + ": expected 8 fields");
    TraceRow r;
    r.frame = detail::parse_field<int>(f[0], lineno, "frame");
    r.position = {detail::parse_field<double>(f[1], lineno, "x"), detail::parse_field<double>(f[2], lineno, "y")};
    r.heading = detail::parse_field<double>(f[3], lineno, "heading");
    r.speed = detail::parse_field<double>(f[4], lineno, "speed");
    r.turn = detail::parse_field<double>(f[5], lineno, "turn");
    r.thrust = detail::parse_field<double>(f[6], lineno, "thrust");
    r.completion = detail::parse_field<double>(f[7], lineno, "completion");
    t.rows.push_back(r);
  }
  if (!header_seen) throw Error("trace: missing column header");
  return t;
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw Error("cannot write " + path.string());
}

/// Writes to a sibling temp file and renames, so readers never see a
/// half-written document.
inline void write_text_file_atomic(const std::filesystem::path& path, std::string_view text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  write_text_file(tmp, text);
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot write " + path.string() + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// Champion documents

struct Champion {
  neat::Genome genome;
  double fitness = 0.0;
  std::int64_t generation = 0;
  std::string map_name;
};

inline Json champion_to_json(const Champion& c) {
  return {{"format", "xprace.champion"},  {"version", 1},
          {"map", c.map_name},            {"generation", c.generation},
          {"fitness", c.fitness},         {"genome", neat::genome_to_json(c.genome)}};
}

inline Champion champion_from_json(const Json& j) {
  try {
    if (j.value("format", std::string{}) != "xprace.champion" || j.at("version").get<int>() != 1)
      throw GenomeError("not a version-1 champion document");
    Champion c;
    c.map_name = j.at("map").get<std::string>();
    c.generation = j.at("generation").get<std::int64_t>();
    c.fitness = j.at("fitness").get<double>();
    c.genome = neat::genome_from_json(j.at("genome"));
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw GenomeError(std::string("malformed champion: ") + e.what());
  }
}

/// A genome file is either a champion document or a bare genome; the
/// map name is known only for the former.
struct GenomeFile {
  neat::Genome genome;
  std::optional<std::string> map_name;
};

inline GenomeFile load_genome_file(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path.string()));
  } catch (const nlohmann::json::parse_error& e) {
    throw GenomeError(path.string() + ": " + e.what());
  }
  if (j.is_object() && j.value("format", std::string{}) == "xprace.champion") {
    Champion c = champion_from_json(j);
    return {std::move(c.genome), c.map_name};
  }
  return {neat::genome_from_json(j), std::nullopt};
}

// ---------------------------------------------------------------------------
// Replay

struct ReplayResult {
  EpisodeResult episode;
  double fitness = 0.0;
};

/// Re-runs one start with tracing on. `expected_map` (from a champion
/// document) must match the track it is replayed on.
inline ReplayResult replay(const neat::Genome& genome, const Track& track, const std::string& start_label,
                           const PhysicsConfig& phys, const SensorConfig& sensors, const FitnessConfig& fit,
                           const std::optional<std::string>& expected_map = std::nullopt) {
  if (expected_map && *expected_map != track.name())
    throw ValidationError("genome was evolved on map '" + *expected_map + "', not '" + track.name() + "'");
  neat::validate_genome(genome);
  const neat::Network net(genome);
  ReplayResult r;
  r.episode = run_episode(net, track, track.start(start_label), phys, sensors, fit, true);
  r.fitness = fitness(r.episode, fit);
  return r;
}

}  // namespace xprace
