#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "xprace/xprace.hpp"

namespace fixtures {

inline std::filesystem::path source_dir() { return XPRACE_SOURCE_DIR; }
inline std::filesystem::path map_path(const std::string& name) { return source_dir() / "maps" / (name + ".map"); }
inline xprace::Track bundled(const std::string& name) { return xprace::load_track_file(map_path(name).string()); }

/// 100x100 room with a square waypoint loop (counterclockwise) and one
/// start on the first waypoint segment, facing east.
inline std::string square_room_text(bool drop_last_wall = false) {
  std::string s =
      "xprace-map 1\n"
      "name room\n"
      "walls:\n"
      "0 0 0 100 0\n"
      "1 100 0 100 100\n"
      "2 100 100 0 100\n";
  if (!drop_last_wall) s += "3 0 100 0 0\n";
  s +=
      "waypoints:\n"
      "25 25\n75 25\n75 75\n25 75\n"
      "starts:\n"
      "A 25 25 0\n";
  return s;
}

inline xprace::Track square_room() { return xprace::load_track(square_room_text()); }

/// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::path(XPRACE_BINARY_DIR) / "scratch" / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

/// Uniform point strictly inside the track, at least `clearance` from walls.
inline xprace::Vec2 random_interior(const xprace::Track& t, std::mt19937_64& rng, double clearance = 1e-3) {
  const auto& b = t.bounds();
  std::uniform_real_distribution<double> ux(b.min.x, b.max.x), uy(b.min.y, b.max.y);
  while (true) {
    xprace::Vec2 p{ux(rng), uy(rng)};
    if (!t.encloses(p)) continue;
    if (xprace::RayCaster(t, p).nearest().first < clearance) continue;
    return p;
  }
}

}  // namespace fixtures
