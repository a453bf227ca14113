#pragma once

// Circuit geometry: walls, the waypoint loop, labelled start points, the
// plain-text map format, ray queries and the arc-length completion field.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "xprace/errors.hpp"
#include "xprace/geometry.hpp"

namespace xprace {

struct Wall {
  int id = 0;
  Segment seg;
};

struct StartPoint {
  std::string label;
  Vec2 position;
  double heading = 0.0;  // degrees, [0, 360)
};

struct Bounds {
  Vec2 min;
  Vec2 max;
};

/// Immutable after construction. Construction validates every map invariant
/// and throws ValidationError naming the first one that fails.
class Track {
 public:
  Track(std::string name, std::vector<Wall> walls, std::vector<Vec2> waypoints,
        std::vector<StartPoint> starts, std::optional<double> baseline_time = std::nullopt)
      : name_(std::move(name)),
        walls_(std::move(walls)),
        waypoints_(std::move(waypoints)),
        starts_(std::move(starts)),
        baseline_time_(baseline_time) {
    for (auto& s : starts_) s.heading = normalize_degrees(s.heading);
    validate_();
    compute_derived_();
  }

  const std::string& name() const noexcept { return name_; }
  const std::vector<Wall>& walls() const noexcept { return walls_; }
  const std::vector<Vec2>& waypoints() const noexcept { return waypoints_; }
  const std::vector<StartPoint>& starts() const noexcept { return starts_; }
  const Bounds& bounds() const noexcept { return bounds_; }
  std::optional<double> baseline_time() const noexcept { return baseline_time_; }
  void set_baseline_time(double seconds) { baseline_time_ = seconds; }

  int waypoint_count() const noexcept { return static_cast<int>(waypoints_.size()); }
  double loop_length() const noexcept { return loop_length_; }
  /// Arc length from waypoint 0 to the start of segment i (i in [0, n]).
  double arc_at(int i) const { return cumulative_[static_cast<std::size_t>(i)]; }
  double segment_length(int i) const { return cumulative_[i + 1] - cumulative_[i]; }

  Segment waypoint_segment(int i) const {
    const int n = waypoint_count();
    i = ((i % n) + n) % n;
    return {waypoints_[i], waypoints_[(i + 1) % n]};
  }

  const StartPoint* find_start(std::string_view label) const {
    for (const auto& s : starts_)
      if (s.label == label) return &s;
    return nullptr;
  }

  const StartPoint& start(std::string_view label) const {
    if (const auto* s = find_start(label)) return *s;
    throw ValidationError("map '" + name_ + "' has no start labelled '" + std::string(label) + "'");
  }

  /// True when every ray from `p` (unbounded range) meets a wall.
  bool encloses(Vec2 p, int rays = 64) const {
    for (int k = 0; k < rays; ++k) {
      const Vec2 dir = unit_from_heading(360.0 * (k + 0.5) / rays);
      bool hit = false;
      for (const auto& w : walls_) {
        if (ray_segment(p, dir, w.seg)) {
          hit = true;
          break;
        }
      }
      if (!hit) return false;
    }
    return true;
  }

  bool segment_clear(Vec2 p0, Vec2 p1) const {
    for (const auto& w : walls_)
      if (sweep_segment(p0, p1, w.seg)) return false;
    return true;
  }

  friend bool operator==(const Track& a, const Track& b) {
    auto wall_eq = [](const Wall& x, const Wall& y) {
      return x.id == y.id && x.seg.a == y.seg.a && x.seg.b == y.seg.b;
    };
    auto start_eq = [](const StartPoint& x, const StartPoint& y) {
      return x.label == y.label && x.position == y.position && x.heading == y.heading;
    };
    return a.name_ == b.name_ && a.baseline_time_ == b.baseline_time_ &&
           a.waypoints_ == b.waypoints_ &&
           std::equal(a.walls_.begin(), a.walls_.end(), b.walls_.begin(), b.walls_.end(), wall_eq) &&
           std::equal(a.starts_.begin(), a.starts_.end(), b.starts_.begin(), b.starts_.end(), start_eq);
  }

 private:
  void validate_() const {
    if (walls_.size() < 3) throw ValidationError("map needs at least 3 walls");
    if (waypoints_.size() < 3) throw ValidationError("waypoint loop needs at least 3 waypoints");
    if (starts_.empty()) throw ValidationError("map needs at least one start point");

    for (std::size_t i = 0; i < walls_.size(); ++i) {
      const auto& w = walls_[i];
      if (!is_finite(w.seg.a) || !is_finite(w.seg.b))
        throw ValidationError("wall " + std::to_string(w.id) + " has non-finite coordinates");
      if (w.seg.a == w.seg.b) throw ValidationError("wall " + std::to_string(w.id) + " is degenerate (zero length)");
      for (std::size_t j = 0; j < i; ++j)
        if (walls_[j].id == w.id) throw ValidationError("duplicate wall id " + std::to_string(w.id));
    }
    for (std::size_t i = 0; i < starts_.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (starts_[i].label == starts_[j].label)
          throw ValidationError("duplicate start label '" + starts_[i].label + "'");

    const int n = static_cast<int>(waypoints_.size());
    for (int i = 0; i < n; ++i) {
      const Vec2 a = waypoints_[i];
      if (!is_finite(a)) throw ValidationError("waypoint " + std::to_string(i) + " is not finite");
      if (!encloses(a)) throw ValidationError("waypoint " + std::to_string(i) + " is not enclosed by walls");
    }
    for (int i = 0; i < n; ++i) {
      const Vec2 a = waypoints_[i], b = waypoints_[(i + 1) % n];
      if (a == b) throw ValidationError("waypoints " + std::to_string(i) + " and " + std::to_string((i + 1) % n) + " coincide");
      if (!segment_clear(a, b)) {
        throw ValidationError("waypoint loop does not close inside the walls: segment " + std::to_string(i) + "->" +
                              std::to_string((i + 1) % n) + " crosses a wall");
      }
    }
    for (const auto& s : starts_) {
      if (!is_finite(s.position)) throw ValidationError("start '" + s.label + "' is not finite");
      if (!encloses(s.position)) throw ValidationError("start '" + s.label + "' is not enclosed by walls");
      for (const auto& w : walls_)
        if (point_segment_distance(s.position, w.seg) == 0.0)
          throw ValidationError("start '" + s.label + "' lies on wall " + std::to_string(w.id));
      // Must share the waypoints' region: some polyline point is in line of sight.
      bool reachable = false;
      for (int i = 0; i < n && !reachable; ++i) {
        const Vec2 q = closest_point({waypoints_[i], waypoints_[(i + 1) % n]}, s.position).point;
        reachable = segment_clear(s.position, q);
      }
      if (!reachable) throw ValidationError("start '" + s.label + "' is not inside the waypoint corridor");
    }
  }

  void compute_derived_() {
    const int n = waypoint_count();
    cumulative_.assign(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = 0; i < n; ++i) cumulative_[i + 1] = cumulative_[i] + distance(waypoints_[i], waypoints_[(i + 1) % n]);
    loop_length_ = cumulative_[n];

    bounds_.min = walls_.front().seg.a;
    bounds_.max = walls_.front().seg.a;
    for (const auto& w : walls_) {
      for (Vec2 p : {w.seg.a, w.seg.b}) {
        bounds_.min.x = std::min(bounds_.min.x, p.x);
        bounds_.min.y = std::min(bounds_.min.y, p.y);
        bounds_.max.x = std::max(bounds_.max.x, p.x);
        bounds_.max.y = std::max(bounds_.max.y, p.y);
      }
    }
  }

  std::string name_;
  std::vector<Wall> walls_;
  std::vector<Vec2> waypoints_;
  std::vector<StartPoint> starts_;
  std::optional<double> baseline_time_;
  Bounds bounds_;
  std::vector<double> cumulative_;
  double loop_length_ = 0.0;
};

// ---------------------------------------------------------------------------
// Map text format
//
//   xprace-map 1
//   name <word>
//   baseline_time <seconds>        (optional)
//   walls:
//   <id> <x0> <y0> <x1> <y1>
//   waypoints:
//   <x> <y>
//   starts:
//   <label> <x> <y> <heading-degrees>
//
// '#' starts a comment. Blank lines are ignored. Entries belong to the most
// recent section header.

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline double parse_number(std::string_view tok, int line, const char* field) {
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw MapParseError(line, std::string("invalid ") + field + " '" + std::string(tok) + "'");
  return v;
}

inline int parse_int(std::string_view tok, int line, const char* field) {
  int v = 0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw MapParseError(line, std::string("invalid ") + field + " '" + std::string(tok) + "'");
  return v;
}

inline std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

inline Track load_track(std::string_view text) {
  enum class Section { none, walls, waypoints, starts };
  Section section = Section::none;
  bool header_seen = false;
  std::string name = "unnamed";
  std::optional<double> baseline;
  std::vector<Wall> walls;
  std::vector<Vec2> waypoints;
  std::vector<StartPoint> starts;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = detail::split_ws(line);
    if (tok.empty()) {
      if (nl == text.size()) break;
      continue;
    }

    if (!header_seen) {
      if (tok.size() != 2 || tok[0] != "xprace-map") throw MapParseError(line_no, "expected header 'xprace-map 1'");
      if (detail::parse_int(tok[1], line_no, "format version") != 1)
        throw MapParseError(line_no, "unsupported map format version '" + std::string(tok[1]) + "'");
      header_seen = true;
      continue;
    }

    if (tok.size() == 1 && tok[0].back() == ':') {
      const auto key = tok[0].substr(0, tok[0].size() - 1);
      if (key == "walls") section = Section::walls;
      else if (key == "waypoints") section = Section::waypoints;
      else if (key == "starts") section = Section::starts;
      else throw MapParseError(line_no, "unknown section '" + std::string(key) + "'");
      continue;
    }

    if (tok[0] == "name") {
      if (tok.size() != 2) throw MapParseError(line_no, "name takes exactly one word");
      name = std::string(tok[1]);
      continue;
    }
    if (tok[0] == "baseline_time") {
      if (tok.size() != 2) throw MapParseError(line_no, "baseline_time takes one number");
      baseline = detail::parse_number(tok[1], line_no, "baseline_time");
      if (*baseline <= 0.0) throw MapParseError(line_no, "baseline_time must be positive");
      continue;
    }

    switch (section) {
      case Section::none:
        throw MapParseError(line_no, "entry outside of any section: '" + std::string(tok[0]) + "'");
      case Section::walls:
        if (tok.size() != 5) throw MapParseError(line_no, "wall entry needs: id x0 y0 x1 y1");
        walls.push_back({detail::parse_int(tok[0], line_no, "wall id"),
                         {{detail::parse_number(tok[1], line_no, "wall x0"), detail::parse_number(tok[2], line_no, "wall y0")},
                          {detail::parse_number(tok[3], line_no, "wall x1"), detail::parse_number(tok[4], line_no, "wall y1")}}});
        break;
      case Section::waypoints:
        if (tok.size() != 2) throw MapParseError(line_no, "waypoint entry needs: x y");
        waypoints.push_back({detail::parse_number(tok[0], line_no, "waypoint x"),
                             detail::parse_number(tok[1], line_no, "waypoint y")});
        break;
      case Section::starts:
        if (tok.size() != 4) throw MapParseError(line_no, "start entry needs: label x y heading");
        starts.push_back({std::string(tok[0]),
                          {detail::parse_number(tok[1], line_no, "start x"), detail::parse_number(tok[2], line_no, "start y")},
                          detail::parse_number(tok[3], line_no, "start heading")});
        break;
    }
    if (nl == text.size()) break;
  }
  if (!header_seen) throw MapParseError(0, "empty map file");
  return Track(std::move(name), std::move(walls), std::move(waypoints), std::move(starts), baseline);
}

inline std::string to_text(const Track& track) {
  using detail::format_number;
  std::ostringstream out;
  out << "xprace-map 1\n";
  out << "name " << track.name() << "\n";
  if (track.baseline_time()) out << "baseline_time " << format_number(*track.baseline_time()) << "\n";
  out << "walls:\n";
  for (const auto& w : track.walls()) {
    out << w.id << ' ' << format_number(w.seg.a.x) << ' ' << format_number(w.seg.a.y) << ' '
        << format_number(w.seg.b.x) << ' ' << format_number(w.seg.b.y) << "\n";
  }
  out << "waypoints:\n";
  for (const auto& p : track.waypoints()) out << format_number(p.x) << ' ' << format_number(p.y) << "\n";
  out << "starts:\n";
  for (const auto& s : track.starts()) {
    out << s.label << ' ' << format_number(s.position.x) << ' ' << format_number(s.position.y) << ' '
        << format_number(s.heading) << "\n";
  }
  return out.str();
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Track load_track_file(const std::string& path) {
  try {
    return load_track(read_text_file(path));
  } catch (const MapParseError& e) {
    throw MapParseError(e.line(), e.detail(), path);
  }
}

// ---------------------------------------------------------------------------
// Ray queries

/// Distance to the nearest wall along the ray, capped at `max_range`.
inline double raycast(const Track& track, Vec2 origin, double angle_deg, double max_range) {
  const Vec2 dir = unit_from_heading(angle_deg);
  double best = max_range;
  for (const auto& w : track.walls())
    if (auto t = ray_segment(origin, dir, w.seg); t && *t < best) best = *t;
  return best;
}

/// Answers many rays from one origin. Walls are visited nearest-first and a
/// ray stops as soon as the next wall is farther than its current hit, so
/// results equal `raycast` exactly.
class RayCaster {
 public:
  RayCaster(const Track& track, Vec2 origin) : track_(&track), origin_(origin) {
    const auto& walls = track.walls();
    order_.reserve(walls.size());
    for (std::size_t i = 0; i < walls.size(); ++i)
      order_.push_back({point_segment_distance(origin, walls[i].seg), static_cast<int>(i)});
    std::sort(order_.begin(), order_.end());
  }

  Vec2 origin() const noexcept { return origin_; }

  double cast(double angle_deg, double max_range) const { return cast_dir(unit_from_heading(angle_deg), max_range); }

  double cast_dir(Vec2 unit_dir, double max_range) const {
    double best = max_range;
    const auto& walls = track_->walls();
    for (const auto& [d, idx] : order_) {
      if (d > best) break;
      if (auto t = ray_segment(origin_, unit_dir, walls[static_cast<std::size_t>(idx)].seg); t && *t < best) best = *t;
    }
    return best;
  }

  /// Exact distance to the nearest wall and the index of that wall.
  std::pair<double, int> nearest() const { return order_.front(); }

 private:
  const Track* track_;
  Vec2 origin_;
  std::vector<std::pair<double, int>> order_;
};

// ---------------------------------------------------------------------------
// Completion field

struct ProgressState {
  int last_waypoint_index = 0;
  double best_completion = 0.0;  // percent
  int frames_since_progress = 0;

  int start_segment = 0;       // segment holding the start's projection
  double start_param = 0.0;    // its parameter along that segment
  int segments_passed = 0;     // waypoints passed since the start
  Vec2 projection;             // current projection onto the window
  double projection_param = 0.0;

  bool finished() const noexcept { return best_completion >= 100.0; }
};

inline ProgressState initial_progress(const Track& track, Vec2 start_position) {
  const int n = track.waypoint_count();
  int best_seg = -1;
  double best_d = std::numeric_limits<double>::infinity();
  ClosestPoint best_cp;
  for (int i = 0; i < n; ++i) {
    const auto cp = closest_point(track.waypoint_segment(i), start_position);
    const double d = distance(cp.point, start_position);
    if (d < best_d && track.segment_clear(start_position, cp.point)) {
      best_d = d;
      best_seg = i;
      best_cp = cp;
    }
  }
  if (best_seg < 0) throw ValidationError("start position cannot see the waypoint loop");
  // A start exactly on a waypoint belongs to the segment leaving it.
  if (best_cp.t == 1.0) {
    best_seg = (best_seg + 1) % n;
    best_cp.t = 0.0;
  }
  ProgressState p;
  p.last_waypoint_index = best_seg;
  p.start_segment = best_seg;
  p.start_param = best_cp.t;
  p.projection = best_cp.point;
  p.projection_param = best_cp.t;
  return p;
}

inline ProgressState initial_progress(const Track& track, const StartPoint& start) {
  return initial_progress(track, start.position);
}

/// Best-so-far arc-length completion. The projection is restricted to the
/// segment leaving the last passed waypoint and the one after it; moving
/// onto the second advances the index.
inline std::pair<double, ProgressState> completion(const Track& track, Vec2 position, const ProgressState& progress) {
  const int n = track.waypoint_count();
  ProgressState p = progress;
  // At most one advance per call, so a jump across the track cannot walk
  // the window around the loop.
  const int s0 = p.last_waypoint_index;
  const int s1 = (s0 + 1) % n;
  ClosestPoint cur = closest_point(track.waypoint_segment(s0), position);
  const auto c1 = closest_point(track.waypoint_segment(s1), position);
  if (length_sq(c1.point - position) < length_sq(cur.point - position) && p.segments_passed < n) {
    p.last_waypoint_index = s1;
    ++p.segments_passed;
    cur = c1;
  }
  p.projection = cur.point;
  p.projection_param = cur.t;

  const int abs_seg = p.start_segment + p.segments_passed;
  const double unwrapped = static_cast<double>(abs_seg / n) * track.loop_length() + track.arc_at(abs_seg % n) +
                           cur.t * track.segment_length(abs_seg % n);
  const double origin = track.arc_at(p.start_segment) + p.start_param * track.segment_length(p.start_segment);
  const double covered = unwrapped - origin;

  double candidate = 0.0;
  if (covered >= track.loop_length()) candidate = 100.0;
  else if (covered > 0.0) candidate = std::min(100.0, covered / track.loop_length() * 100.0);

  if (candidate > p.best_completion) {
    p.best_completion = candidate;
    p.frames_since_progress = 0;
  } else {
    ++p.frames_since_progress;
  }
  return {p.best_completion, p};
}

/// Heading from the current projection toward the next waypoint.
inline double track_direction(const Track& track, const ProgressState& progress) {
  const int n = track.waypoint_count();
  const Vec2 next = track.waypoints()[(progress.last_waypoint_index + 1) % n];
  const Vec2 v = next - progress.projection;
  if (length_sq(v) > 0.0) return heading_of(v);
  const Segment following = track.waypoint_segment(progress.last_waypoint_index + 1);
  return heading_of(following.b - following.a);
}

inline std::vector<Vec2> next_waypoints(const Track& track, const ProgressState& progress, int k) {
  if (k < 1) throw Error("next_waypoints needs k >= 1");
  const int n = track.waypoint_count();
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 1; i <= k; ++i) out.push_back(track.waypoints()[(progress.last_waypoint_index + i) % n]);
  return out;
}

}  // namespace xprace
