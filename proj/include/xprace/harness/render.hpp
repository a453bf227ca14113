#pragma once

// SVG output: racing lines over a map, and best-fitness curves.
//
// Map renders use one uniform scale with y flipped. The root element
// carries the transform as data attributes so coordinates can be mapped
// back: world_x = data-min-x + (svg_x - data-margin) / data-scale,
// world_y = data-max-y - (svg_y - data-margin) / data-scale.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "xprace/errors.hpp"
#include "xprace/harness/log.hpp"
#include "xprace/harness/replay.hpp"
#include "xprace/track.hpp"

namespace xprace {

struct SvgTransform {
  double min_x = 0.0, max_y = 0.0, scale = 1.0, margin = 20.0;

  Vec2 to_svg(Vec2 w) const { return {margin + (w.x - min_x) * scale, margin + (max_y - w.y) * scale}; }
  Vec2 to_world(Vec2 s) const { return {min_x + (s.x - margin) / scale, max_y - (s.y - margin) / scale}; }
};

struct RenderOptions {
  double width = 1000.0;  // pixels, including margins
  double margin = 20.0;
  bool draw_waypoints = true;
};

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline const char* terminal_class(const Trace& t) {
  if (!t.termination) return "stop";
  switch (*t.termination) {
    case Termination::finished: return "finish";
    case Termination::collision: return "crash";
    default: return "stop";
  }
}

}  // namespace detail

inline std::string render_svg(const std::vector<Trace>& traces, const Track& track, const RenderOptions& opt = {}) {
  using detail::svg_num;
  if (traces.empty()) throw Error("render needs at least one trace");
  for (const auto& t : traces) {
    if (!t.map_name.empty() && t.map_name != track.name())
      throw ValidationError("trace for map '" + t.map_name + "' cannot be drawn on '" + track.name() + "'");
    if (t.rows.empty()) throw Error("trace from start '" + t.start_label + "' has no rows");
  }

  const Bounds b = track.bounds();
  double min_x = b.min.x, max_x = b.max.x, min_y = b.min.y, max_y = b.max.y;
  for (const auto& t : traces)
    for (const auto& r : t.rows) {
      min_x = std::min(min_x, r.position.x), max_x = std::max(max_x, r.position.x);
      min_y = std::min(min_y, r.position.y), max_y = std::max(max_y, r.position.y);
    }
  const double span_x = std::max(max_x - min_x, 1e-9), span_y = std::max(max_y - min_y, 1e-9);
  SvgTransform tf{min_x, max_y, (opt.width - 2 * opt.margin) / span_x, opt.margin};
  const double height = span_y * tf.scale + 2 * opt.margin;

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(opt.width) + "\" height=\"" + svg_num(height) +
       "\" viewBox=\"0 0 " + svg_num(opt.width) + " " + svg_num(height) + "\" data-min-x=\"" +
       detail::format_real(tf.min_x) + "\" data-max-y=\"" + detail::format_real(tf.max_y) + "\" data-scale=\"" +
       detail::format_real(tf.scale) + "\" data-margin=\"" + detail::format_real(tf.margin) + "\">\n";
  s += "<title>" + detail::svg_escape(track.name()) + "</title>\n";
  s += "<style>.wall{stroke:#222;stroke-width:2}.waypoints{fill:none;stroke:#aaa;stroke-dasharray:4 4}"
       ".trace{fill:none;stroke:#1f77b4;stroke-width:1.5;stroke-opacity:0.8}.start{fill:#2ca02c}"
       ".terminal{stroke:none}.crash{fill:#d62728}.finish{fill:#ff7f0e}.stop{fill:#7f7f7f}</style>\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  s += "<g id=\"walls\">\n";
  for (const auto& w : track.walls()) {
    const Vec2 a = tf.to_svg(w.seg.a), c = tf.to_svg(w.seg.b);
    s += "<line class=\"wall\" x1=\"" + svg_num(a.x) + "\" y1=\"" + svg_num(a.y) + "\" x2=\"" + svg_num(c.x) +
         "\" y2=\"" + svg_num(c.y) + "\"/>\n";
  }
  s += "</g>\n";

  if (opt.draw_waypoints) {
    s += "<polygon class=\"waypoints\" points=\"";
    for (const auto& p : track.waypoints()) {
      const Vec2 q = tf.to_svg(p);
      s += svg_num(q.x) + "," + svg_num(q.y) + " ";
    }
    s += "\"/>\n";
  }
  for (const auto& st : track.starts()) {
    const Vec2 q = tf.to_svg(st.position);
    s += "<circle class=\"start\" cx=\"" + svg_num(q.x) + "\" cy=\"" + svg_num(q.y) + "\" r=\"4\" data-label=\"" +
         detail::svg_escape(st.label) + "\"/>\n";
  }

  s += "<g id=\"traces\">\n";
  for (const auto& t : traces) {
    s += "<polyline class=\"trace\" data-start=\"" + detail::svg_escape(t.start_label) + "\" points=\"";
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const Vec2 q = tf.to_svg(t.rows[i].position);
      if (i) s += ' ';
      s += svg_num(q.x) + "," + svg_num(q.y);
    }
    s += "\"/>\n";
  }
  s += "</g>\n<g id=\"terminals\">\n";
  for (const auto& t : traces) {
    const Vec2 q = tf.to_svg(t.rows.back().position);
    s += std::string("<circle class=\"terminal ") + detail::terminal_class(t) + "\" cx=\"" + svg_num(q.x) +
         "\" cy=\"" + svg_num(q.y) + "\" r=\"3\"/>\n";
  }
  s += "</g>\n</svg>\n";
  return s;
}

struct FitnessSeries {
  std::string name;
  std::vector<GenerationRecord> records;
};

/// Best fitness per generation, one polyline per run.
inline std::string render_fitness_svg(const std::vector<FitnessSeries>& runs, double width = 900.0,
                                      double height = 500.0) {
  using detail::svg_num;
  if (runs.empty()) throw Error("fitness plot needs at least one run");
  double max_gen = 1.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& r : runs)
    for (const auto& rec : r.records) {
      max_gen = std::max(max_gen, static_cast<double>(rec.generation));
      lo = std::min(lo, rec.best_fitness);
      hi = std::max(hi, rec.best_fitness);
    }
  if (!(lo <= hi)) throw Error("fitness plot: runs hold no records");
  lo = std::min(lo, 0.0);
  if (hi - lo < 1e-9) hi = lo + 1.0;
  const double left = 60, right = 20, top = 20, bottom = 40;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double g) { return left + g / max_gen * pw; };
  auto py = [&](double f) { return top + (hi - f) / (hi - lo) * ph; };

  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(width) + "\" height=\"" + svg_num(height) +
       "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<g stroke=\"#222\"><line x1=\"" + svg_num(left) + "\" y1=\"" + svg_num(top + ph) + "\" x2=\"" +
       svg_num(left + pw) + "\" y2=\"" + svg_num(top + ph) + "\"/><line x1=\"" + svg_num(left) + "\" y1=\"" +
       svg_num(top) + "\" x2=\"" + svg_num(left) + "\" y2=\"" + svg_num(top + ph) + "\"/></g>\n";
  s += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double f = lo + (hi - lo) * k / 4.0, g = max_gen * k / 4.0;
    s += "<text x=\"" + svg_num(left - 6) + "\" y=\"" + svg_num(py(f) + 4) + "\" text-anchor=\"end\">" +
         std::to_string(static_cast<long long>(std::llround(f))) + "</text>\n";
    s += "<text x=\"" + svg_num(px(g)) + "\" y=\"" + svg_num(top + ph + 16) + "\" text-anchor=\"middle\">" +
         std::to_string(static_cast<long>(g)) + "</text>\n";
  }
  s += "<text x=\"" + svg_num(left + pw / 2) + "\" y=\"" + svg_num(height - 6) +
       "\" text-anchor=\"middle\">generation</text>\n</g>\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    s += std::string("<polyline class=\"fitness\" fill=\"none\" stroke=\"") + kColors[i % 10] + "\" data-run=\"" +
         detail::svg_escape(runs[i].name) + "\" points=\"";
    for (std::size_t k = 0; k < runs[i].records.size(); ++k) {
      const auto& rec = runs[i].records[k];
      if (k) s += ' ';
      s += svg_num(px(static_cast<double>(rec.generation))) + "," + svg_num(py(rec.best_fitness));
    }
    s += "\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace xprace
