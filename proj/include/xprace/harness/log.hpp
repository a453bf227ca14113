#pragma once

// Per-generation CSV log. The first line names the schema version; the
// second is the column header. Reals are written in shortest round-trip
// form so a parsed record equals the one written.

#include <charconv>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "xprace/errors.hpp"

namespace xprace {

inline constexpr int kLogSchemaVersion = 1;
inline constexpr std::string_view kLogMagic = "# xprace.generations";

struct StartStats {
  std::optional<double> best_lap;      // fastest lap from this start in the population
  bool first_completion = false;       // first generation any genome finished from here
  std::optional<double> champion_lap;  // lap of the generation's best genome
  friend bool operator==(const StartStats&, const StartStats&) = default;
};

struct GenerationRecord {
  std::int64_t generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  int species_count = 0;
  std::vector<StartStats> starts;  // in configured start order
  bool champion_finished_all = false;
  friend bool operator==(const GenerationRecord&, const GenerationRecord&) = default;
};

namespace detail {

inline std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

template <class T>
T parse_field(std::string_view s, std::size_t row, const char* what) {
  T v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error("generation log row " + std::to_string(row) + ": bad " + what + " '" + std::string(s) + "'");
  return v;
}

inline bool parse_flag(std::string_view s, std::size_t row, const char* what) {
  if (s == "0") return false;
  if (s == "1") return true;
  throw Error("generation log row " + std::to_string(row) + ": bad " + what + " '" + std::string(s) + "'");
}

}  // namespace detail

inline std::string log_header(const std::vector<std::string>& starts) {
  std::string h = std::string(kLogMagic) + " v" + std::to_string(kLogSchemaVersion) + "\n";
  h += "generation,best_fitness,mean_fitness,species_count";
  for (const auto& s : starts) h += ",best_lap_" + s + ",first_completion_" + s + ",champion_lap_" + s;
  h += ",champion_finished_all\n";
  return h;
}

inline std::string log_row(const GenerationRecord& r) {
  using detail::format_real;
  std::string row = std::to_string(r.generation) + "," + format_real(r.best_fitness) + "," +
                    format_real(r.mean_fitness) + "," + std::to_string(r.species_count);
  for (const auto& s : r.starts) {
    row += "," + (s.best_lap ? format_real(*s.best_lap) : std::string());
    row += s.first_completion ? ",1" : ",0";
    row += "," + (s.champion_lap ? format_real(*s.champion_lap) : std::string());
  }
  row += r.champion_finished_all ? ",1\n" : ",0\n";
  return row;
}

inline std::string format_log(const std::vector<std::string>& starts, const std::vector<GenerationRecord>& records) {
  std::string out = log_header(starts);
  for (const auto& r : records) out += log_row(r);
  return out;
}

struct GenerationLog {
  std::vector<std::string> starts;
  std::vector<GenerationRecord> records;
};

inline GenerationLog parse_log(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != std::string(kLogMagic) + " v" + std::to_string(kLogSchemaVersion))
    throw Error("generation log: missing or unsupported version line");
  if (!std::getline(in, line)) throw Error("generation log: missing header");
  const auto cols = detail::split_csv(line);
  if (cols.size() < 5 || (cols.size() - 5) % 3 != 0 || cols[0] != "generation")
    throw Error("generation log: malformed header");
  GenerationLog log;
  for (std::size_t i = 4; i + 1 < cols.size(); i += 3) {
    const std::string_view c = cols[i];
    if (c.rfind("best_lap_", 0) != 0) throw Error("generation log: malformed header");
    log.starts.emplace_back(c.substr(9));
  }
  if (cols.back() != "champion_finished_all") throw Error("generation log: malformed header");
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != cols.size()) throw Error("generation log row " + std::to_string(row) + ": wrong field count");
    GenerationRecord r;
    r.generation = detail::parse_field<std::int64_t>(f[0], row, "generation");
    r.best_fitness = detail::parse_field<double>(f[1], row, "best_fitness");
    r.mean_fitness = detail::parse_field<double>(f[2], row, "mean_fitness");
    r.species_count = detail::parse_field<int>(f[3], row, "species_count");
    for (std::size_t s = 0; s < log.starts.size(); ++s) {
      StartStats st;
      const std::size_t base = 4 + 3 * s;
      if (!f[base].empty()) st.best_lap = detail::parse_field<double>(f[base], row, "best_lap");
      st.first_completion = detail::parse_flag(f[base + 1], row, "first_completion");
      if (!f[base + 2].empty()) st.champion_lap = detail::parse_field<double>(f[base + 2], row, "champion_lap");
      r.starts.push_back(st);
    }
    r.champion_finished_all = detail::parse_flag(f.back(), row, "champion_finished_all");
    log.records.push_back(std::move(r));
  }
  return log;
}

}  // namespace xprace
