#pragma once

#include <stdexcept>
#include <string>

namespace xprace {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed map text. `line()` is 1-based, 0 when not tied to a line.
class MapParseError : public Error {
 public:
  MapParseError(int line, const std::string& detail, const std::string& source = {})
      : Error((source.empty() ? "" : source + ": ") + (line > 0 ? "line " + std::to_string(line) + ": " : "") + detail),
        line_(line),
        detail_(detail) {}
  int line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  int line_;
  std::string detail_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class PhysicsError : public Error {
 public:
  using Error::Error;
};

class GenomeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  CheckpointError(long generation, const std::string& what)
      : Error(generation >= 0 ? "checkpoint (generation " + std::to_string(generation) + "): " + what
                              : "checkpoint: " + what),
        generation_(generation) {}
  long generation() const noexcept { return generation_; }

 private:
  long generation_;
};

}  // namespace xprace
