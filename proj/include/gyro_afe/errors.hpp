#pragma once

#include <stdexcept>
#include <string>

namespace gyro_afe {

struct SamplingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DurationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SegmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IndexError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Topologies handed to the comparison do not share one output gain.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed config text. `field` is the dotted path (section.key) or empty.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string field, int line, const std::string& what)
      : std::runtime_error(format(field, line, what)), field_(std::move(field)), line_(line) {}

  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& field, int line, const std::string& what) {
    std::string msg;
    if (line > 0) msg += "line " + std::to_string(line) + ": ";
    if (!field.empty()) msg += field + ": ";
    return msg + what;
  }

  std::string field_;
  int line_;
};

// Well-formed config whose values break an invariant (C0 <= 0, unresolved label, ...).
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace gyro_afe

namespace gyro_afe {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gyro_afe
