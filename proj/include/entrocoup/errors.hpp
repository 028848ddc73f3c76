#pragma once

#include <stdexcept>
#include <string>

namespace entrocoup {

// Observed data is inconsistent with the model (zero-probability symbol,
// impossible trajectory, ...). Distinct from programming errors so callers
// can report a diagnostic and keep going.
class DecodeError : public std::runtime_error {
 public:
  explicit DecodeError(const std::string& what) : std::runtime_error(what) {}
};

// Encoder state became inconsistent with the value being encoded.
class CorruptionError : public std::runtime_error {
 public:
  explicit CorruptionError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace entrocoup
