#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace volcast {

/// Bad or inconsistent input data. Maps to CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed row in an input file.
class ParseError : public DataError {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : DataError(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Invalid configuration. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace volcast
