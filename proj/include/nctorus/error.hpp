#pragma once

#include <stdexcept>
#include <string>

namespace nctorus {

// Every failure raised by the library derives from this, so callers can
// tell library errors from std ones.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NonDecomposable : public Error {
 public:
  using Error::Error;
};

class Unsupported : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

class IntegerOrderError : public Error {
 public:
  using Error::Error;
};

class InvalidBump : public Error {
 public:
  using Error::Error;
};

class InvalidPivot : public Error {
 public:
  using Error::Error;
};

class UnsupportedDecomposition : public Error {
 public:
  using Error::Error;
};

// Parse failures carry a 1-based line number (0 when unknown).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Config failures name the offending field as section.key when known.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0, std::string field = {})
      : Error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
              (field.empty() ? std::string() : field + ": ") + what),
        line_(line),
        field_(std::move(field)) {}
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

}  // namespace nctorus
