#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace drld {

// Base for every error raised by the library. The CLI maps subclasses onto
// process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. `row` is the 1-based line number in the file.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}

  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class ChecksumError : public Error {
 public:
  using Error::Error;
};

// Raised when label-free search code tries to read a reward.
class LabelAccessError : public Error {
 public:
  using Error::Error;
};

}  // namespace drld
