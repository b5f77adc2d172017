#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vihsd {

enum class ErrorKind {
  Dimension,     // shapes do not agree
  Contract,      // API precondition violated by the caller
  Data,          // bad input data (ids, labels, rows)
  Config,        // invalid configuration or incompatible artifacts
  Format,        // malformed file contents
  Io,            // file cannot be opened/read/written
  Corruption,    // checkpoint inconsistent with its manifest
  Numeric,       // NaN/Inf encountered
  OracleMisuse,  // gradient oracle called on a non-deterministic function
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace vihsd
