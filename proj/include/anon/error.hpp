#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace anon {

// Error taxonomy mirrors the CLI exit codes: config errors exit 2,
// data errors exit 3, runtime errors exit 4.
enum class ErrorKind { Config, Data, Runtime };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& detail)
      : std::runtime_error(code + ": " + detail), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const { return kind_; }

  // Stable machine-readable name, e.g. "MissingColumn" or "GridTooLarge".
  const std::string& code() const { return code_; }

  int exit_code() const {
    switch (kind_) {
      case ErrorKind::Config: return 2;
      case ErrorKind::Data: return 3;
      case ErrorKind::Runtime: return 4;
    }
    return 4;
  }

 private:
  ErrorKind kind_;
  std::string code_;
};

[[noreturn]] inline void throw_config(std::string code, const std::string& detail) {
  throw Error(ErrorKind::Config, std::move(code), detail);
}

[[noreturn]] inline void throw_data(std::string code, const std::string& detail) {
  throw Error(ErrorKind::Data, std::move(code), detail);
}

[[noreturn]] inline void throw_runtime(std::string code, const std::string& detail) {
  throw Error(ErrorKind::Runtime, std::move(code), detail);
}

}  // namespace anon
