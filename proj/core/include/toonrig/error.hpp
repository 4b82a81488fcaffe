#pragma once

#include <stdexcept>
#include <string>

namespace toonrig {

enum class ErrorKind {
  validation,  // bad inputs, schema violations, invariant failures
  runtime,     // IO failures, hash mismatches, solver aborts
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_validation(const std::string& msg) {
  throw Error(ErrorKind::validation, msg);
}
[[noreturn]] inline void fail_runtime(const std::string& msg) {
  throw Error(ErrorKind::runtime, msg);
}

}  // namespace toonrig
