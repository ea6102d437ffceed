#pragma once

#include <stdexcept>
#include <string>

namespace fpp {

/// Failure categories. Each maps onto one CLI exit code.
enum class ErrorKind {
  invalid_input,    // exit 2
  size_cap,         // exit 3
  verification,     // exit 4
  claim_violation,  // exit 5: a proved bound failed empirically
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;
int exit_code(ErrorKind kind) noexcept;

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace fpp
