#pragma once

#include <stdexcept>
#include <string>

namespace bundlesim {

enum class ErrorCode {
  invalid_argument = 1,
  numerical_failure = 2,
  undefined_correlation = 3,
  incomplete_record = 4,
  io = 5,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above; the C
// layer maps them onto bsim_status_t values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string detail = {})
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }

  // Multi-line diagnostic (convergence tables, solver info); may be empty.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace bundlesim
