#include "bundlesim/error.hpp"

namespace bundlesim {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
      return "invalid_argument";
    case ErrorCode::numerical_failure:
      return "numerical_failure";
    case ErrorCode::undefined_correlation:
      return "undefined_correlation";
    case ErrorCode::incomplete_record:
      return "incomplete_record";
    case ErrorCode::io:
      return "io";
  }
  return "unknown";
}

}  // namespace bundlesim
