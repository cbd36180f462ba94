#pragma once

#include <stdexcept>
#include <string>

namespace semlearn {

enum class ErrorCode {
  invalid_vertex,
  cycle_detected,
  invalid_params,
  degenerate_range,
  singular_system,
  not_terminal,
  not_terminal_estimate,
  too_large,
  empty_active_set,
  non_positive_diagonal,
  not_symmetric,
  not_positive_definite,
  infeasible,
  iteration_limit,
  unbounded,
  bound_diverges,
  invalid_inputs,
  io_error,
  parse_error,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_vertex: return "invalid_vertex";
    case ErrorCode::cycle_detected: return "cycle_detected";
    case ErrorCode::invalid_params: return "invalid_params";
    case ErrorCode::degenerate_range: return "degenerate_range";
    case ErrorCode::singular_system: return "singular_system";
    case ErrorCode::not_terminal: return "not_terminal";
    case ErrorCode::not_terminal_estimate: return "not_terminal_estimate";
    case ErrorCode::too_large: return "too_large";
    case ErrorCode::empty_active_set: return "empty_active_set";
    case ErrorCode::non_positive_diagonal: return "non_positive_diagonal";
    case ErrorCode::not_symmetric: return "not_symmetric";
    case ErrorCode::not_positive_definite: return "not_positive_definite";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::iteration_limit: return "iteration_limit";
    case ErrorCode::unbounded: return "unbounded";
    case ErrorCode::bound_diverges: return "bound_diverges";
    case ErrorCode::invalid_inputs: return "invalid_inputs";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::parse_error: return "parse_error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace semlearn
