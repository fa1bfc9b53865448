#include "mdest/error.hpp"

namespace mdest {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::empty_group: return "empty-group";
    case ErrorKind::invalid_auxiliary: return "invalid-auxiliary";
    case ErrorKind::invalid_probability: return "invalid-probability";
    case ErrorKind::invalid_design: return "invalid-design";
    case ErrorKind::design_deficient: return "design-deficient";
    case ErrorKind::no_data: return "no-data";
    case ErrorKind::degenerate_scenario: return "degenerate-scenario";
    case ErrorKind::unsupported_scenario: return "unsupported-scenario";
    case ErrorKind::config: return "config";
    case ErrorKind::parse: return "parse";
    case ErrorKind::internal: return "internal";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::design_deficient:
    case ErrorKind::no_data:
    case ErrorKind::degenerate_scenario:
    case ErrorKind::invalid_design:
      return 2;
    case ErrorKind::internal:
      return 3;
    default:
      return 1;
  }
}

}  // namespace mdest
