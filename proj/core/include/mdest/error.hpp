#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mdest {

enum class ErrorKind {
  invalid_input,
  empty_group,
  invalid_auxiliary,
  invalid_probability,
  invalid_design,
  design_deficient,
  no_data,
  degenerate_scenario,
  unsupported_scenario,
  config,
  parse,
  internal,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Process exit status associated with an error category:
/// 1 for bad input or configuration, 2 for a degenerate design, 3 otherwise.
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace mdest
