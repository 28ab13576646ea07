#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace slgf {

enum class ErrorCategory {
  configuration,
  parse,
  validation,
  numerical,
  degenerate_fit,
  insufficient_data,
  approximation_failure,
  non_convergence,
  evaluation,
  contract_violation,
  no_valid_model,
  undefined_bayes_factor,
};

std::string_view to_string(ErrorCategory category);

// Every failure raised by the library carries a category so the CLI can emit
// a machine-readable error object.
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory category, const std::string& message) {
  throw Error(category, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCategory::contract_violation, message);
}

}  // namespace slgf
