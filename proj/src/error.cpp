#include "slgf/error.hpp"

namespace slgf {

std::string_view to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::configuration: return "configuration";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::validation: return "validation";
    case ErrorCategory::numerical: return "numerical";
    case ErrorCategory::degenerate_fit: return "degenerate_fit";
    case ErrorCategory::insufficient_data: return "insufficient_data";
    case ErrorCategory::approximation_failure: return "approximation_failure";
    case ErrorCategory::non_convergence: return "non_convergence";
    case ErrorCategory::evaluation: return "evaluation";
    case ErrorCategory::contract_violation: return "contract_violation";
    case ErrorCategory::no_valid_model: return "no_valid_model";
    case ErrorCategory::undefined_bayes_factor: return "undefined_bayes_factor";
  }
  return "unknown";
}

}  // namespace slgf
