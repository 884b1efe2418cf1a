#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace orbitmeasure {

enum class ErrorCode {
  ambient_mismatch,
  not_in_span,
  dimension_mismatch,
  rank_deficient,
  field_mismatch,
  non_finite,
  size_mismatch,
  unsupported_mode,
  chart_domain,
  step_underflow,
  not_in_group,
  non_invariant_weight,
  unknown_key,
  bad_params,
  quadrature_domain,
  no_oracle,
  internal_error,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ambient_mismatch: return "AmbientMismatch";
    case ErrorCode::not_in_span: return "NotInSpan";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::rank_deficient: return "RankDeficient";
    case ErrorCode::field_mismatch: return "FieldMismatch";
    case ErrorCode::non_finite: return "NonFinite";
    case ErrorCode::size_mismatch: return "SizeMismatch";
    case ErrorCode::unsupported_mode: return "UnsupportedMode";
    case ErrorCode::chart_domain: return "ChartDomain";
    case ErrorCode::step_underflow: return "StepUnderflow";
    case ErrorCode::not_in_group: return "NotInGroup";
    case ErrorCode::non_invariant_weight: return "NonInvariantWeight";
    case ErrorCode::unknown_key: return "UnknownKey";
    case ErrorCode::bad_params: return "BadParams";
    case ErrorCode::quadrature_domain: return "QuadratureDomain";
    case ErrorCode::no_oracle: return "NoOracle";
    case ErrorCode::internal_error: return "InternalError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace orbitmeasure
