#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mlrisk {

/// Error categories raised by the library. The CLI maps each one to an exit code.
enum class ErrorCode {
  NonPositiveParameter,
  UnorderedThresholds,
  EmptyRates,
  RateCountMismatch,
  DistributionMismatch,
  UnsupportedDistribution,
  NegativeSurplus,
  NetProfitViolated,
  NonPositiveDiscriminant,
  SingularMatrix,
  NearSingular,
  WrongLayerCount,
  ThresholdPoint,
  InvalidArgument,
  ConfigError,
};

inline constexpr ErrorCode all_error_codes[] = {
    ErrorCode::NonPositiveParameter, ErrorCode::UnorderedThresholds,
    ErrorCode::EmptyRates,           ErrorCode::RateCountMismatch,
    ErrorCode::DistributionMismatch, ErrorCode::UnsupportedDistribution,
    ErrorCode::NegativeSurplus,      ErrorCode::NetProfitViolated,
    ErrorCode::NonPositiveDiscriminant, ErrorCode::SingularMatrix,
    ErrorCode::NearSingular,         ErrorCode::WrongLayerCount,
    ErrorCode::ThresholdPoint,       ErrorCode::InvalidArgument,
    ErrorCode::ConfigError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveParameter: return "NonPositiveParameter";
    case ErrorCode::UnorderedThresholds: return "UnorderedThresholds";
    case ErrorCode::EmptyRates: return "EmptyRates";
    case ErrorCode::RateCountMismatch: return "RateCountMismatch";
    case ErrorCode::DistributionMismatch: return "DistributionMismatch";
    case ErrorCode::UnsupportedDistribution: return "UnsupportedDistribution";
    case ErrorCode::NegativeSurplus: return "NegativeSurplus";
    case ErrorCode::NetProfitViolated: return "NetProfitViolated";
    case ErrorCode::NonPositiveDiscriminant: return "NonPositiveDiscriminant";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::NearSingular: return "NearSingular";
    case ErrorCode::WrongLayerCount: return "WrongLayerCount";
    case ErrorCode::ThresholdPoint: return "ThresholdPoint";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// One violated invariant, as reported by validation.
struct Violation {
  ErrorCode code;
  std::string field;
  std::string message;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  /// Aggregate error; code() is the first violation's code.
  explicit Error(std::vector<Violation> violations)
      : std::runtime_error(join(violations)),
        code_(violations.empty() ? ErrorCode::InvalidArgument
                                 : violations.front().code),
        violations_(std::move(violations)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<Violation>& violations() const noexcept { return violations_; }

  bool has(ErrorCode code) const {
    if (code_ == code) return true;
    for (const auto& v : violations_)
      if (v.code == code) return true;
    return false;
  }

 private:
  static std::string join(const std::vector<Violation>& violations) {
    std::string text;
    for (const auto& v : violations) {
      if (!text.empty()) text += "; ";
      text += std::string(to_string(v.code)) + " (" + v.field + "): " + v.message;
    }
    return text;
  }

  ErrorCode code_;
  std::vector<Violation> violations_;
};

}  // namespace mlrisk
