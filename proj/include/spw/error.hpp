#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace spw {

/// Every failure the library reports. The category (see error_category)
/// decides how a front end should surface it.
enum class ErrorCode {
  InvalidArgument,
  Io,
  ParseError,
  MissingColumn,
  NonFiniteValue,
  UnknownTreatmentLabel,
  EmptyDataset,
  StratumTooSmall,
  WrongDatasetMode,
  NuisanceOutOfRange,
  MissingNuisance,
  PerturbationLeavesDomain,
  StabilizerBoundViolated,
  SingularDesign,
  PropensityOnBoundary,
  NonPsdCovariance,
  DenominatorZero,
  EnumerationTooLarge,
  ModelClassTooLarge,
  StatisticNotLinear,
  TooFewSamples,
  DegenerateSamples,
};

enum class ErrorCategory { Config, Data, Numeric };

std::string_view error_code_name(ErrorCode code) noexcept;
ErrorCategory error_category(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::int64_t> index = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  /// Row, observation or stratum the error refers to, when there is one.
  std::optional<std::int64_t> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::int64_t> index_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message,
                       std::optional<std::int64_t> index = std::nullopt);

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::InvalidArgument, message);
}

}  // namespace spw
