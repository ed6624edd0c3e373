#include "spw/error.hpp"

namespace spw {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::UnknownTreatmentLabel: return "UnknownTreatmentLabel";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::StratumTooSmall: return "StratumTooSmall";
    case ErrorCode::WrongDatasetMode: return "WrongDatasetMode";
    case ErrorCode::NuisanceOutOfRange: return "NuisanceOutOfRange";
    case ErrorCode::MissingNuisance: return "MissingNuisance";
    case ErrorCode::PerturbationLeavesDomain: return "PerturbationLeavesDomain";
    case ErrorCode::StabilizerBoundViolated: return "StabilizerBoundViolated";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::PropensityOnBoundary: return "PropensityOnBoundary";
    case ErrorCode::NonPsdCovariance: return "NonPsdCovariance";
    case ErrorCode::DenominatorZero: return "DenominatorZero";
    case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::ModelClassTooLarge: return "ModelClassTooLarge";
    case ErrorCode::StatisticNotLinear: return "StatisticNotLinear";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::DegenerateSamples: return "DegenerateSamples";
  }
  return "Unknown";
}

ErrorCategory error_category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Io:
    case ErrorCode::WrongDatasetMode:
    case ErrorCode::MissingNuisance:
    case ErrorCode::PerturbationLeavesDomain:
    case ErrorCode::EnumerationTooLarge:
    case ErrorCode::ModelClassTooLarge:
    case ErrorCode::StatisticNotLinear:
      return ErrorCategory::Config;
    case ErrorCode::ParseError:
    case ErrorCode::MissingColumn:
    case ErrorCode::NonFiniteValue:
    case ErrorCode::UnknownTreatmentLabel:
    case ErrorCode::EmptyDataset:
    case ErrorCode::StratumTooSmall:
    case ErrorCode::NuisanceOutOfRange:
    case ErrorCode::StabilizerBoundViolated:
    case ErrorCode::PropensityOnBoundary:
    case ErrorCode::TooFewSamples:
      return ErrorCategory::Data;
    case ErrorCode::SingularDesign:
    case ErrorCode::NonPsdCovariance:
    case ErrorCode::DenominatorZero:
    case ErrorCode::DegenerateSamples:
      return ErrorCategory::Numeric;
  }
  return ErrorCategory::Config;
}

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::int64_t> index)
    : std::runtime_error(message), code_(code), index_(index) {}

void fail(ErrorCode code, const std::string& message,
          std::optional<std::int64_t> index) {
  throw Error(code, message, index);
}

}  // namespace spw
