#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace povdec {

enum class ErrorCode {
  EmptyPopulation,
  InvalidIncome,
  InvalidParameter,
  DegenerateNormalizer,
  NoPoorHouseholds,
  UnknownStratum,
  IncompatibleReports,
  MissingColumn,
  ParseError,
  NonPositiveEqadul,
  UnknownVariable,
  OversizedSubsample,
  ConfigError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyPopulation: return "EmptyPopulation";
    case ErrorCode::InvalidIncome: return "InvalidIncome";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::DegenerateNormalizer: return "DegenerateNormalizer";
    case ErrorCode::NoPoorHouseholds: return "NoPoorHouseholds";
    case ErrorCode::UnknownStratum: return "UnknownStratum";
    case ErrorCode::IncompatibleReports: return "IncompatibleReports";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonPositiveEqadul: return "NonPositiveEqadul";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::OversizedSubsample: return "OversizedSubsample";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Configuration and usage problems, as opposed to problems with the data itself.
constexpr bool is_configuration_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParameter:
    case ErrorCode::UnknownStratum:
    case ErrorCode::UnknownVariable:
    case ErrorCode::ConfigError:
    case ErrorCode::OversizedSubsample:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::optional<std::size_t> position = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), position_(position) {}

  ErrorCode code() const noexcept { return code_; }

  /// Offending element index or 1-based data row, when the error has one.
  std::optional<std::size_t> position() const noexcept { return position_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> position_;
};

} // namespace povdec
