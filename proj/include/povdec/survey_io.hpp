#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "povdec/types.hpp"

namespace povdec {

/// Label given to a household whose category is blank.
inline constexpr const char* kUndeclaredLabel = "NON DECLARE";

struct HouseholdRecord {
  std::string household_id;
  double revtot = 0;  // total household income per year
  double eqadul = 1;  // adult-equivalent scale
  std::map<std::string, std::string> strata;

  double derived_income() const { return revtot / eqadul; }
};

struct SurveySchema {
  std::string id_column = "household_id";
  std::string revtot_column = "REVTOT";
  std::string eqadul_column = "EQADUL";
  /// Categorical columns to keep. Empty means every column not named above.
  std::vector<std::string> strata_columns;
};

enum class LoadMode { Strict, Lenient };

struct SkippedRow {
  std::size_t row = 0;  // 1-based data row (header excluded)
  std::string reason;
};

struct SurveyData {
  std::vector<HouseholdRecord> records;
  std::vector<std::string> strata_variables;
  std::size_t rows_read = 0;
  std::vector<SkippedRow> skipped;

  VectorD incomes() const;
  /// Category of every record for `variable`; throws UnknownVariable.
  std::vector<std::string> labels(const std::string& variable) const;
};

/// Splits one CSV line (RFC 4180 quoting, comma separator).
std::vector<std::string> split_csv_line(const std::string& line);

SurveyData read_survey(std::istream& in, const SurveySchema& schema, LoadMode mode = LoadMode::Strict);
SurveyData load_survey(const std::filesystem::path& path, const SurveySchema& schema,
                       LoadMode mode = LoadMode::Strict);

/// Writes records with 17 significant digits so that reloading is exact.
void write_survey(std::ostream& out, const SurveyData& data, const SurveySchema& schema);

} // namespace povdec
