#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "povdec/survey_io.hpp"

namespace povdec {

/**
 * Flat `key = value` document. `#` starts a comment, blank lines are ignored,
 * keys may repeat (e.g. one `stratum` line per stratum).
 */
class KeyValueDocument {
 public:
  static KeyValueDocument parse(std::istream& in);
  static KeyValueDocument load(const std::filesystem::path& path);

  bool contains(const std::string& key) const;
  std::optional<std::string> get(const std::string& key) const;
  std::vector<std::string> get_all(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  double get_double(const std::string& key, double fallback) const;
  long long get_integer(const std::string& key, long long fallback) const;
  /// Comma-separated list with surrounding blanks trimmed.
  std::vector<std::string> get_list(const std::string& key, std::vector<std::string> fallback = {}) const;

  /// Throws ConfigError naming the first key not in `known`.
  void reject_unknown_keys(const std::vector<std::string>& known) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::vector<std::string> split_list(const std::string& text);
double parse_double(const std::string& key, const std::string& text);
long long parse_integer(const std::string& key, const std::string& text);

/// Stratification variables of the five household-head studies (region,
/// gender, ethnicity, marital status, education).
std::vector<std::string> five_study_variables();

struct AnalysisConfig {
  double poverty_line_daily = 392;
  double days_per_year = 365;
  std::vector<std::string> indicators{"sen", "shorrocks"};
  std::vector<std::string> stratification_variables;
  SurveySchema schema;
  LoadMode load_mode = LoadMode::Strict;

  double poverty_line_annual() const { return poverty_line_daily * days_per_year; }

  static AnalysisConfig from_document(const KeyValueDocument& doc);
  static AnalysisConfig load(const std::filesystem::path& path);
};

struct CategoryCount {
  std::string label;
  std::size_t count = 0;
};

struct VariableSummary {
  std::string name;
  std::vector<CategoryCount> categories;  // first-appearance order

  std::size_t group_count() const { return categories.size(); }
};

struct ValidationReport {
  double poverty_line = 0;
  std::size_t records = 0;
  std::vector<VariableSummary> variables;
};

/// Checks Z > 0, the indicator names, and that every configured variable exists.
ValidationReport validate_config(const AnalysisConfig& config, const SurveyData& data);

} // namespace povdec
