#include "povdec/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <unordered_map>

#include "povdec/error.hpp"
#include "povdec/gpi.hpp"

namespace povdec {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

const std::vector<std::string> kAnalysisKeys{
    "poverty_line_daily", "days_per_year", "indicators", "stratify", "study_preset",
    "id_column", "revtot_column", "eqadul_column", "strata_columns", "load_mode",
};

} // namespace

KeyValueDocument KeyValueDocument::parse(std::istream& in) {
  KeyValueDocument doc;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": expected 'key = value'", line_no);
    }
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": empty key", line_no);
    doc.entries_.emplace_back(std::move(key), trim(line.substr(eq + 1)));
  }
  return doc;
}

KeyValueDocument KeyValueDocument::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config '" + path.string() + "'");
  return parse(in);
}

bool KeyValueDocument::contains(const std::string& key) const { return get(key).has_value(); }

std::optional<std::string> KeyValueDocument::get(const std::string& key) const {
  // Last assignment wins.
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->first == key) return it->second;
  }
  return std::nullopt;
}

std::vector<std::string> KeyValueDocument::get_all(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) {
    if (k == key) out.push_back(v);
  }
  return out;
}

double KeyValueDocument::get_double(const std::string& key, double fallback) const {
  const auto v = get(key);
  return v ? parse_double(key, *v) : fallback;
}

long long KeyValueDocument::get_integer(const std::string& key, long long fallback) const {
  const auto v = get(key);
  return v ? parse_integer(key, *v) : fallback;
}

std::vector<std::string> KeyValueDocument::get_list(const std::string& key, std::vector<std::string> fallback) const {
  const auto v = get(key);
  return v ? split_list(*v) : fallback;
}

void KeyValueDocument::reject_unknown_keys(const std::vector<std::string>& known) const {
  for (const auto& [k, v] : entries_) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw Error(ErrorCode::ConfigError, "unknown config key '" + k + "'");
    }
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string::npos ? text.size() : comma;
    std::string item = trim(text.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(value)) {
    throw Error(ErrorCode::ConfigError, "key '" + key + "': '" + text + "' is not a number");
  }
  return value;
}

long long parse_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
    throw Error(ErrorCode::ConfigError, "key '" + key + "': '" + text + "' is not an integer");
  }
  return value;
}

std::vector<std::string> five_study_variables() {
  return {"region", "genre", "ethnie", "etat_matrimonial", "instruction"};
}

AnalysisConfig AnalysisConfig::from_document(const KeyValueDocument& doc) {
  doc.reject_unknown_keys(kAnalysisKeys);
  AnalysisConfig c;
  c.poverty_line_daily = doc.get_double("poverty_line_daily", c.poverty_line_daily);
  c.days_per_year = doc.get_double("days_per_year", c.days_per_year);
  c.indicators = doc.get_list("indicators", c.indicators);
  if (const auto preset = doc.get("study_preset")) {
    if (*preset != "household_head") {
      throw Error(ErrorCode::ConfigError, "unknown study_preset '" + *preset + "'");
    }
    c.stratification_variables = five_study_variables();
  }
  for (auto& v : doc.get_list("stratify")) {
    if (std::find(c.stratification_variables.begin(), c.stratification_variables.end(), v) ==
        c.stratification_variables.end()) {
      c.stratification_variables.push_back(std::move(v));
    }
  }
  c.schema.id_column = doc.get("id_column").value_or(c.schema.id_column);
  c.schema.revtot_column = doc.get("revtot_column").value_or(c.schema.revtot_column);
  c.schema.eqadul_column = doc.get("eqadul_column").value_or(c.schema.eqadul_column);
  c.schema.strata_columns = doc.get_list("strata_columns");
  if (const auto mode = doc.get("load_mode")) {
    if (*mode == "strict") {
      c.load_mode = LoadMode::Strict;
    } else if (*mode == "lenient") {
      c.load_mode = LoadMode::Lenient;
    } else {
      throw Error(ErrorCode::ConfigError, "load_mode must be 'strict' or 'lenient'");
    }
  }
  if (!(c.poverty_line_daily > 0) || !(c.days_per_year > 0)) {
    throw Error(ErrorCode::ConfigError, "poverty_line_daily and days_per_year must be positive");
  }
  if (c.indicators.empty()) throw Error(ErrorCode::ConfigError, "no indicators configured");
  return c;
}

AnalysisConfig AnalysisConfig::load(const std::filesystem::path& path) {
  return from_document(KeyValueDocument::load(path));
}

ValidationReport validate_config(const AnalysisConfig& config, const SurveyData& data) {
  ValidationReport report;
  report.poverty_line = config.poverty_line_annual();
  report.records = data.records.size();
  if (!(report.poverty_line > 0) || !std::isfinite(report.poverty_line)) {
    throw Error(ErrorCode::InvalidParameter, "poverty line must be positive");
  }
  for (const auto& name : config.indicators) parse_indicator<double>(name);

  for (const auto& variable : config.stratification_variables) {
    const auto labels = data.labels(variable);
    VariableSummary summary;
    summary.name = variable;
    std::unordered_map<std::string, std::size_t> slot;
    for (const auto& label : labels) {
      const auto [it, inserted] = slot.emplace(label, summary.categories.size());
      if (inserted) summary.categories.push_back({label, 0});
      ++summary.categories[it->second].count;
    }
    report.variables.push_back(std::move(summary));
  }
  return report;
}

} // namespace povdec
