#include "povdec/survey_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <unordered_map>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "povdec/error.hpp"

namespace povdec {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) return std::nullopt;
  double value = 0;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string quote_if_needed(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

} // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        current += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (c != '\r') {
      current += c;
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

VectorD SurveyData::incomes() const {
  VectorD y(static_cast<Index>(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i) y[static_cast<Index>(i)] = records[i].derived_income();
  return y;
}

std::vector<std::string> SurveyData::labels(const std::string& variable) const {
  if (std::find(strata_variables.begin(), strata_variables.end(), variable) == strata_variables.end()) {
    throw Error(ErrorCode::UnknownVariable, "stratification variable '" + variable + "' is not in the dataset");
  }
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.strata.at(variable));
  return out;
}

SurveyData read_survey(std::istream& in, const SurveySchema& schema, LoadMode mode) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::MissingColumn, "file has no header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);
  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) column.emplace(header[i], i);

  auto require = [&](const std::string& name) {
    const auto it = column.find(name);
    if (it == column.end()) throw Error(ErrorCode::MissingColumn, "column '" + name + "' not found in header");
    return it->second;
  };
  const std::size_t id_col = require(schema.id_column);
  const std::size_t revtot_col = require(schema.revtot_column);
  const std::size_t eqadul_col = require(schema.eqadul_column);

  SurveyData data;
  if (schema.strata_columns.empty()) {
    for (const auto& h : header) {
      if (h != schema.id_column && h != schema.revtot_column && h != schema.eqadul_column) {
        data.strata_variables.push_back(h);
      }
    }
  } else {
    for (const auto& name : schema.strata_columns) require(name);
    data.strata_variables = schema.strata_columns;
  }
  std::vector<std::size_t> strata_cols;
  for (const auto& name : data.strata_variables) strata_cols.push_back(column.at(name));

  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_csv_line(line);

    auto reject = [&](ErrorCode code, const std::string& column_name, const std::string& what) {
      if (mode == LoadMode::Strict) {
        throw Error(code, fmt::format("row {}, column '{}': {}", row, column_name, what), row);
      }
      data.skipped.push_back({row, fmt::format("{}: {} ({})", to_string(code), what, column_name)});
    };

    if (fields.size() != header.size()) {
      reject(ErrorCode::ParseError, "*", fmt::format("expected {} fields, found {}", header.size(), fields.size()));
      continue;
    }
    const auto revtot = parse_number(fields[revtot_col]);
    if (!revtot) {
      reject(ErrorCode::ParseError, schema.revtot_column, "missing or non-numeric value");
      continue;
    }
    if (*revtot < 0) {
      reject(ErrorCode::InvalidIncome, schema.revtot_column, "negative income");
      continue;
    }
    const auto eqadul = parse_number(fields[eqadul_col]);
    if (!eqadul) {
      reject(ErrorCode::ParseError, schema.eqadul_column, "missing or non-numeric value");
      continue;
    }
    if (*eqadul <= 0) {
      reject(ErrorCode::NonPositiveEqadul, schema.eqadul_column, "adult-equivalent scale must be positive");
      continue;
    }

    HouseholdRecord record;
    record.household_id = trim(fields[id_col]);
    record.revtot = *revtot;
    record.eqadul = *eqadul;
    for (std::size_t k = 0; k < strata_cols.size(); ++k) {
      std::string label = trim(fields[strata_cols[k]]);
      record.strata.emplace(data.strata_variables[k], label.empty() ? kUndeclaredLabel : std::move(label));
    }
    data.records.push_back(std::move(record));
  }
  data.rows_read = row;
  return data;
}

SurveyData load_survey(const std::filesystem::path& path, const SurveySchema& schema, LoadMode mode) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path.string() + "'");
  return read_survey(in, schema, mode);
}

void write_survey(std::ostream& out, const SurveyData& data, const SurveySchema& schema) {
  std::vector<std::string> header{schema.id_column, schema.revtot_column, schema.eqadul_column};
  header.insert(header.end(), data.strata_variables.begin(), data.strata_variables.end());
  std::vector<std::string> quoted;
  for (const auto& h : header) quoted.push_back(quote_if_needed(h));
  out << fmt::format("{}\n", fmt::join(quoted, ","));
  for (const auto& r : data.records) {
    std::vector<std::string> fields{quote_if_needed(r.household_id), fmt::format("{:.17g}", r.revtot),
                                    fmt::format("{:.17g}", r.eqadul)};
    for (const auto& v : data.strata_variables) fields.push_back(quote_if_needed(r.strata.at(v)));
    out << fmt::format("{}\n", fmt::join(fields, ","));
  }
}

} // namespace povdec
