#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "povdec/config.hpp"
#include "povdec/decomposition.hpp"
#include "povdec/simulation.hpp"

namespace povdec {

/// Version of the JSON documents described in docs/report.schema.json.
inline constexpr const char* kReportSchemaVersion = "1.0";

enum class NumberLocale { C, French };

struct ReportMetadata {
  std::string command;
  std::string source;  // dataset file name or simulation spec file name
  std::optional<double> poverty_line;  // unset when Z varies per replication
  std::optional<std::uint64_t> seed;
  std::optional<std::string> timestamp;
};

/// One stratification variable; one column per indicator.
struct DecompositionTable {
  std::string variable;
  std::vector<GapReport<double>> columns;
};

struct ReportDocument {
  ReportMetadata metadata;
  std::vector<DecompositionTable> tables;
};

struct IndicatorValue {
  std::string indicator;
  double value = 0;
};

struct ComputeDocument {
  ReportMetadata metadata;
  Index n_total = 0;
  Index q_poor = 0;
  std::vector<IndicatorValue> values;
};

struct NamedInterval {
  std::string indicator;
  BootstrapInterval interval;
};

struct BootstrapDocument {
  ReportMetadata metadata;
  std::string variable;
  Index groups = 0;
  std::vector<NamedInterval> intervals;
};

/// Four decimals, '.' or ',' as decimal separator.
std::string format_fixed4(double value, NumberLocale locale);

std::string render_text(const ReportDocument& doc, NumberLocale locale = NumberLocale::C);
std::string render_text(const ComputeDocument& doc, NumberLocale locale = NumberLocale::C);
std::string render_text(const BootstrapDocument& doc, NumberLocale locale = NumberLocale::C);
std::string render_text(const ConvergenceStudy& study, NumberLocale locale = NumberLocale::C);

std::string render_csv(const ReportDocument& doc);
std::string render_csv(const ComputeDocument& doc);
std::string render_csv(const BootstrapDocument& doc);
/// Long format: n, replication, indicator, dd_n.
std::string render_csv(const ConvergenceStudy& study);

nlohmann::json to_json(const ReportDocument& doc);
nlohmann::json to_json(const ComputeDocument& doc);
nlohmann::json to_json(const BootstrapDocument& doc);
nlohmann::json to_json(const ConvergenceStudy& study, const ReportMetadata& metadata);

ReportDocument report_from_json(const nlohmann::json& j);

/// Serialized JSON text as written by the CLI (two-space indent, trailing newline).
std::string dump_json(const nlohmann::json& j);

} // namespace povdec
