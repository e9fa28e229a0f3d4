#include "povdec/report.hpp"

#include <algorithm>
#include <sstream>

#include <fmt/format.h>

namespace povdec {

namespace {

using nlohmann::json;

// Code points, not bytes; labels are UTF-8.
std::size_t display_width(const std::string& s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

std::string pad_right(const std::string& s, std::size_t width) {
  const std::size_t w = display_width(s);
  return w >= width ? s : s + std::string(width - w, ' ');
}

std::string pad_left(const std::string& s, std::size_t width) {
  const std::size_t w = display_width(s);
  return w >= width ? s : std::string(width - w, ' ') + s;
}

/// Left-aligned first column, right-aligned value columns, two-space gutters.
std::string render_grid(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], display_width(row[c]));
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) line += "  ";
      line += c == 0 ? pad_right(row[c], widths[c]) : pad_left(row[c], widths[c]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

std::string csv_number(double v) { return fmt::format("{:.17g}", v); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json optional_json(const std::optional<std::uint64_t>& v) { return v ? json(*v) : json(nullptr); }
json optional_json(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

json metadata_json(const ReportMetadata& m) {
  return json{{"command", m.command},
              {"source", m.source},
              {"poverty_line", m.poverty_line ? json(*m.poverty_line) : json(nullptr)},
              {"seed", optional_json(m.seed)},
              {"timestamp", optional_json(m.timestamp)}};
}

ReportMetadata metadata_from_json(const json& j) {
  ReportMetadata m;
  m.command = j.at("command").get<std::string>();
  m.source = j.at("source").get<std::string>();
  if (!j.at("poverty_line").is_null()) m.poverty_line = j.at("poverty_line").get<double>();
  if (!j.at("seed").is_null()) m.seed = j.at("seed").get<std::uint64_t>();
  if (!j.at("timestamp").is_null()) m.timestamp = j.at("timestamp").get<std::string>();
  return m;
}

json envelope(const char* kind, const ReportMetadata& m) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = kind;
  j["metadata"] = metadata_json(m);
  return j;
}

std::string header_line(const ReportMetadata& m, NumberLocale locale) {
  std::string out = fmt::format("Source: {}\n", m.source);
  if (m.poverty_line) out += fmt::format("Poverty line Z = {}\n", format_fixed4(*m.poverty_line, locale));
  return out;
}

} // namespace

std::string format_fixed4(double value, NumberLocale locale) {
  std::string s = fmt::format("{:.4f}", value);
  if (s == "-0.0000") s = "0.0000";
  if (locale == NumberLocale::French) std::replace(s.begin(), s.end(), '.', ',');
  return s;
}

// ---------------------------------------------------------------------------
// Decomposition report
// ---------------------------------------------------------------------------

std::string render_text(const ReportDocument& doc, NumberLocale locale) {
  std::string out = header_line(doc.metadata, locale);
  for (const auto& table : doc.tables) {
    if (table.columns.empty()) continue;
    const auto& first = table.columns.front();
    std::vector<std::string> labels;
    for (const auto& g : first.groups) labels.push_back(g.label);
    out += fmt::format("\nDecomposition by {} (K={}): {}\n", table.variable, first.groups.size(),
                       fmt::join(labels, ", "));
    out += fmt::format("N = {} households, Q = {} poor\n\n", first.n_total, first.q_poor);

    std::vector<std::vector<std::string>> rows(4);
    rows[0].push_back("Type de mesures");
    rows[1].push_back("Mesure décomposée");
    rows[2].push_back("Mesure globale");
    rows[3].push_back("Défaut de décomposabilité");
    for (const auto& col : table.columns) {
      rows[0].push_back(col.indicator);
      rows[1].push_back(format_fixed4(col.recomposed_value, locale));
      rows[2].push_back(format_fixed4(col.global_value, locale));
      rows[3].push_back(format_fixed4(col.gap, locale));
    }
    out += render_grid(rows);

    std::vector<std::string> relative;
    for (const auto& col : table.columns) {
      relative.push_back(fmt::format("{} {}", col.indicator, format_fixed4(col.relative_gap(), locale)));
    }
    out += fmt::format("Relative gap |D|/P: {}\n", fmt::join(relative, "  "));
    if (first.has_empty_groups()) out += "Warning: some requested strata have no households\n";
  }
  return out;
}

std::string render_csv(const ReportDocument& doc) {
  std::string out = "variable,indicator,group,size,poor,weight,value\n";
  for (const auto& table : doc.tables) {
    for (const auto& col : table.columns) {
      const auto var = csv_field(table.variable);
      const auto ind = csv_field(col.indicator);
      for (const auto& g : col.groups) {
        out += fmt::format("{},{},{},{},{},{},{}\n", var, ind, csv_field(g.label), g.size, g.poor,
                           csv_number(g.weight), csv_number(g.value));
      }
      out += fmt::format("{},{},(global),{},{},1,{}\n", var, ind, col.n_total, col.q_poor, csv_number(col.global_value));
      out += fmt::format("{},{},(recomposed),{},{},1,{}\n", var, ind, col.n_total, col.q_poor,
                         csv_number(col.recomposed_value));
      out += fmt::format("{},{},(gap),{},{},,{}\n", var, ind, col.n_total, col.q_poor, csv_number(col.gap));
    }
  }
  return out;
}

json to_json(const ReportDocument& doc) {
  json j = envelope("decomposition", doc.metadata);
  j["tables"] = json::array();
  for (const auto& table : doc.tables) {
    json t;
    t["variable"] = table.variable;
    t["indicators"] = json::array();
    for (const auto& col : table.columns) {
      json c{{"indicator", col.indicator},
             {"n_total", col.n_total},
             {"q_poor", col.q_poor},
             {"global_value", col.global_value},
             {"recomposed_value", col.recomposed_value},
             {"gap", col.gap},
             {"abs_gap", col.abs_gap()},
             {"relative_gap", col.relative_gap()}};
      c["groups"] = json::array();
      for (const auto& g : col.groups) {
        c["groups"].push_back(json{{"label", g.label},
                                   {"size", g.size},
                                   {"poor", g.poor},
                                   {"weight", g.weight},
                                   {"value", g.value},
                                   {"empty", g.empty}});
      }
      t["indicators"].push_back(std::move(c));
    }
    j["tables"].push_back(std::move(t));
  }
  return j;
}

ReportDocument report_from_json(const json& j) {
  if (j.at("kind").get<std::string>() != "decomposition") {
    throw Error(ErrorCode::ParseError, "not a decomposition report");
  }
  ReportDocument doc;
  doc.metadata = metadata_from_json(j.at("metadata"));
  for (const auto& t : j.at("tables")) {
    DecompositionTable table;
    table.variable = t.at("variable").get<std::string>();
    for (const auto& c : t.at("indicators")) {
      GapReport<double> col;
      col.indicator = c.at("indicator").get<std::string>();
      col.poverty_line = doc.metadata.poverty_line.value_or(0.0);
      col.n_total = c.at("n_total").get<Index>();
      col.q_poor = c.at("q_poor").get<Index>();
      col.global_value = c.at("global_value").get<double>();
      col.recomposed_value = c.at("recomposed_value").get<double>();
      col.gap = c.at("gap").get<double>();
      for (const auto& g : c.at("groups")) {
        col.groups.push_back({g.at("label").get<std::string>(), g.at("size").get<Index>(), g.at("poor").get<Index>(),
                              g.at("weight").get<double>(), g.at("value").get<double>(), g.at("empty").get<bool>()});
      }
      table.columns.push_back(std::move(col));
    }
    doc.tables.push_back(std::move(table));
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Indicator values
// ---------------------------------------------------------------------------

std::string render_text(const ComputeDocument& doc, NumberLocale locale) {
  std::string out = header_line(doc.metadata, locale);
  out += fmt::format("N = {} households, Q = {} poor\n\n", doc.n_total, doc.q_poor);
  std::vector<std::vector<std::string>> rows{{"Indicator", "Value"}};
  for (const auto& v : doc.values) rows.push_back({v.indicator, format_fixed4(v.value, locale)});
  return out + render_grid(rows);
}

std::string render_csv(const ComputeDocument& doc) {
  std::string out = "indicator,value,n_total,q_poor\n";
  for (const auto& v : doc.values) {
    out += fmt::format("{},{},{},{}\n", csv_field(v.indicator), csv_number(v.value), doc.n_total, doc.q_poor);
  }
  return out;
}

json to_json(const ComputeDocument& doc) {
  json j = envelope("indicators", doc.metadata);
  j["n_total"] = doc.n_total;
  j["q_poor"] = doc.q_poor;
  j["values"] = json::array();
  for (const auto& v : doc.values) j["values"].push_back(json{{"indicator", v.indicator}, {"value", v.value}});
  return j;
}

// ---------------------------------------------------------------------------
// Bootstrap
// ---------------------------------------------------------------------------

std::string render_text(const BootstrapDocument& doc, NumberLocale locale) {
  std::string out = header_line(doc.metadata, locale);
  const auto& first = doc.intervals.front().interval;
  out += fmt::format("Bootstrap of the decomposability gap by {} (K={}), B={}, level {}\n\n", doc.variable,
                     doc.groups, first.replicates, format_fixed4(first.level, locale));
  std::vector<std::vector<std::string>> rows{{"Indicator", "Estimate", "Lower", "Upper"}};
  for (const auto& [name, ci] : doc.intervals) {
    rows.push_back({name, format_fixed4(ci.estimate, locale), format_fixed4(ci.lower, locale),
                    format_fixed4(ci.upper, locale)});
  }
  return out + render_grid(rows);
}

std::string render_csv(const BootstrapDocument& doc) {
  std::string out = "variable,indicator,estimate,lower,upper,level,replicates\n";
  for (const auto& [name, ci] : doc.intervals) {
    out += fmt::format("{},{},{},{},{},{},{}\n", csv_field(doc.variable), csv_field(name), csv_number(ci.estimate),
                       csv_number(ci.lower), csv_number(ci.upper), csv_number(ci.level), ci.replicates);
  }
  return out;
}

json to_json(const BootstrapDocument& doc) {
  json j = envelope("bootstrap", doc.metadata);
  j["variable"] = doc.variable;
  j["groups"] = doc.groups;
  j["intervals"] = json::array();
  for (const auto& [name, ci] : doc.intervals) {
    j["intervals"].push_back(json{{"indicator", name},
                                  {"estimate", ci.estimate},
                                  {"lower", ci.lower},
                                  {"upper", ci.upper},
                                  {"level", ci.level},
                                  {"replicates", ci.replicates},
                                  {"seed", ci.seed}});
  }
  return j;
}

// ---------------------------------------------------------------------------
// Convergence study
// ---------------------------------------------------------------------------

std::string render_text(const ConvergenceStudy& study, NumberLocale locale) {
  std::string out = fmt::format("Convergence study: {} strata, R = {}, seed = {}, poverty line {}\n\n",
                                study.spec.strata.size(), study.replications, study.seed, study.line.describe());
  std::vector<std::vector<std::string>> rows{{"n", "Indicator", "mean dd_n", "median |dd_n|", "q90 |dd_n|"}};
  for (const auto& s : study.summaries) {
    rows.push_back({std::to_string(s.n), s.indicator, fmt::format("{:.6f}", s.mean),
                    fmt::format("{:.6f}", s.median_abs), fmt::format("{:.6f}", s.q90_abs)});
    if (locale == NumberLocale::French) {
      for (std::size_t c = 2; c < rows.back().size(); ++c) std::replace(rows.back()[c].begin(), rows.back()[c].end(), '.', ',');
    }
  }
  return out + render_grid(rows);
}

std::string render_csv(const ConvergenceStudy& study) {
  std::string out = "n,replication,indicator,dd_n\n";
  for (const auto& c : study.cells) {
    out += fmt::format("{},{},{},{}\n", c.n, c.replication, csv_field(study.indicators[c.indicator]),
                       csv_number(c.gap));
  }
  return out;
}

json to_json(const ConvergenceStudy& study, const ReportMetadata& metadata) {
  json j = envelope("convergence_study", metadata);
  j["grid"] = study.grid;
  j["replications"] = study.replications;
  j["seed"] = study.seed;
  j["poverty_line_rule"] = study.line.describe();
  j["indicators"] = study.indicators;
  j["strata"] = json::array();
  for (const auto& s : study.spec.strata) {
    j["strata"].push_back(json{{"label", s.label}, {"m", s.log_location}, {"sigma", s.log_scale}, {"size", s.size}});
  }
  if (study.spec.transform) {
    j["income_transform"] = json{{"scale", study.spec.transform->scale}, {"shift", study.spec.transform->shift}};
  } else {
    j["income_transform"] = nullptr;
  }

  // cells[n][indicator] = [dd_n over replications]
  j["cells"] = json::array();
  for (Index n : study.grid) {
    json per_n{{"n", n}, {"dd_n", json::object()}, {"poverty_line", json::array()}};
    for (const auto& name : study.indicators) per_n["dd_n"][name] = study.gaps(n, name);
    for (const auto& c : study.cells) {
      if (c.n == n && c.indicator == 0) per_n["poverty_line"].push_back(c.poverty_line);
    }
    j["cells"].push_back(std::move(per_n));
  }
  j["summaries"] = json::array();
  for (const auto& s : study.summaries) {
    j["summaries"].push_back(json{{"n", s.n},
                                  {"indicator", s.indicator},
                                  {"mean", s.mean},
                                  {"std_error", s.std_error},
                                  {"mean_abs", s.mean_abs},
                                  {"median_abs", s.median_abs},
                                  {"q10_abs", s.q10_abs},
                                  {"q90_abs", s.q90_abs},
                                  {"max_abs", s.max_abs}});
  }
  return j;
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

} // namespace povdec
