#include "povdec/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>

#include "povdec/config.hpp"
#include "povdec/report.hpp"
#include "povdec/simulation.hpp"
#include "povdec/survey_io.hpp"

namespace povdec {

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string format = "text";
  std::string out_path;
  std::string locale = "c";
  bool timestamp = false;
  unsigned threads = 0;
};

struct DataOptions {
  std::string data_path;
  std::optional<double> poverty_line;
  std::vector<std::string> indicators;
  std::vector<std::string> variables;
  bool all_variables = false;
  std::size_t replicates = 1000;
  double level = 0.95;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "Key-value configuration file");
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "json", "csv"}));
  cmd->add_option("--out", o.out_path, "Write the report to this file instead of stdout");
  cmd->add_option("--locale", o.locale, "Decimal separator for text output")->check(CLI::IsMember({"c", "fr"}));
  cmd->add_flag("--timestamp", o.timestamp, "Record the current UTC time in the report metadata");
}

void add_data(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("--data", d.data_path, "Household survey CSV")->required();
  cmd->add_option("--poverty-line", d.poverty_line, "Annual poverty line Z, overriding the config");
  cmd->add_option("--indicator", d.indicators, "Indicator (sen, shorrocks, fgt:<a>, ray:<a>); repeatable");
}

NumberLocale locale_of(const CommonOptions& o) { return o.locale == "fr" ? NumberLocale::French : NumberLocale::C; }

ReportMetadata metadata_for(const std::string& command, const std::string& source, std::optional<double> z,
                            const CommonOptions& o) {
  ReportMetadata m;
  m.command = command;
  m.source = source.empty() ? std::string() : std::filesystem::path(source).filename().string();
  m.poverty_line = z;
  m.seed = o.seed;
  if (o.timestamp) {
    m.timestamp = fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(
                                                             std::chrono::system_clock::now())));
  }
  return m;
}

struct LoadedAnalysis {
  AnalysisConfig config;
  SurveyData data;
  double poverty_line = 0;
  std::vector<GpiSpec<double>> indicators;
};

LoadedAnalysis load_analysis(const CommonOptions& o, const DataOptions& d) {
  LoadedAnalysis a;
  if (!o.config_path.empty()) a.config = AnalysisConfig::load(o.config_path);
  if (!d.indicators.empty()) a.config.indicators = d.indicators;
  a.poverty_line = d.poverty_line.value_or(a.config.poverty_line_annual());
  if (!(a.poverty_line > 0)) throw Error(ErrorCode::InvalidParameter, "poverty line must be positive");
  for (const auto& name : a.config.indicators) a.indicators.push_back(parse_indicator<double>(name));
  a.data = load_survey(d.data_path, a.config.schema, a.config.load_mode);
  return a;
}

void emit(const std::string& payload, const CommonOptions& o, std::ostream& out) {
  if (o.out_path.empty()) {
    out << payload;
    return;
  }
  std::ofstream file(o.out_path, std::ios::binary);
  if (!file) throw Error(ErrorCode::ConfigError, "cannot write '" + o.out_path + "'");
  file << payload;
}

template <typename Document>
std::string render(const Document& doc, const CommonOptions& o) {
  if (o.format == "json") return dump_json(to_json(doc));
  if (o.format == "csv") return render_csv(doc);
  return render_text(doc, locale_of(o));
}

void run_compute(const CommonOptions& o, const DataOptions& d, std::ostream& out, std::ostream& err) {
  const auto a = load_analysis(o, d);
  for (const auto& s : a.data.skipped) err << fmt::format("skipped row {}: {}\n", s.row, s.reason);
  const auto sample = order_and_count(a.data.incomes(), a.poverty_line);

  ComputeDocument doc;
  doc.metadata = metadata_for("compute", d.data_path, a.poverty_line, o);
  doc.n_total = sample.n_total;
  doc.q_poor = sample.q_poor;
  for (const auto& spec : a.indicators) doc.values.push_back({spec.name, evaluate_indicator(sample, spec)});
  emit(render(doc, o), o, out);
}

void run_decompose(const CommonOptions& o, const DataOptions& d, std::ostream& out, std::ostream& err) {
  const auto a = load_analysis(o, d);
  for (const auto& s : a.data.skipped) err << fmt::format("skipped row {}: {}\n", s.row, s.reason);

  std::vector<std::string> variables = d.variables;
  if (d.all_variables) {
    variables = a.config.stratification_variables;
    if (variables.empty()) variables = a.data.strata_variables;
  } else if (variables.empty()) {
    variables = a.config.stratification_variables;
  }
  if (variables.empty()) throw Error(ErrorCode::ConfigError, "no stratification variable given (--variable)");

  const VectorD incomes = a.data.incomes();
  ReportDocument doc;
  doc.metadata = metadata_for("decompose", d.data_path, a.poverty_line, o);
  for (const auto& variable : variables) {
    const auto strat = stratify(incomes, a.data.labels(variable));
    DecompositionTable table;
    table.variable = variable;
    for (const auto& spec : a.indicators) table.columns.push_back(decompose(strat, a.poverty_line, spec));
    doc.tables.push_back(std::move(table));
  }
  emit(render(doc, o), o, out);
}

void run_bootstrap(const CommonOptions& o, const DataOptions& d, std::ostream& out, std::ostream& err) {
  const auto a = load_analysis(o, d);
  for (const auto& s : a.data.skipped) err << fmt::format("skipped row {}: {}\n", s.row, s.reason);
  if (d.variables.size() != 1) throw Error(ErrorCode::ConfigError, "bootstrap needs exactly one --variable");

  CommonOptions opts = o;
  if (!opts.seed) opts.seed = 1;
  const auto strat = stratify(a.data.incomes(), a.data.labels(d.variables.front()));

  BootstrapDocument doc;
  doc.metadata = metadata_for("bootstrap", d.data_path, a.poverty_line, opts);
  doc.variable = d.variables.front();
  doc.groups = strat.group_count();
  for (const auto& spec : a.indicators) {
    doc.intervals.push_back(
        {spec.name, bootstrap_gap_ci(strat, a.poverty_line, spec, d.replicates, d.level, *opts.seed, opts.threads)});
  }
  emit(render(doc, opts), opts, out);
}

struct SimulateOptions {
  std::vector<Index> grid;
  std::optional<std::size_t> replications;
};

void run_simulate(const CommonOptions& o, const SimulateOptions& s, std::ostream& out) {
  SimulationConfig sim;
  if (!o.config_path.empty()) sim = SimulationConfig::from_document(KeyValueDocument::load(o.config_path));
  if (o.seed) sim.seed = *o.seed;
  if (!s.grid.empty()) sim.grid = s.grid;
  if (s.replications) sim.replications = *s.replications;

  std::vector<GpiSpec<double>> indicators;
  for (const auto& name : sim.indicators) indicators.push_back(parse_indicator<double>(name));
  const auto study = convergence_study(sim.spec, sim.grid, sim.replications, sim.line, indicators, sim.seed, o.threads);

  CommonOptions opts = o;
  opts.seed = sim.seed;
  const auto metadata = metadata_for("simulate", o.config_path.empty() ? "(defaults)" : o.config_path,
                                     sim.line.kind == PovertyLineRule::Kind::Fixed ? std::optional<double>(sim.line.value) : std::nullopt,
                                     opts);
  std::string payload;
  if (o.format == "json") {
    payload = dump_json(to_json(study, metadata));
  } else if (o.format == "csv") {
    payload = render_csv(study);
  } else {
    payload = render_text(study, locale_of(o));
  }
  emit(payload, o, out);
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Poverty indicators and their subgroup decomposability gap"};
  app.require_subcommand(1);

  CommonOptions common;
  DataOptions data;
  SimulateOptions sim;

  auto* compute = app.add_subcommand("compute", "Global indicator values for a dataset");
  add_common(compute, common);
  add_data(compute, data);

  auto* decompose_cmd = app.add_subcommand("decompose", "Decomposability gap tables by stratification variable");
  add_common(decompose_cmd, common);
  add_data(decompose_cmd, data);
  decompose_cmd->add_option("--variable", data.variables, "Stratification variable; repeatable");
  decompose_cmd->add_flag("--all-variables", data.all_variables, "Every configured stratification variable");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo convergence study of the sampled gap");
  add_common(simulate, common);
  simulate->add_option("--grid", sim.grid, "Sample sizes, overriding the config file");
  simulate->add_option("--replications", sim.replications, "Replications per sample size");
  simulate->add_option("--threads", common.threads, "Worker threads (0 = all cores)");

  auto* bootstrap = app.add_subcommand("bootstrap", "Stratified bootstrap interval for the gap");
  add_common(bootstrap, common);
  add_data(bootstrap, data);
  bootstrap->add_option("--variable", data.variables, "Stratification variable")->required();
  bootstrap->add_option("--replicates,-B", data.replicates, "Bootstrap replicates (at least 100)");
  bootstrap->add_option("--level", data.level, "Confidence level in (0, 1)");
  bootstrap->add_option("--threads", common.threads, "Worker threads (0 = all cores)");

  std::vector<std::string> argv_storage{"povdec"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitSuccess;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitConfigError;
  }

  try {
    if (compute->parsed()) run_compute(common, data, out, err);
    if (decompose_cmd->parsed()) run_decompose(common, data, out, err);
    if (simulate->parsed()) run_simulate(common, sim, out);
    if (bootstrap->parsed()) run_bootstrap(common, data, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_configuration_error(e.code()) ? kExitConfigError : kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitSuccess;
}

} // namespace povdec
