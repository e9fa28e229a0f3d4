#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "povdec/decomposition.hpp"

namespace povdec {

class KeyValueDocument;

struct LognormalStratum {
  std::string label;
  double log_location = 0;  // m_i
  double log_scale = 1;     // sigma_i
  Index size = 0;           // N_i
};

/// Income = scale * X + shift applied after drawing X.
struct IncomeTransform {
  double scale = 1;
  double shift = 0;
};

struct LognormalSpec {
  std::vector<LognormalStratum> strata;
  std::optional<IncomeTransform> transform;

  /// `groups` identical strata (default m = -12, sigma = 1) sharing `total`
  /// households as evenly as possible.
  static LognormalSpec homogeneous(Index groups, Index total, double log_location = -12.0, double log_scale = 1.0);

  Index total() const;
  void validate() const;
  /// Same strata with sizes reallocated proportionally to sum to `n`
  /// (largest remainder, every stratum keeps at least one household).
  LognormalSpec resized(Index n) const;
};

/// Deterministic 64-bit mix of a master seed with a stream index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Independent lognormal draws per stratum; stratum i uses derive_seed(seed, i).
Stratification<double> sample_population(const LognormalSpec& spec, std::uint64_t seed);

/// Sorted-value quantile Y_(floor(p N)) (0-based), so that exactly floor(p N)
/// values lie strictly below it when there are no ties.
double empirical_quantile(const VectorD& values, double p);

/// Type-7 (linear interpolation) sample quantile, used for summaries.
double interpolated_quantile(std::vector<double> values, double p);

struct PovertyLineRule {
  enum class Kind { Fixed, EmpiricalQuantile };
  Kind kind = Kind::EmpiricalQuantile;
  double value = 0.3;  // line itself, or the quantile level

  static PovertyLineRule fixed(double z) { return {Kind::Fixed, z}; }
  static PovertyLineRule quantile(double p) { return {Kind::EmpiricalQuantile, p}; }

  double resolve(const Stratification<double>& population) const;
  std::string describe() const;
};

struct SampledGap {
  double value = 0;  // dd_n
  Index n = 0;
  Index q = 0;
  std::vector<Index> sizes;   // n_i
  std::vector<Index> poor;    // q_i
  std::vector<double> weights;  // W_i = n_i / n
};

/// Gap on a stratified sub-sample drawn without replacement, n_i per stratum.
SampledGap sampled_gap(const Stratification<double>& strat, double z, const GpiSpec<double>& spec,
                       const std::vector<Index>& sub_sizes, std::uint64_t seed);

struct ConvergenceCell {
  Index n = 0;
  std::size_t replication = 0;
  std::size_t indicator = 0;  // index into ConvergenceStudy::indicators
  double poverty_line = 0;
  double gap = 0;
};

struct ConvergenceSummary {
  Index n = 0;
  std::string indicator;
  double mean = 0;
  double std_error = 0;  // of the mean over replications
  double mean_abs = 0;
  double median_abs = 0;
  double q10_abs = 0;
  double q90_abs = 0;
  double max_abs = 0;
};

struct ConvergenceStudy {
  std::vector<Index> grid;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  PovertyLineRule line;
  LognormalSpec spec;
  std::vector<std::string> indicators;
  std::vector<ConvergenceCell> cells;  // grid-major, then replication, then indicator
  std::vector<ConvergenceSummary> summaries;

  const ConvergenceSummary& summary(Index n, const std::string& indicator) const;
  std::vector<double> gaps(Index n, const std::string& indicator) const;
};

/**
 * For every n in `grid` and replication r, draws a population of n
 * households from `spec` (sizes allocated proportionally), fixes Z by
 * `line`, and records the gap of every indicator. Cell (n, r) uses its own
 * derived seed, so results do not depend on `threads`.
 */
ConvergenceStudy convergence_study(const LognormalSpec& spec, const std::vector<Index>& grid, std::size_t replications,
                                   const PovertyLineRule& line, const std::vector<GpiSpec<double>>& indicators,
                                   std::uint64_t seed, unsigned threads = 0);

struct BootstrapInterval {
  double estimate = 0;
  double lower = 0;
  double upper = 0;
  double level = 0.95;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;

  double width() const { return upper - lower; }
};

/// Percentile bootstrap of the gap, resampling with replacement inside each stratum.
BootstrapInterval bootstrap_gap_ci(const Stratification<double>& strat, double z, const GpiSpec<double>& spec,
                                   std::size_t replicates, double level, std::uint64_t seed, unsigned threads = 0);

/// Settings of a simulation run as read from a key-value file.
struct SimulationConfig {
  LognormalSpec spec;
  std::vector<Index> grid{500, 3278, 20000};
  std::size_t replications = 100;
  PovertyLineRule line = PovertyLineRule::quantile(0.3);
  std::vector<std::string> indicators{"sen", "shorrocks"};
  std::uint64_t seed = 1996;

  static SimulationConfig from_document(const KeyValueDocument& doc);
};

} // namespace povdec
