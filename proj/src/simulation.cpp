#include "povdec/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "povdec/config.hpp"

namespace povdec {

namespace {

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

LognormalSpec LognormalSpec::homogeneous(Index groups, Index total, double log_location, double log_scale) {
  if (groups < 1 || total < groups) {
    throw Error(ErrorCode::InvalidParameter, "need at least one household per stratum");
  }
  LognormalSpec spec;
  for (Index i = 0; i < groups; ++i) {
    const Index size = total / groups + (i < total % groups ? 1 : 0);
    spec.strata.push_back({fmt::format("S{:02d}", i + 1), log_location, log_scale, size});
  }
  return spec;
}

Index LognormalSpec::total() const {
  Index n = 0;
  for (const auto& s : strata) n += s.size;
  return n;
}

void LognormalSpec::validate() const {
  if (strata.empty()) throw Error(ErrorCode::InvalidParameter, "lognormal spec has no strata");
  for (const auto& s : strata) {
    if (!(s.log_scale > 0) || !std::isfinite(s.log_scale) || !std::isfinite(s.log_location)) {
      throw Error(ErrorCode::InvalidParameter, "stratum '" + s.label + "': sigma must be positive and finite");
    }
    if (s.size < 1) throw Error(ErrorCode::InvalidParameter, "stratum '" + s.label + "': size must be at least 1");
    if (s.label.empty()) throw Error(ErrorCode::InvalidParameter, "stratum label must not be empty");
  }
  if (transform && (!(transform->scale > 0) || !(transform->shift >= 0))) {
    throw Error(ErrorCode::InvalidParameter, "income transform needs scale > 0 and shift >= 0");
  }
}

LognormalSpec LognormalSpec::resized(Index n) const {
  validate();
  const Index k = static_cast<Index>(strata.size());
  if (n < k) throw Error(ErrorCode::InvalidParameter, "sample size smaller than the number of strata");
  const Index old_total = total();

  LognormalSpec out = *this;
  std::vector<std::pair<double, std::size_t>> remainders;
  Index assigned = 0;
  for (std::size_t i = 0; i < strata.size(); ++i) {
    const double exact = static_cast<double>(n) * static_cast<double>(strata[i].size) / static_cast<double>(old_total);
    const Index base = std::max<Index>(1, static_cast<Index>(std::floor(exact)));
    out.strata[i].size = base;
    assigned += base;
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t j = 0; assigned < n; j = (j + 1) % remainders.size()) {
    ++out.strata[remainders[j].second].size;
    ++assigned;
  }
  // Minimum-one bumps can overshoot; take back from the largest strata.
  while (assigned > n) {
    auto largest = std::max_element(out.strata.begin(), out.strata.end(),
                                    [](const auto& a, const auto& b) { return a.size < b.size; });
    --largest->size;
    --assigned;
  }
  return out;
}

Stratification<double> sample_population(const LognormalSpec& spec, std::uint64_t seed) {
  spec.validate();
  Stratification<double> strat;
  strat.groups.reserve(spec.strata.size());
  for (std::size_t i = 0; i < spec.strata.size(); ++i) {
    const auto& s = spec.strata[i];
    std::mt19937_64 engine(derive_seed(seed, i));
    std::lognormal_distribution<double> draw(s.log_location, s.log_scale);
    VectorD incomes(s.size);
    for (Index j = 0; j < s.size; ++j) incomes[j] = draw(engine);
    if (spec.transform) incomes = (incomes.array() * spec.transform->scale + spec.transform->shift).matrix();
    strat.groups.push_back({s.label, std::move(incomes)});
  }
  return strat;
}

double empirical_quantile(const VectorD& values, double p) {
  if (values.size() == 0) throw Error(ErrorCode::EmptyPopulation, "quantile of an empty sample");
  if (!(p >= 0 && p < 1)) throw Error(ErrorCode::InvalidParameter, "quantile level must lie in [0, 1)");
  VectorD sorted = values;
  const auto k = static_cast<Index>(std::floor(p * static_cast<double>(sorted.size())));
  std::nth_element(sorted.begin(), sorted.begin() + k, sorted.end());
  return sorted[k];
}

double interpolated_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw Error(ErrorCode::EmptyPopulation, "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - std::floor(h)) * (values[hi] - values[lo]);
}

double PovertyLineRule::resolve(const Stratification<double>& population) const {
  if (kind == Kind::Fixed) {
    if (!(value > 0)) throw Error(ErrorCode::InvalidParameter, "fixed poverty line must be positive");
    return value;
  }
  const double z = empirical_quantile(population.pooled(), value);
  if (!(z > 0)) throw Error(ErrorCode::InvalidParameter, "empirical quantile gives a non-positive poverty line");
  return z;
}

std::string PovertyLineRule::describe() const {
  return kind == Kind::Fixed ? fmt::format("fixed:{}", value) : fmt::format("quantile:{}", value);
}

SampledGap sampled_gap(const Stratification<double>& strat, double z, const GpiSpec<double>& spec,
                       const std::vector<Index>& sub_sizes, std::uint64_t seed) {
  if (sub_sizes.size() != strat.groups.size()) {
    throw Error(ErrorCode::InvalidParameter, "one sub-sample size per stratum is required");
  }
  Stratification<double> sub;
  for (std::size_t i = 0; i < strat.groups.size(); ++i) {
    const auto& g = strat.groups[i];
    const Index take = sub_sizes[i];
    if (take > g.size()) {
      throw Error(ErrorCode::OversizedSubsample,
                  fmt::format("stratum '{}': {} requested, {} available", g.label, take, g.size()), i);
    }
    if (take < 1) throw Error(ErrorCode::InvalidParameter, "sub-sample sizes must be at least 1", i);
    // Partial Fisher-Yates over member indices.
    std::vector<Index> idx(static_cast<std::size_t>(g.size()));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::mt19937_64 engine(derive_seed(seed, i));
    VectorD picked(take);
    for (Index j = 0; j < take; ++j) {
      std::uniform_int_distribution<Index> pick(j, g.size() - 1);
      std::swap(idx[static_cast<std::size_t>(j)], idx[static_cast<std::size_t>(pick(engine))]);
      picked[j] = g.incomes[idx[static_cast<std::size_t>(j)]];
    }
    sub.groups.push_back({g.label, std::move(picked)});
  }

  const auto report = decompose(sub, z, spec);
  SampledGap out;
  out.value = report.gap;
  out.n = report.n_total;
  out.q = report.q_poor;
  for (const auto& row : report.groups) {
    out.sizes.push_back(row.size);
    out.poor.push_back(row.poor);
    out.weights.push_back(row.weight);
  }
  return out;
}

const ConvergenceSummary& ConvergenceStudy::summary(Index n, const std::string& indicator) const {
  for (const auto& s : summaries) {
    if (s.n == n && s.indicator == indicator) return s;
  }
  throw Error(ErrorCode::InvalidParameter, fmt::format("no summary for n={} indicator={}", n, indicator));
}

std::vector<double> ConvergenceStudy::gaps(Index n, const std::string& indicator) const {
  const auto it = std::find(indicators.begin(), indicators.end(), indicator);
  if (it == indicators.end()) throw Error(ErrorCode::InvalidParameter, "unknown indicator " + indicator);
  const auto k = static_cast<std::size_t>(it - indicators.begin());
  std::vector<double> out;
  for (const auto& c : cells) {
    if (c.n == n && c.indicator == k) out.push_back(c.gap);
  }
  return out;
}

ConvergenceStudy convergence_study(const LognormalSpec& spec, const std::vector<Index>& grid, std::size_t replications,
                                   const PovertyLineRule& line, const std::vector<GpiSpec<double>>& indicators,
                                   std::uint64_t seed, unsigned threads) {
  spec.validate();
  if (grid.empty()) throw Error(ErrorCode::InvalidParameter, "empty sample-size grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] <= grid[i - 1]) throw Error(ErrorCode::InvalidParameter, "sample-size grid must be increasing");
  }
  if (replications < 1) throw Error(ErrorCode::InvalidParameter, "at least one replication is required");
  if (indicators.empty()) throw Error(ErrorCode::InvalidParameter, "no indicators requested");

  ConvergenceStudy study;
  study.grid = grid;
  study.replications = replications;
  study.seed = seed;
  study.line = line;
  study.spec = spec;
  for (const auto& ind : indicators) study.indicators.push_back(ind.name);

  std::vector<LognormalSpec> sized;
  for (Index n : grid) sized.push_back(spec.resized(n));

  const std::size_t k = indicators.size();
  study.cells.resize(grid.size() * replications * k);
  parallel_for(grid.size() * replications, threads, [&](std::size_t task) {
    const std::size_t gi = task / replications;
    const std::size_t r = task % replications;
    const auto population = sample_population(sized[gi], derive_seed(derive_seed(seed, gi), r));
    const double z = line.resolve(population);
    for (std::size_t m = 0; m < k; ++m) {
      auto& cell = study.cells[task * k + m];
      cell.n = grid[gi];
      cell.replication = r;
      cell.indicator = m;
      cell.poverty_line = z;
      cell.gap = decompose(population, z, indicators[m]).gap;
    }
  });

  for (Index n : grid) {
    for (const auto& name : study.indicators) {
      const auto values = study.gaps(n, name);
      std::vector<double> magnitudes(values.size());
      std::transform(values.begin(), values.end(), magnitudes.begin(), [](double v) { return std::abs(v); });
      CompensatedSum<double> sum, sum_abs;
      for (std::size_t i = 0; i < values.size(); ++i) {
        sum += values[i];
        sum_abs += magnitudes[i];
      }
      const double count = static_cast<double>(values.size());
      ConvergenceSummary s;
      s.n = n;
      s.indicator = name;
      s.mean = sum.value() / count;
      s.mean_abs = sum_abs.value() / count;
      if (values.size() > 1) {
        CompensatedSum<double> ss;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std_error = std::sqrt(ss.value() / (count - 1.0)) / std::sqrt(count);
      }
      s.median_abs = interpolated_quantile(magnitudes, 0.5);
      s.q10_abs = interpolated_quantile(magnitudes, 0.1);
      s.q90_abs = interpolated_quantile(magnitudes, 0.9);
      s.max_abs = *std::max_element(magnitudes.begin(), magnitudes.end());
      study.summaries.push_back(std::move(s));
    }
  }
  return study;
}

BootstrapInterval bootstrap_gap_ci(const Stratification<double>& strat, double z, const GpiSpec<double>& spec,
                                   std::size_t replicates, double level, std::uint64_t seed, unsigned threads) {
  if (replicates < 100) throw Error(ErrorCode::InvalidParameter, "bootstrap needs at least 100 replicates");
  if (!(level > 0 && level < 1)) throw Error(ErrorCode::InvalidParameter, "confidence level must lie in (0, 1)");

  BootstrapInterval out;
  out.estimate = decompose(strat, z, spec).gap;
  out.level = level;
  out.replicates = replicates;
  out.seed = seed;

  std::vector<double> gaps(replicates);
  parallel_for(replicates, threads, [&](std::size_t b) {
    std::mt19937_64 engine(derive_seed(seed, b));
    Stratification<double> resampled;
    resampled.groups.reserve(strat.groups.size());
    for (const auto& g : strat.groups) {
      VectorD draw(g.size());
      if (g.size() > 0) {
        std::uniform_int_distribution<Index> pick(0, g.size() - 1);
        for (Index j = 0; j < g.size(); ++j) draw[j] = g.incomes[pick(engine)];
      }
      resampled.groups.push_back({g.label, std::move(draw)});
    }
    gaps[b] = decompose(resampled, z, spec).gap;
  });

  const double tail = (1.0 - level) / 2.0;
  out.lower = interpolated_quantile(gaps, tail);
  out.upper = interpolated_quantile(gaps, 1.0 - tail);
  return out;
}

SimulationConfig SimulationConfig::from_document(const KeyValueDocument& doc) {
  doc.reject_unknown_keys({"seed", "strata", "population", "m", "sigma", "stratum", "income_scale", "income_shift",
                           "grid", "replications", "poverty_quantile", "poverty_line", "indicators"});
  SimulationConfig c;
  c.seed = static_cast<std::uint64_t>(doc.get_integer("seed", static_cast<long long>(c.seed)));

  const auto explicit_strata = doc.get_all("stratum");
  if (explicit_strata.empty()) {
    c.spec = LognormalSpec::homogeneous(doc.get_integer("strata", 10), doc.get_integer("population", 3278),
                                        doc.get_double("m", -12.0), doc.get_double("sigma", 1.0));
  } else {
    for (const auto& line : explicit_strata) {
      const auto parts = split_list(line);
      if (parts.size() != 4) throw Error(ErrorCode::ConfigError, "stratum expects 'label, m, sigma, size': " + line);
      c.spec.strata.push_back({parts[0], parse_double("stratum", parts[1]), parse_double("stratum", parts[2]),
                               static_cast<Index>(parse_integer("stratum", parts[3]))});
    }
  }
  if (doc.contains("income_scale") || doc.contains("income_shift")) {
    c.spec.transform = IncomeTransform{doc.get_double("income_scale", 1.0), doc.get_double("income_shift", 0.0)};
  }
  try {
    c.spec.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }

  if (const auto grid = doc.get("grid")) {
    c.grid.clear();
    for (const auto& item : split_list(*grid)) c.grid.push_back(static_cast<Index>(parse_integer("grid", item)));
  }
  const long long reps = doc.get_integer("replications", static_cast<long long>(c.replications));
  if (reps < 1) throw Error(ErrorCode::ConfigError, "replications must be at least 1");
  c.replications = static_cast<std::size_t>(reps);

  if (doc.contains("poverty_line") && doc.contains("poverty_quantile")) {
    throw Error(ErrorCode::ConfigError, "give either poverty_line or poverty_quantile, not both");
  }
  if (doc.contains("poverty_line")) c.line = PovertyLineRule::fixed(doc.get_double("poverty_line", 0));
  if (doc.contains("poverty_quantile")) c.line = PovertyLineRule::quantile(doc.get_double("poverty_quantile", 0.3));
  c.indicators = doc.get_list("indicators", c.indicators);
  return c;
}

} // namespace povdec
