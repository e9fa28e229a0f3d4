#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "povdec/gpi.hpp"

namespace povdec {

template <typename Scalar = double>
struct Stratum {
  std::string label;
  Vector<Scalar> incomes;

  Index size() const { return incomes.size(); }
  bool empty() const { return incomes.size() == 0; }
};

/// Partition of a population into labeled subgroups. Groups may be empty only
/// when they were requested explicitly (expected labels with no members).
template <typename Scalar = double>
struct Stratification {
  std::vector<Stratum<Scalar>> groups;

  Index total() const {
    Index n = 0;
    for (const auto& g : groups) n += g.size();
    return n;
  }

  Index group_count() const { return static_cast<Index>(groups.size()); }

  bool has_empty_groups() const {
    return std::any_of(groups.begin(), groups.end(), [](const auto& g) { return g.empty(); });
  }

  /// omega_i = N_i / N.
  Vector<Scalar> weights() const {
    const Scalar n = Scalar(total());
    Vector<Scalar> w(group_count());
    for (Index i = 0; i < w.size(); ++i) w[i] = Scalar(groups[i].size()) / n;
    return w;
  }

  /// All incomes concatenated in group order.
  Vector<Scalar> pooled() const {
    Vector<Scalar> all(total());
    Index offset = 0;
    for (const auto& g : groups) {
      all.segment(offset, g.size()) = g.incomes;
      offset += g.size();
    }
    return all;
  }
};

/**
 * Groups incomes by label. Groups are ordered by first appearance, or by
 * `expected_labels` when given; in that case an unlisted label is an error
 * and a listed label with no members yields an empty group.
 */
template <typename Scalar>
Stratification<Scalar> stratify(const Vector<Scalar>& incomes, const std::vector<std::string>& labels,
                                const std::optional<std::vector<std::string>>& expected_labels = std::nullopt) {
  if (incomes.size() == 0) throw Error(ErrorCode::EmptyPopulation, "no records to stratify");
  if (static_cast<std::size_t>(incomes.size()) != labels.size()) {
    throw Error(ErrorCode::InvalidParameter, "incomes and labels differ in length");
  }

  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> slot;
  if (expected_labels) {
    for (const auto& label : *expected_labels) {
      if (slot.emplace(label, order.size()).second) order.push_back(label);
    }
  }

  std::vector<std::vector<Scalar>> members(order.size());
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const auto& label = labels[r];
    if (label.empty()) throw Error(ErrorCode::InvalidParameter, "empty stratum label", r);
    auto it = slot.find(label);
    if (it == slot.end()) {
      if (expected_labels) throw Error(ErrorCode::UnknownStratum, "label '" + label + "' is not expected", r);
      it = slot.emplace(label, order.size()).first;
      order.push_back(label);
      members.emplace_back();
    }
    members[it->second].push_back(incomes[static_cast<Index>(r)]);
  }

  Stratification<Scalar> strat;
  strat.groups.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    strat.groups.push_back({order[i], Eigen::Map<const Vector<Scalar>>(members[i].data(), static_cast<Index>(members[i].size()))});
  }
  return strat;
}

template <typename Scalar = double>
struct GroupValue {
  std::string label;
  Index size = 0;
  Index poor = 0;
  Scalar weight{0};
  Scalar value{0};
  bool empty = false;
};

template <typename Scalar = double>
struct GapReport {
  std::string indicator;
  Scalar poverty_line{0};
  Index n_total = 0;
  Index q_poor = 0;
  Scalar global_value{0};
  std::vector<GroupValue<Scalar>> groups;
  Scalar recomposed_value{0};
  Scalar gap{0};  // global_value - recomposed_value, signed

  Scalar abs_gap() const { return std::abs(gap); }
  Scalar relative_gap() const { return global_value == Scalar(0) ? Scalar(0) : std::abs(gap) / std::abs(global_value); }
  bool has_empty_groups() const {
    return std::any_of(groups.begin(), groups.end(), [](const auto& g) { return g.empty; });
  }
};

/// Barycentric recomposition with omega_i = N_i / N and the resulting gap.
/// Empty groups are listed with zero weight and do not contribute.
template <typename Scalar>
GapReport<Scalar> decompose(const Stratification<Scalar>& strat, Scalar z, const GpiSpec<Scalar>& spec) {
  const auto pooled = order_and_count(strat.pooled(), z);

  GapReport<Scalar> report;
  report.indicator = spec.name;
  report.poverty_line = z;
  report.n_total = pooled.n_total;
  report.q_poor = pooled.q_poor;
  report.global_value = evaluate_indicator(pooled, spec);

  const Scalar n = Scalar(pooled.n_total);
  CompensatedSum<Scalar> recomposed;
  Index poor_total = 0;
  report.groups.reserve(strat.groups.size());
  for (const auto& g : strat.groups) {
    GroupValue<Scalar> row;
    row.label = g.label;
    row.size = g.size();
    if (g.empty()) {
      row.empty = true;
    } else {
      const auto sample = order_and_count(g.incomes, z);
      row.poor = sample.q_poor;
      row.weight = Scalar(row.size) / n;
      row.value = evaluate_indicator(sample, spec);
      recomposed += row.weight * row.value;
      poor_total += row.poor;
    }
    report.groups.push_back(std::move(row));
  }
  assert(poor_total == report.q_poor);
  (void)poor_total;

  report.recomposed_value = recomposed.value();
  report.gap = report.global_value - report.recomposed_value;
  return report;
}

// ---------------------------------------------------------------------------
// Ray's non-additive decomposition
// ---------------------------------------------------------------------------

template <typename Scalar = double>
struct RayGroupTerm {
  std::string label;
  Index size = 0;
  Index poor = 0;
  Scalar value{0};
  /// Unset when the group has no poor household (g_i undefined).
  std::optional<Scalar> mean_gap;
  std::optional<Scalar> weight;
};

template <typename Scalar = double>
struct RayDecomposition {
  Scalar alpha{0};
  Scalar poverty_line{0};
  Scalar global_value{0};
  Scalar global_mean_gap{0};
  std::vector<RayGroupTerm<Scalar>> groups;
  Scalar recomposed_value{0};
  Scalar weight_sum{0};
  bool has_groups_without_poor = false;

  Scalar discrepancy() const { return global_value - recomposed_value; }
};

/**
 * R = sum_i (N_i/N) (g_i/g)^(alpha-1) R_i with g the pooled mean shortfall.
 * Groups without poor households have R_i = 0; they are flagged and skipped.
 */
template <typename Scalar>
RayDecomposition<Scalar> ray_nonadditive_decompose(const Stratification<Scalar>& strat, Scalar z, Scalar alpha) {
  detail::check_alpha(alpha);
  const auto pooled = order_and_count(strat.pooled(), z);
  if (pooled.q_poor == 0) throw Error(ErrorCode::NoPoorHouseholds, "pooled population has no poor household");

  RayDecomposition<Scalar> out;
  out.alpha = alpha;
  out.poverty_line = z;
  out.global_value = ray(pooled, alpha);
  out.global_mean_gap = mean_poverty_gap(pooled);

  const Scalar n = Scalar(pooled.n_total);
  CompensatedSum<Scalar> recomposed;
  CompensatedSum<Scalar> weight_sum;
  for (const auto& g : strat.groups) {
    RayGroupTerm<Scalar> term;
    term.label = g.label;
    term.size = g.size();
    if (!g.empty()) {
      const auto sample = order_and_count(g.incomes, z);
      term.poor = sample.q_poor;
      if (sample.q_poor > 0) {
        term.value = ray(sample, alpha);
        term.mean_gap = mean_poverty_gap(sample);
        term.weight = Scalar(term.size) / n * std::pow(*term.mean_gap / out.global_mean_gap, alpha - Scalar(1));
        recomposed += *term.weight * term.value;
        weight_sum += *term.weight;
      }
    }
    if (!term.weight) out.has_groups_without_poor = true;
    out.groups.push_back(std::move(term));
  }
  out.recomposed_value = recomposed.value();
  out.weight_sum = weight_sum.value();
  return out;
}

// ---------------------------------------------------------------------------
// Changes over time
// ---------------------------------------------------------------------------

template <typename Scalar = double>
struct GroupDelta {
  std::string label;
  Scalar weight{0};
  Scalar delta{0};         // Delta P_i
  Scalar contribution{0};  // omega_i Delta P_i
};

template <typename Scalar = double>
struct DeltaDecomposition {
  Scalar global_delta{0};
  std::vector<GroupDelta<Scalar>> groups;
  Scalar contribution_sum{0};
  /// global_delta - contribution_sum; equals the change in the gap.
  Scalar residual{0};
};

/// Fixed-weight attribution of a change in the indicator to the subgroups.
template <typename Scalar>
DeltaDecomposition<Scalar> delta_decompose(const GapReport<Scalar>& before, const GapReport<Scalar>& after) {
  if (before.indicator != after.indicator) {
    throw Error(ErrorCode::IncompatibleReports, "indicators differ: " + before.indicator + " vs " + after.indicator);
  }
  if (before.poverty_line != after.poverty_line) {
    throw Error(ErrorCode::IncompatibleReports, "poverty lines differ");
  }
  if (before.groups.size() != after.groups.size()) {
    throw Error(ErrorCode::IncompatibleReports, "group counts differ");
  }
  for (std::size_t i = 0; i < before.groups.size(); ++i) {
    if (before.groups[i].label != after.groups[i].label || before.groups[i].size != after.groups[i].size) {
      throw Error(ErrorCode::IncompatibleReports, "stratum '" + before.groups[i].label + "' differs in label or size", i);
    }
  }

  DeltaDecomposition<Scalar> out;
  out.global_delta = after.global_value - before.global_value;
  CompensatedSum<Scalar> sum;
  for (std::size_t i = 0; i < before.groups.size(); ++i) {
    GroupDelta<Scalar> row;
    row.label = before.groups[i].label;
    row.weight = before.groups[i].weight;
    row.delta = after.groups[i].value - before.groups[i].value;
    row.contribution = row.weight * row.delta;
    sum += row.contribution;
    out.groups.push_back(std::move(row));
  }
  out.contribution_sum = sum.value();
  out.residual = out.global_delta - out.contribution_sum;
  return out;
}

template <typename Scalar = double>
struct RayFirstOrder {
  Scalar exact_delta{0};
  Scalar approximation{0};
  Scalar discrepancy{0};  // |exact_delta - approximation|
};

/**
 * Compares the exact change in Ray's statistic with its first-order expansion
 *
 *   dR ~ sum_i (N_i/N)(g_i/g)^(a-1) dR_i
 *      + sum_i (a-1)(N_i/N) ((g dg_i - g_i dg) / g^2) (g_i/g)^(a-2) R_i
 *
 * with all coefficients taken at `before`.
 */
template <typename Scalar>
RayFirstOrder<Scalar> ray_delta_firstorder(const Stratification<Scalar>& before, const Stratification<Scalar>& after,
                                           Scalar z, Scalar alpha) {
  if (before.groups.size() != after.groups.size()) {
    throw Error(ErrorCode::IncompatibleReports, "group counts differ");
  }
  for (std::size_t i = 0; i < before.groups.size(); ++i) {
    if (before.groups[i].size() != after.groups[i].size() || before.groups[i].label != after.groups[i].label) {
      throw Error(ErrorCode::IncompatibleReports, "stratum '" + before.groups[i].label + "' differs in label or size", i);
    }
  }
  const auto r0 = ray_nonadditive_decompose(before, z, alpha);
  const auto r1 = ray_nonadditive_decompose(after, z, alpha);
  if (r0.has_groups_without_poor || r1.has_groups_without_poor) {
    throw Error(ErrorCode::NoPoorHouseholds, "first-order expansion needs poor households in every group");
  }

  const Scalar g = r0.global_mean_gap;
  const Scalar dg = r1.global_mean_gap - g;
  const Scalar n = Scalar(before.total());
  CompensatedSum<Scalar> approx;
  for (std::size_t i = 0; i < r0.groups.size(); ++i) {
    const auto& t0 = r0.groups[i];
    const auto& t1 = r1.groups[i];
    const Scalar share = Scalar(t0.size) / n;
    const Scalar gi = *t0.mean_gap;
    const Scalar dgi = *t1.mean_gap - gi;
    const Scalar ratio = gi / g;
    approx += share * std::pow(ratio, alpha - Scalar(1)) * (t1.value - t0.value);
    approx += (alpha - Scalar(1)) * share * ((g * dgi - gi * dg) / (g * g)) * std::pow(ratio, alpha - Scalar(2)) * t0.value;
  }

  RayFirstOrder<Scalar> out;
  out.exact_delta = r1.global_value - r0.global_value;
  out.approximation = approx.value();
  out.discrepancy = std::abs(out.exact_delta - out.approximation);
  return out;
}

} // namespace povdec
