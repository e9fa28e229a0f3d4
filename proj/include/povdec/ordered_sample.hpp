#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "povdec/error.hpp"
#include "povdec/types.hpp"

namespace povdec {

/// Incomes sorted ascending together with the poverty line and the number of
/// poor households. Households at indices [0, q_poor) have income strictly
/// below the line; all others are at or above it.
template <typename Scalar = double>
struct OrderedSample {
  Vector<Scalar> values;
  Index n_total = 0;
  Index q_poor = 0;
  Scalar poverty_line{1};

  auto poor_incomes() const { return values.head(q_poor); }

  /// Normalized shortfalls (Z - Y_j) / Z of the poor, poorest first.
  Vector<Scalar> deprivations() const {
    return ((Vector<Scalar>::Constant(q_poor, poverty_line) - poor_incomes()).array() / poverty_line).matrix();
  }

  /// Absolute shortfalls Z - Y_j of the poor.
  Vector<Scalar> shortfalls() const {
    return Vector<Scalar>::Constant(q_poor, poverty_line) - poor_incomes();
  }

  Scalar headcount_ratio() const { return Scalar(q_poor) / Scalar(n_total); }
};

namespace detail {

template <typename Scalar>
void check_poverty_line(Scalar z) {
  if (!(std::isfinite(z) && z > Scalar(0))) {
    throw Error(ErrorCode::InvalidParameter, "poverty line must be finite and strictly positive");
  }
}

} // namespace detail

/// Sorts the incomes (stable) and counts the households strictly below `z`.
template <typename Derived>
OrderedSample<typename Derived::Scalar> order_and_count(const Eigen::MatrixBase<Derived>& raw_incomes,
                                                        typename Derived::Scalar z) {
  using Scalar = typename Derived::Scalar;
  detail::check_poverty_line(z);
  if (raw_incomes.size() == 0) throw Error(ErrorCode::EmptyPopulation, "no households in sample");

  OrderedSample<Scalar> sample;
  sample.values = raw_incomes.derived().reshaped();
  for (Index i = 0; i < sample.values.size(); ++i) {
    const Scalar y = sample.values[i];
    if (!std::isfinite(y) || y < Scalar(0)) {
      throw Error(ErrorCode::InvalidIncome, "income at index " + std::to_string(i) + " is negative or not finite",
                  static_cast<std::size_t>(i));
    }
  }
  std::stable_sort(sample.values.begin(), sample.values.end());
  sample.n_total = sample.values.size();
  sample.q_poor = std::lower_bound(sample.values.begin(), sample.values.end(), z) - sample.values.begin();
  sample.poverty_line = z;
  return sample;
}

template <typename Scalar>
OrderedSample<Scalar> order_and_count(const std::vector<Scalar>& raw_incomes, Scalar z) {
  return order_and_count(Eigen::Map<const Vector<Scalar>>(raw_incomes.data(), static_cast<Index>(raw_incomes.size())), z);
}

} // namespace povdec
