#pragma once

#include <cassert>
#include <cmath>

#include "povdec/compensated_sum.hpp"
#include "povdec/error.hpp"
#include "povdec/ordered_sample.hpp"

namespace povdec {

namespace detail {

template <typename Scalar>
void check_alpha(Scalar alpha) {
  if (!(std::isfinite(alpha) && alpha >= Scalar(0))) {
    throw Error(ErrorCode::InvalidParameter, "alpha must be finite and non-negative");
  }
}

/// Ranks 1..q as scalars.
template <typename Scalar>
Vector<Scalar> ranks(Index q) {
  return Vector<Scalar>::LinSpaced(q, Scalar(1), Scalar(q));
}

} // namespace detail

/// Foster-Greer-Thorbecke class: (1/N) sum_j ((Z - Y_j) / Z)^alpha over the poor.
template <typename Scalar>
Scalar fgt(const OrderedSample<Scalar>& sample, Scalar alpha) {
  detail::check_alpha(alpha);
  if (sample.q_poor == 0) return Scalar(0);
  if (alpha == Scalar(0)) return Scalar(sample.q_poor) / Scalar(sample.n_total);
  const Vector<Scalar> u = sample.deprivations();
  const Scalar total = alpha == Scalar(1) ? compensated_sum(u) : compensated_sum(u.array().pow(alpha));
  return total / Scalar(sample.n_total);
}

/// Sen (1976): 2 / (N (Q + 1)) sum_j (Q - j + 1) (Z - Y_j) / Z.
template <typename Scalar>
Scalar sen(const OrderedSample<Scalar>& sample) {
  const Index q = sample.q_poor;
  if (q == 0) return Scalar(0);
  const Vector<Scalar> rank_weights = (Scalar(q + 1) - detail::ranks<Scalar>(q).array()).matrix();
  const Scalar total = compensated_dot(rank_weights, sample.deprivations());
  return Scalar(2) * total / (Scalar(sample.n_total) * Scalar(q + 1));
}

/// Shorrocks (1995): (1/N^2) sum_j (2N - 2j + 1) (Z - Y_j) / Z.
template <typename Scalar>
Scalar shorrocks(const OrderedSample<Scalar>& sample) {
  const Index q = sample.q_poor;
  if (q == 0) return Scalar(0);
  const Scalar n = Scalar(sample.n_total);
  const Vector<Scalar> rank_weights = (Scalar(2) * n + Scalar(1) - Scalar(2) * detail::ranks<Scalar>(q).array()).matrix();
  const Scalar total = compensated_dot(rank_weights, sample.deprivations());
  return total / (n * n);
}

/// Mean shortfall g = (1/Q) sum_j (Z - Y_j) of the poor, in currency units.
template <typename Scalar>
Scalar mean_poverty_gap(const OrderedSample<Scalar>& sample) {
  if (sample.q_poor == 0) throw Error(ErrorCode::NoPoorHouseholds, "mean poverty gap needs at least one poor household");
  const Scalar g = compensated_sum(sample.shortfalls()) / Scalar(sample.q_poor);
  assert(g > Scalar(0));
  return g;
}

/// Ray (1989): (g / (N Z)) sum_j ((Z - Y_j) / g)^alpha, g the mean shortfall.
template <typename Scalar>
Scalar ray(const OrderedSample<Scalar>& sample, Scalar alpha) {
  detail::check_alpha(alpha);
  if (sample.q_poor == 0) return Scalar(0);
  const Scalar g = mean_poverty_gap(sample);
  const Vector<Scalar> relative = sample.shortfalls() / g;
  const Scalar total = alpha == Scalar(1) ? compensated_sum(relative) : compensated_sum(relative.array().pow(alpha));
  return g / (Scalar(sample.n_total) * sample.poverty_line) * total;
}

} // namespace povdec
