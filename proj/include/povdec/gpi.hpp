#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>

#include "povdec/indicators.hpp"

namespace povdec {

enum class IndicatorKind { Sen, Shorrocks, Fgt, Ray, Custom };

/**
 * One member of the general poverty index family
 *
 *   P = delta( A(Q,N,Z) / (N B(Q,N)) * sum_{j<=Q} w(mu1 N + mu2 Q - mu3 j + mu4) d((Z - Y_j) / Z) )
 *
 * with B(Q,N) = sum_{j<=Q} w(j). Presets carry both their functional pieces
 * (used by evaluate_gpi) and a closed-form code path (used by
 * evaluate_indicator). Ray has no representation with a sample-independent
 * normalizer, so its functional pieces are left empty.
 */
template <typename Scalar = double>
struct GpiSpec {
  using UnaryFn = std::function<Scalar(Scalar)>;
  using NormalizerFn = std::function<Scalar(Index q, Index n, Scalar z)>;

  IndicatorKind kind = IndicatorKind::Custom;
  Scalar alpha{0};
  std::string name = "CUSTOM";
  UnaryFn delta;
  UnaryFn weight_fn;
  UnaryFn deprivation_fn;
  NormalizerFn normalizer_a;
  std::array<Scalar, 4> mu{};

  bool has_functional_form() const { return delta && weight_fn && deprivation_fn && normalizer_a; }

  static GpiSpec sen() {
    GpiSpec s;
    s.kind = IndicatorKind::Sen;
    s.name = "SEN";
    s.delta = identity();
    s.weight_fn = identity();
    s.deprivation_fn = identity();
    s.normalizer_a = [](Index q, Index, Scalar) { return Scalar(q); };
    s.mu = {Scalar(0), Scalar(1), Scalar(1), Scalar(1)};
    return s;
  }

  static GpiSpec shorrocks() {
    GpiSpec s;
    s.kind = IndicatorKind::Shorrocks;
    s.name = "SHORROCKS";
    s.delta = identity();
    s.weight_fn = identity();
    s.deprivation_fn = identity();
    s.normalizer_a = [](Index q, Index n, Scalar) { return Scalar(q) * Scalar(q + 1) / (Scalar(2) * Scalar(n)); };
    s.mu = {Scalar(2), Scalar(0), Scalar(2), Scalar(1)};
    return s;
  }

  static GpiSpec fgt(Scalar alpha) {
    detail::check_alpha(alpha);
    GpiSpec s;
    s.kind = IndicatorKind::Fgt;
    s.alpha = alpha;
    s.name = "FGT(" + format_alpha(alpha) + ")";
    s.delta = identity();
    s.weight_fn = [](Scalar) { return Scalar(1); };
    s.deprivation_fn = [alpha](Scalar u) { return std::pow(u, alpha); };
    s.normalizer_a = [](Index q, Index, Scalar) { return Scalar(q); };
    s.mu = {Scalar(0), Scalar(0), Scalar(0), Scalar(1)};
    return s;
  }

  static GpiSpec ray(Scalar alpha) {
    detail::check_alpha(alpha);
    GpiSpec s;
    s.kind = IndicatorKind::Ray;
    s.alpha = alpha;
    s.name = "RAY(" + format_alpha(alpha) + ")";
    return s;
  }

  static GpiSpec custom(std::string name, UnaryFn delta, UnaryFn weight_fn, UnaryFn deprivation_fn,
                        NormalizerFn normalizer_a, std::array<Scalar, 4> mu) {
    GpiSpec s;
    s.kind = IndicatorKind::Custom;
    s.name = std::move(name);
    s.delta = std::move(delta);
    s.weight_fn = std::move(weight_fn);
    s.deprivation_fn = std::move(deprivation_fn);
    s.normalizer_a = std::move(normalizer_a);
    s.mu = mu;
    return s;
  }

 private:
  static UnaryFn identity() {
    return [](Scalar x) { return x; };
  }

  static std::string format_alpha(Scalar alpha) {
    std::ostringstream os;
    os << static_cast<double>(alpha);
    return os.str();
  }
};

/// Evaluates the generic functional form term by term.
template <typename Scalar>
Scalar evaluate_gpi(const OrderedSample<Scalar>& sample, const GpiSpec<Scalar>& spec) {
  if (!spec.has_functional_form()) {
    throw Error(ErrorCode::InvalidParameter, spec.name + " has no generic functional form; use its closed form");
  }
  const Index q = sample.q_poor;
  if (q == 0) return spec.delta(Scalar(0));

  const Index n = sample.n_total;
  const Scalar z = sample.poverty_line;

  CompensatedSum<Scalar> normalizer_b;
  for (Index j = 1; j <= q; ++j) normalizer_b += spec.weight_fn(Scalar(j));
  const Scalar b = normalizer_b.value();
  if (b == Scalar(0) || !std::isfinite(b)) {
    throw Error(ErrorCode::DegenerateNormalizer, "B(Q,N) = sum_j w(j) vanishes for " + spec.name);
  }

  const auto& [mu1, mu2, mu3, mu4] = spec.mu;
  CompensatedSum<Scalar> total;
  for (Index j = 1; j <= q; ++j) {
    const Scalar rank_arg = mu1 * Scalar(n) + mu2 * Scalar(q) - mu3 * Scalar(j) + mu4;
    const Scalar deprivation = (z - sample.values[j - 1]) / z;
    total += spec.weight_fn(rank_arg) * spec.deprivation_fn(deprivation);
  }
  return spec.delta(spec.normalizer_a(q, n, z) / (Scalar(n) * b) * total.value());
}

/// Closed form for presets, generic form for custom specs.
template <typename Scalar>
Scalar evaluate_indicator(const OrderedSample<Scalar>& sample, const GpiSpec<Scalar>& spec) {
  switch (spec.kind) {
    case IndicatorKind::Sen: return sen(sample);
    case IndicatorKind::Shorrocks: return shorrocks(sample);
    case IndicatorKind::Fgt: return fgt(sample, spec.alpha);
    case IndicatorKind::Ray: return ray(sample, spec.alpha);
    case IndicatorKind::Custom: break;
  }
  return evaluate_gpi(sample, spec);
}

/// Parses "sen", "shorrocks", "fgt:<alpha>" or "ray:<alpha>" (case-insensitive).
template <typename Scalar = double>
GpiSpec<Scalar> parse_indicator(std::string_view text) {
  std::string key;
  for (char c : text) key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::string parameter;
  if (const auto colon = key.find(':'); colon != std::string::npos) {
    parameter = key.substr(colon + 1);
    key.resize(colon);
  }

  auto parse_alpha = [&]() -> Scalar {
    if (parameter.empty()) throw Error(ErrorCode::InvalidParameter, "indicator '" + std::string(text) + "' needs :alpha");
    std::size_t used = 0;
    double value = 0;
    try {
      value = std::stod(parameter, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != parameter.size()) {
      throw Error(ErrorCode::InvalidParameter, "bad alpha in indicator '" + std::string(text) + "'");
    }
    return Scalar(value);
  };

  if (key == "sen" && parameter.empty()) return GpiSpec<Scalar>::sen();
  if (key == "shorrocks" && parameter.empty()) return GpiSpec<Scalar>::shorrocks();
  if (key == "fgt") return GpiSpec<Scalar>::fgt(parse_alpha());
  if (key == "ray") return GpiSpec<Scalar>::ray(parse_alpha());
  throw Error(ErrorCode::InvalidParameter, "unknown indicator '" + std::string(text) + "'");
}

} // namespace povdec
