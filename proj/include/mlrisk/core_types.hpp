#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mlrisk/error.hpp"
#include "mlrisk/sampling.hpp"

namespace mlrisk {

/// Intensities and mean jump sizes of the claim and premium streams.
struct ModelParams {
  double lambda = 0.0;      ///< claim arrival intensity
  double lambda_bar = 0.0;  ///< premium arrival intensity
  double mu = 0.0;          ///< mean claim size
  double mu_bar = 0.0;      ///< mean premium size

  double total_intensity() const { return lambda + lambda_bar; }
  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// k-layer dividend strategy: rate d_j applies on [b_{j-1}, b_j) with
/// b_0 = 0 and b_k = +inf. Layers are numbered 1..k.
struct DividendStrategy {
  std::vector<double> thresholds;  ///< b_1 < ... < b_{k-1}
  std::vector<double> rates;       ///< d_1 .. d_k

  std::size_t layers() const { return rates.size(); }

  /// Lower edge of layer j (1-based).
  double lower(std::size_t j) const { return j <= 1 ? 0.0 : thresholds[j - 2]; }

  /// Upper edge of layer j (1-based); +inf for the top layer.
  double upper(std::size_t j) const {
    return j >= layers() ? std::numeric_limits<double>::infinity() : thresholds[j - 1];
  }

  double rate(std::size_t j) const { return rates[j - 1]; }

  double max_rate() const {
    return rates.empty() ? 0.0 : *std::max_element(rates.begin(), rates.end());
  }

  friend bool operator==(const DividendStrategy&, const DividendStrategy&) = default;
};

enum class JumpKind { exponential, deterministic, gamma };

/// Law of i.i.d. non-negative jump sizes. Only the exponential law has closed
/// forms; the other two are accepted by the simulator.
class JumpDistribution {
 public:
  static JumpDistribution exponential(double mean) { return {JumpKind::exponential, mean, 1.0}; }
  static JumpDistribution deterministic(double value) { return {JumpKind::deterministic, value, 1.0}; }
  /// Gamma with the given shape and scale; mean = shape * scale.
  static JumpDistribution gamma(double shape, double scale) { return {JumpKind::gamma, scale, shape}; }

  JumpKind kind() const { return kind_; }
  double shape() const { return shape_; }
  double scale() const { return scale_; }

  double mean() const {
    switch (kind_) {
      case JumpKind::exponential:
      case JumpKind::deterministic: return scale_;
      case JumpKind::gamma: return shape_ * scale_;
    }
    return scale_;
  }

  bool valid() const {
    return std::isfinite(scale_) && scale_ > 0.0 && std::isfinite(shape_) && shape_ > 0.0;
  }

  template <class Urbg>
  double sample(Urbg& rng) const {
    switch (kind_) {
      case JumpKind::exponential: return scale_ * detail::exponential_variate(rng, 1.0);
      case JumpKind::deterministic: return scale_;
      case JumpKind::gamma: return scale_ * detail::standard_gamma_variate(rng, shape_);
    }
    return scale_;
  }

  /// Sum of n independent draws, sampled in one step (closed under addition
  /// for all three families).
  template <class Urbg>
  double sample_sum(std::int64_t n, Urbg& rng) const {
    if (n <= 0) return 0.0;
    if (n == 1) return sample(rng);
    switch (kind_) {
      case JumpKind::exponential: return scale_ * detail::standard_gamma_variate(rng, static_cast<double>(n));
      case JumpKind::deterministic: return static_cast<double>(n) * scale_;
      case JumpKind::gamma:
        return scale_ * detail::standard_gamma_variate(rng, static_cast<double>(n) * shape_);
    }
    return 0.0;
  }

  friend bool operator==(const JumpDistribution&, const JumpDistribution&) = default;

 private:
  JumpDistribution(JumpKind kind, double scale, double shape)
      : kind_(kind), scale_(scale), shape_(shape) {}

  JumpKind kind_;
  double scale_;
  double shape_;
};

enum class PenaltyKind { constant_one, deficit_indicator, deficit_power, custom };

/// Penalty w(surplus prior to ruin, deficit at ruin) of the Gerber-Shiu function.
class PenaltyFunction {
 public:
  using Evaluator = std::function<double(double, double)>;

  static PenaltyFunction constant_one() { return {PenaltyKind::constant_one, 0.0, {}}; }
  /// 1 if the deficit exceeds `threshold`, else 0.
  static PenaltyFunction deficit_indicator(double threshold) {
    return {PenaltyKind::deficit_indicator, threshold, {}};
  }
  /// deficit^exponent.
  static PenaltyFunction deficit_power(double exponent) {
    return {PenaltyKind::deficit_power, exponent, {}};
  }
  /// Arbitrary evaluator; library API only (not expressible in a config file).
  static PenaltyFunction custom(Evaluator fn) {
    return {PenaltyKind::custom, 0.0, std::move(fn)};
  }

  PenaltyKind kind() const { return kind_; }
  double parameter() const { return parameter_; }

  double operator()(double surplus_prior, double deficit) const {
    switch (kind_) {
      case PenaltyKind::constant_one: return 1.0;
      case PenaltyKind::deficit_indicator: return deficit > parameter_ ? 1.0 : 0.0;
      case PenaltyKind::deficit_power:
        return parameter_ == 0.0 ? 1.0 : std::pow(deficit, parameter_);
      case PenaltyKind::custom: return custom_(surplus_prior, deficit);
    }
    return 0.0;
  }

 private:
  PenaltyFunction(PenaltyKind kind, double parameter, Evaluator fn)
      : kind_(kind), parameter_(parameter), custom_(std::move(fn)) {}

  PenaltyKind kind_;
  double parameter_;
  Evaluator custom_;
};

/// delta0 discounts the Gerber-Shiu penalty, delta discounts dividends.
struct DiscountSpec {
  double delta0 = 0.0;
  double delta = 0.0;
  friend bool operator==(const DiscountSpec&, const DiscountSpec&) = default;
};

/// Parameters and strategy that passed validation, together with the jump
/// laws used for simulation (exponential with the model means by default).
class ValidatedModel {
 public:
  const ModelParams& params() const { return params_; }
  const DividendStrategy& strategy() const { return strategy_; }
  const JumpDistribution& claims() const { return claims_; }
  const JumpDistribution& premiums() const { return premiums_; }

  bool exponential_jumps() const {
    return claims_.kind() == JumpKind::exponential && premiums_.kind() == JumpKind::exponential;
  }

  std::size_t layers() const { return strategy_.layers(); }

 private:
  ValidatedModel(ModelParams p, DividendStrategy s, JumpDistribution c, JumpDistribution pr)
      : params_(p), strategy_(std::move(s)), claims_(c), premiums_(pr) {}

  friend ValidatedModel validate_model(const ModelParams&, const DividendStrategy&,
                                       const std::optional<JumpDistribution>&,
                                       const std::optional<JumpDistribution>&);

  ModelParams params_;
  DividendStrategy strategy_;
  JumpDistribution claims_;
  JumpDistribution premiums_;
};

namespace detail {

inline bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

inline bool close_relative(double a, double b, double tol = 1e-12) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace detail

/// Checks every invariant and throws one Error listing all violations.
inline ValidatedModel validate_model(const ModelParams& params, const DividendStrategy& strategy,
                                     const std::optional<JumpDistribution>& claims = std::nullopt,
                                     const std::optional<JumpDistribution>& premiums = std::nullopt) {
  std::vector<Violation> issues;
  auto require_positive = [&](double v, const char* name) {
    if (!detail::positive_finite(v))
      issues.push_back({ErrorCode::NonPositiveParameter, name,
                        "must be strictly positive and finite, got " + std::to_string(v)});
  };
  require_positive(params.lambda, "lambda");
  require_positive(params.lambda_bar, "lambda_bar");
  require_positive(params.mu, "mu");
  require_positive(params.mu_bar, "mu_bar");

  for (std::size_t i = 0; i < strategy.thresholds.size(); ++i) {
    const double b = strategy.thresholds[i];
    if (!detail::positive_finite(b)) {
      issues.push_back({ErrorCode::UnorderedThresholds, "thresholds",
                        "threshold " + std::to_string(i + 1) + " must be positive and finite"});
    } else if (i > 0 && !(b > strategy.thresholds[i - 1])) {
      issues.push_back({ErrorCode::UnorderedThresholds, "thresholds",
                        "thresholds must be strictly increasing"});
    }
  }

  if (strategy.rates.empty()) {
    issues.push_back({ErrorCode::EmptyRates, "rates", "at least one dividend rate is required"});
  } else if (strategy.rates.size() != strategy.thresholds.size() + 1) {
    issues.push_back({ErrorCode::RateCountMismatch, "rates",
                      "expected " + std::to_string(strategy.thresholds.size() + 1) +
                          " rates for " + std::to_string(strategy.thresholds.size()) +
                          " thresholds, got " + std::to_string(strategy.rates.size())});
  }
  for (std::size_t j = 0; j < strategy.rates.size(); ++j)
    if (!detail::positive_finite(strategy.rates[j]))
      issues.push_back({ErrorCode::NonPositiveParameter, "rates",
                        "rate d_" + std::to_string(j + 1) + " must be strictly positive"});

  auto check_law = [&](const std::optional<JumpDistribution>& law, double mean, const char* name) {
    if (!law) return;
    if (!law->valid()) {
      issues.push_back({ErrorCode::NonPositiveParameter, name, "distribution parameters must be positive"});
    } else if (std::isfinite(mean) && mean > 0.0 && !detail::close_relative(law->mean(), mean)) {
      issues.push_back({ErrorCode::DistributionMismatch, name,
                        "distribution mean does not equal the model mean"});
    }
  };
  check_law(claims, params.mu, "claims");
  check_law(premiums, params.mu_bar, "premiums");

  if (!issues.empty()) throw Error(std::move(issues));
  return ValidatedModel(params, strategy, claims.value_or(JumpDistribution::exponential(params.mu)),
                        premiums.value_or(JumpDistribution::exponential(params.mu_bar)));
}

struct NetProfit {
  bool holds;
  double margin;  ///< lambda_bar*mu_bar - lambda*mu - max_j d_j
};

namespace detail {

/// Strict inequality `income > outflow`, treating differences at rounding
/// level as equality.
inline bool strictly_exceeds(double income, double outflow) {
  const double scale = std::abs(income) + std::abs(outflow);
  return income - outflow > 16.0 * std::numeric_limits<double>::epsilon() * scale;
}

}  // namespace detail

inline NetProfit check_net_profit(const ModelParams& params, const DividendStrategy& strategy) {
  const double income = params.lambda_bar * params.mu_bar;
  const double outflow = params.lambda * params.mu + strategy.max_rate();
  return {detail::strictly_exceeds(income, outflow), income - outflow};
}

/// Layer j (1-based) with b_{j-1} <= x < b_j.
inline std::size_t layer_index(const DividendStrategy& strategy, double x) {
  if (!(x >= 0.0)) throw Error(ErrorCode::NegativeSurplus, "surplus must be non-negative");
  const auto it = std::upper_bound(strategy.thresholds.begin(), strategy.thresholds.end(), x);
  return static_cast<std::size_t>(it - strategy.thresholds.begin()) + 1;
}

/// Ruin probability of the same model without dividends (exponential jumps).
inline double no_dividend_ruin(const ModelParams& p, double x) {
  if (!(x >= 0.0)) throw Error(ErrorCode::NegativeSurplus, "surplus must be non-negative");
  const double income = p.lambda_bar * p.mu_bar;
  const double outflow = p.lambda * p.mu;
  if (!detail::strictly_exceeds(income, outflow))
    throw Error(ErrorCode::NetProfitViolated, "lambda_bar*mu_bar must exceed lambda*mu");
  const double coefficient = p.lambda * (p.mu + p.mu_bar) / (p.mu_bar * p.total_intensity());
  const double decay = (income - outflow) / (p.mu * p.mu_bar * p.total_intensity());
  return coefficient * std::exp(-decay * x);
}

/// Coefficient and decay rate of the no-dividend ruin probability
/// psi*(x) = coefficient * exp(-decay * x).
inline std::pair<double, double> no_dividend_ruin_form(const ModelParams& p) {
  const double coefficient = no_dividend_ruin(p, 0.0);
  const double decay =
      (p.lambda_bar * p.mu_bar - p.lambda * p.mu) / (p.mu * p.mu_bar * p.total_intensity());
  return {coefficient, decay};
}

}  // namespace mlrisk
