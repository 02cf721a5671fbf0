#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "mlrisk/core_types.hpp"

namespace mlrisk {

/// Real characteristic exponents of one layer, sorted ascending.
struct RootSet {
  std::vector<double> exponents;
  double discriminant = 0.0;
};

/// Coefficients (highest degree first) of the per-layer characteristic
/// polynomials.
struct RuinQuadratic {
  double a, b, c;  // a z^2 + b z + c
};

struct DividendCubic {
  double a3, a2, a1, a0;  // a3 z^3 + a2 z^2 + a1 z + a0
};

inline RuinQuadratic ruin_quadratic(const ModelParams& p, double d) {
  const double mm = p.mu * p.mu_bar;
  return {d * mm, d * (p.mu_bar - p.mu) + mm * p.total_intensity(),
          p.lambda_bar * p.mu_bar - p.lambda * p.mu - d};
}

inline DividendCubic dividend_cubic(const ModelParams& p, double d, double delta) {
  const double mm = p.mu * p.mu_bar;
  return {d * mm, d * (p.mu_bar - p.mu) + mm * (p.total_intensity() + delta),
          p.mu_bar * (p.lambda_bar + delta) - p.mu * (p.lambda + delta) - d, -delta};
}

/// Discriminant of the ruin quadratic written as a sum of squares (always > 0).
inline double ruin_discriminant(const ModelParams& p, double d) {
  const double mm = p.mu * p.mu_bar;
  const double s = d * (p.mu + p.mu_bar) + mm * (p.lambda - p.lambda_bar);
  return s * s + 4.0 * p.lambda * p.lambda_bar * mm * mm;
}

/// Cubic discriminant 18abcd - 4b^3 d + b^2 c^2 - 4 a c^3 - 27 a^2 d^2.
inline double dividend_discriminant(const ModelParams& p, double d, double delta) {
  const auto [a, b, c, e] = dividend_cubic(p, d, delta);
  return 18.0 * a * b * c * e - 4.0 * b * b * b * e + b * b * c * c - 4.0 * a * c * c * c -
         27.0 * a * a * e * e;
}

/// Two negative roots of the ruin quadratic for dividend rate d. The larger
/// magnitude root is formed first and the other follows from the product, so
/// the square root never cancels against the linear coefficient.
inline RootSet ruin_quadratic_roots(const ModelParams& p, double d) {
  if (!(d > 0.0)) throw Error(ErrorCode::NonPositiveParameter, "dividend rate must be positive");
  const double income = p.lambda_bar * p.mu_bar;
  if (!detail::strictly_exceeds(income, p.lambda * p.mu + d))
    throw Error(ErrorCode::NetProfitViolated,
                "lambda_bar*mu_bar must exceed lambda*mu + d for d = " + std::to_string(d));
  const auto q = ruin_quadratic(p, d);
  const double disc = ruin_discriminant(p, d);
  const double big = (-q.b - std::sqrt(disc)) / (2.0 * q.a);
  const double small = q.c / (q.a * big);
  return {{big, small}, disc};
}

namespace detail {

inline double eval_cubic(const DividendCubic& c, double z) {
  return ((c.a3 * z + c.a2) * z + c.a1) * z + c.a0;
}

inline double eval_cubic_derivative(const DividendCubic& c, double z) {
  return (3.0 * c.a3 * z + 2.0 * c.a2) * z + c.a1;
}

inline double cubic_magnitude(const DividendCubic& c, double z) {
  const double az = std::abs(z);
  return ((std::abs(c.a3) * az + std::abs(c.a2)) * az + std::abs(c.a1)) * az + std::abs(c.a0);
}

inline double polish_root(const DividendCubic& c, double z) {
  for (int it = 0; it < 6; ++it) {
    const double f = eval_cubic(c, z);
    if (it >= 2 && std::abs(f) <= 1e-15 * cubic_magnitude(c, z)) break;
    const double df = eval_cubic_derivative(c, z);
    if (df == 0.0) break;
    const double next = z - f / df;
    if (!(std::abs(eval_cubic(c, next)) <= std::abs(f))) break;
    z = next;
  }
  return z;
}

}  // namespace detail

/// Three distinct real roots of the dividend cubic for rate d and discount
/// delta, via the trigonometric form of the depressed cubic plus Newton steps.
inline RootSet dividend_cubic_roots(const ModelParams& p, double d, double delta) {
  if (!(d > 0.0)) throw Error(ErrorCode::NonPositiveParameter, "dividend rate must be positive");
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "dividend discount rate must be positive");
  const double disc = dividend_discriminant(p, d, delta);
  if (!(disc > 0.0))
    throw Error(ErrorCode::NonPositiveDiscriminant,
                "cubic discriminant " + std::to_string(disc) + " <= 0 for d = " + std::to_string(d));
  const auto c = dividend_cubic(p, d, delta);
  const double b2 = c.a2 / c.a3;
  const double b1 = c.a1 / c.a3;
  const double b0 = c.a0 / c.a3;
  const double shift = b2 / 3.0;
  const double pp = b1 - b2 * b2 / 3.0;
  const double qq = 2.0 * b2 * b2 * b2 / 27.0 - b2 * b1 / 3.0 + b0;
  if (!(pp < 0.0))
    throw Error(ErrorCode::NonPositiveDiscriminant, "depressed cubic has no three real roots");
  const double m = 2.0 * std::sqrt(-pp / 3.0);
  const double arg = std::clamp(3.0 * qq / (pp * m), -1.0, 1.0);
  const double theta = std::acos(arg) / 3.0;
  std::vector<double> roots(3);
  for (int k = 0; k < 3; ++k) {
    const double t = m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0);
    roots[k] = detail::polish_root(c, t - shift);
  }
  std::sort(roots.begin(), roots.end());
  return {roots, disc};
}

}  // namespace mlrisk
