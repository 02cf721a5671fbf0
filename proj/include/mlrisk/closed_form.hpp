#pragma once

// Exponential jump sizes: piecewise exponential solutions for the ruin
// probability psi(x) and the expected discounted dividends v(x).
//
// Every layer function is stored in the scaled basis
//     f_j(x) = sum_i c_{i,j} exp(z_{i,j} (x - b_{j-1})) + K_j,
// anchored at the lower edge of its layer, so that stored numbers stay
// moderate where the raw basis exp(z x) needs constants of order 1e90.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "mlrisk/core_types.hpp"
#include "mlrisk/linalg.hpp"
#include "mlrisk/roots.hpp"

namespace mlrisk {

enum class SolutionKind { ruin, dividends };

inline const char* to_string(SolutionKind k) { return k == SolutionKind::ruin ? "ruin" : "dividends"; }

/// Which boundary condition a row of the linear system encodes.
enum class RowKind {
  boundary_equation,   ///< integro-differential equation at x = b_{j-1}
  initial_value,       ///< psi(0) = 1 or v(0) = 0
  derivative_pasting,  ///< one-sided derivatives at b_j
  continuity,          ///< f_j(b_j) = f_{j+1}(b_j)
};

inline const char* to_string(RowKind k) {
  switch (k) {
    case RowKind::boundary_equation: return "boundary_equation";
    case RowKind::initial_value: return "initial_value";
    case RowKind::derivative_pasting: return "derivative_pasting";
    case RowKind::continuity: return "continuity";
  }
  return "?";
}

struct RowLabel {
  RowKind kind;
  std::size_t layer;  ///< layer j for boundary rows, threshold index j for pasting/continuity
};

/// Unknown coefficient: scaled coefficient of basis exp(exponent (x - b_{layer-1})).
/// `constant` marks the ruin constant C_{3,j} (exponent 0).
struct ColumnLabel {
  std::size_t layer;
  std::size_t index;  ///< 1-based position within the layer
  double exponent;
  bool constant;
};

struct LinearSystem {
  SolutionKind kind;
  DenseMatrix matrix;
  std::vector<double> rhs;
  std::vector<RowLabel> rows;
  std::vector<ColumnLabel> columns;
  std::size_t size() const { return rhs.size(); }
};

/// One layer of a piecewise solution.
struct LayerFunction {
  double anchor = 0.0;  ///< b_{j-1}
  double upper = std::numeric_limits<double>::infinity();
  double rate = 0.0;    ///< dividend rate d_j
  std::vector<double> exponents;
  std::vector<double> coefficients;  ///< scaled coefficients, parallel to exponents
  double constant = 0.0;

  double value(double x) const {
    double s = constant;
    for (std::size_t i = 0; i < exponents.size(); ++i)
      if (coefficients[i] != 0.0) s += coefficients[i] * std::exp(exponents[i] * (x - anchor));
    return s;
  }

  double derivative(double x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < exponents.size(); ++i)
      if (coefficients[i] != 0.0)
        s += coefficients[i] * exponents[i] * std::exp(exponents[i] * (x - anchor));
    return s;
  }

  /// Coefficient in the raw basis exp(z x); may overflow to inf.
  double raw_coefficient(std::size_t i) const {
    return coefficients[i] * std::exp(-exponents[i] * anchor);
  }
};

struct PiecewiseSolution {
  SolutionKind kind = SolutionKind::ruin;
  std::vector<double> thresholds;
  std::vector<LayerFunction> layers;
  double delta = 0.0;  ///< dividend discount rate (dividends only)
  double condition_estimate = 0.0;
  bool near_singular = false;

  std::size_t layer_count() const { return layers.size(); }
  const LayerFunction& layer(std::size_t j) const { return layers.at(j - 1); }
};

enum class Side { left, right };

namespace detail {

/// Layer structure shared by assembly and residual evaluation.
struct IdeSetup {
  SolutionKind kind;
  ModelParams params;
  DividendStrategy strategy;
  double delta;  // 0 for ruin
};

/// Integral over [lo, hi] of exp(g_lo + a (u - lo)); hi may be +inf (requires a < 0).
inline double integrate_exp(double a, double g_lo, double length) {
  if (length <= 0.0) return 0.0;
  if (std::isinf(length)) {
    if (!(a < 0.0)) return std::numeric_limits<double>::infinity();
    return std::exp(g_lo) / (-a);
  }
  if (a == 0.0) return std::exp(g_lo) * length;
  if (a > 0.0) return std::exp(g_lo + a * length) * (-std::expm1(-a * length)) / a;
  return std::exp(g_lo) * (-std::expm1(a * length)) / (-a);
}

/// Pieces of the integro-differential operator applied to a single basis
/// function phi(u) = exp(z (u - anchor)) supported on [lo, hi], at point x
/// in layer j:
///   own:   d_j phi'(x) + (lambda + lambda_bar + delta) phi(x)   (only if phi lives in layer j)
///   lower: (lambda/mu) e^{-x/mu} int_0^x phi(u) e^{u/mu} du
///   upper: (lambda_bar/mu_bar) e^{x/mu_bar} int_x^inf phi(u) e^{-u/mu_bar} du
struct OperatorTerms {
  double derivative = 0.0;
  double level = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double combined() const { return derivative + level - lower - upper; }
};

inline OperatorTerms apply_operator(const IdeSetup& s, std::size_t layer_of_x, double x,
                                    std::size_t basis_layer, double z) {
  const auto& p = s.params;
  const double anchor = s.strategy.lower(basis_layer);
  const double hi = s.strategy.upper(basis_layer);
  OperatorTerms t;
  if (basis_layer == layer_of_x) {
    const double phi = std::exp(z * (x - anchor));
    t.derivative = s.strategy.rate(layer_of_x) * z * phi;
    t.level = (p.total_intensity() + s.delta) * phi;
  }
  // Lower kernel exp(z (u - anchor) + (u - x)/mu) on [anchor, min(hi, x)].
  if (anchor < x) {
    const double top = std::min(hi, x);
    const double a = z + 1.0 / p.mu;
    const double g_lo = (anchor - x) / p.mu;
    t.lower = p.lambda / p.mu * integrate_exp(a, g_lo, top - anchor);
  }
  // Upper kernel exp(z (u - anchor) - (u - x)/mu_bar) on [max(anchor, x), hi].
  if (hi > x) {
    const double bottom = std::max(anchor, x);
    const double a = z - 1.0 / p.mu_bar;
    const double g_lo = z * (bottom - anchor) - (bottom - x) / p.mu_bar;
    t.upper = p.lambda_bar / p.mu_bar * integrate_exp(a, g_lo, hi - bottom);
  }
  return t;
}

/// Source term on the right of the integro-differential equation in layer j.
inline double source_term(const IdeSetup& s, std::size_t j, double x) {
  if (s.kind == SolutionKind::ruin) return s.params.lambda * std::exp(-x / s.params.mu);
  return s.strategy.rate(j);
}

/// Known constant K_j of layer j (dividends: d_j / delta; ruin top layer: 0).
inline double known_constant(const IdeSetup& s, std::size_t j) {
  return s.kind == SolutionKind::dividends ? s.strategy.rate(j) / s.delta : 0.0;
}

inline std::vector<RootSet> layer_roots(const IdeSetup& s) {
  std::vector<RootSet> roots;
  for (std::size_t j = 1; j <= s.strategy.layers(); ++j) {
    if (s.kind == SolutionKind::ruin)
      roots.push_back(ruin_quadratic_roots(s.params, s.strategy.rate(j)));
    else
      roots.push_back(dividend_cubic_roots(s.params, s.strategy.rate(j), s.delta));
  }
  return roots;
}

inline std::vector<ColumnLabel> make_columns(const IdeSetup& s, const std::vector<RootSet>& roots) {
  std::vector<ColumnLabel> cols;
  const std::size_t k = s.strategy.layers();
  for (std::size_t j = 1; j <= k; ++j) {
    const auto& z = roots[j - 1].exponents;
    const bool top = j == k;
    if (s.kind == SolutionKind::ruin) {
      cols.push_back({j, 1, z[1], false});
      cols.push_back({j, 2, z[0], false});
      if (!top) cols.push_back({j, 3, 0.0, true});
    } else {
      if (top) {
        const auto positives = std::count_if(z.begin(), z.end(), [](double v) { return v > 0.0; });
        if (positives != 1 || !(z[1] < 0.0))
          throw Error(ErrorCode::NetProfitViolated,
                      "top-layer cubic must have two negative roots and one positive root");
        cols.push_back({j, 1, z[0], false});
        cols.push_back({j, 2, z[1], false});
      } else {
        for (std::size_t i = 0; i < 3; ++i) cols.push_back({j, i + 1, z[i], false});
      }
    }
  }
  return cols;
}

inline IdeSetup make_setup(SolutionKind kind, const ValidatedModel& model, double delta) {
  if (!model.exponential_jumps())
    throw Error(ErrorCode::UnsupportedDistribution,
                "closed forms require exponential claim and premium sizes; use simulation instead");
  const auto np = check_net_profit(model.params(), model.strategy());
  if (!np.holds)
    throw Error(ErrorCode::NetProfitViolated,
                "net profit condition fails (margin " + std::to_string(np.margin) + ")");
  return {kind, model.params(), model.strategy(), delta};
}

inline LinearSystem assemble(const IdeSetup& s) {
  const auto roots = layer_roots(s);
  LinearSystem sys{s.kind, {}, {}, {}, make_columns(s, roots)};
  const std::size_t k = s.strategy.layers();
  const std::size_t n = sys.columns.size();
  sys.matrix = DenseMatrix(n, n);
  sys.rhs.assign(n, 0.0);
  std::size_t row = 0;

  // Integro-differential equation at the lower edge of every layer.
  for (std::size_t j = 1; j <= k; ++j, ++row) {
    const double x = s.strategy.lower(j);
    for (std::size_t c = 0; c < n; ++c) {
      const auto& col = sys.columns[c];
      sys.matrix(row, c) = apply_operator(s, j, x, col.layer, col.exponent).combined();
    }
    double known = 0.0;
    for (std::size_t l = 1; l <= k; ++l) {
      const double K = known_constant(s, l);
      if (K != 0.0) known += K * apply_operator(s, j, x, l, 0.0).combined();
    }
    sys.rhs[row] = source_term(s, j, x) - known;
    sys.rows.push_back({RowKind::boundary_equation, j});
  }

  // Value at zero.
  for (std::size_t c = 0; c < n; ++c)
    if (sys.columns[c].layer == 1) sys.matrix(row, c) = 1.0;
  const double target = s.kind == SolutionKind::ruin ? 1.0 : 0.0;
  sys.rhs[row] = target - known_constant(s, 1);
  sys.rows.push_back({RowKind::initial_value, 1});
  ++row;

  // Derivative pasting: d_j f_j'(b_j) - d_{j+1} f_{j+1}'(b_j) = s_j(b_j) - s_{j+1}(b_j).
  for (std::size_t j = 1; j < k; ++j, ++row) {
    const double b = s.strategy.upper(j);
    for (std::size_t c = 0; c < n; ++c) {
      const auto& col = sys.columns[c];
      const double z = col.exponent;
      if (col.layer == j)
        sys.matrix(row, c) = s.strategy.rate(j) * z * std::exp(z * (b - s.strategy.lower(j)));
      else if (col.layer == j + 1)
        sys.matrix(row, c) = -s.strategy.rate(j + 1) * z;
    }
    sys.rhs[row] = source_term(s, j, b) - source_term(s, j + 1, b);
    sys.rows.push_back({RowKind::derivative_pasting, j});
  }

  // Continuity: f_j(b_j) = f_{j+1}(b_j).
  for (std::size_t j = 1; j < k; ++j, ++row) {
    const double b = s.strategy.upper(j);
    for (std::size_t c = 0; c < n; ++c) {
      const auto& col = sys.columns[c];
      if (col.layer == j)
        sys.matrix(row, c) = std::exp(col.exponent * (b - s.strategy.lower(j)));
      else if (col.layer == j + 1)
        sys.matrix(row, c) = -1.0;
    }
    sys.rhs[row] = known_constant(s, j + 1) - known_constant(s, j);
    sys.rows.push_back({RowKind::continuity, j});
  }
  return sys;
}

inline PiecewiseSolution build_solution(const IdeSetup& s, const LinearSystem& sys,
                                        const DenseSolution& sol) {
  const auto roots = layer_roots(s);
  PiecewiseSolution out;
  out.kind = s.kind;
  out.thresholds = s.strategy.thresholds;
  out.delta = s.delta;
  out.condition_estimate = sol.condition_estimate;
  out.near_singular = sol.near_singular;
  const std::size_t k = s.strategy.layers();
  for (std::size_t j = 1; j <= k; ++j) {
    LayerFunction f;
    f.anchor = s.strategy.lower(j);
    f.upper = s.strategy.upper(j);
    f.rate = s.strategy.rate(j);
    f.constant = known_constant(s, j);
    if (s.kind == SolutionKind::ruin) {
      f.exponents = {roots[j - 1].exponents[1], roots[j - 1].exponents[0]};
    } else {
      f.exponents = roots[j - 1].exponents;
    }
    f.coefficients.assign(f.exponents.size(), 0.0);
    out.layers.push_back(std::move(f));
  }
  for (std::size_t c = 0; c < sys.columns.size(); ++c) {
    const auto& col = sys.columns[c];
    auto& f = out.layers[col.layer - 1];
    if (col.constant) {
      f.constant = sol.x[c];
    } else {
      const auto it = std::find(f.exponents.begin(), f.exponents.end(), col.exponent);
      f.coefficients[static_cast<std::size_t>(it - f.exponents.begin())] = sol.x[c];
    }
  }
  return out;
}

}  // namespace detail

/// Linear system for the ruin probability: k boundary rows, psi(0) = 1,
/// k-1 pasting rows and k-1 continuity rows (3k-1 unknowns in total).
inline LinearSystem assemble_ruin_system(const ValidatedModel& model) {
  return detail::assemble(detail::make_setup(SolutionKind::ruin, model, 0.0));
}

inline LinearSystem assemble_ruin_system(const ModelParams& params, const DividendStrategy& strategy) {
  return assemble_ruin_system(validate_model(params, strategy));
}

/// Linear system for the expected discounted dividends with discount rate delta.
inline LinearSystem assemble_dividend_system(const ValidatedModel& model, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "dividend discount rate must be positive");
  return detail::assemble(detail::make_setup(SolutionKind::dividends, model, delta));
}

inline LinearSystem assemble_dividend_system(const ModelParams& params, const DividendStrategy& strategy,
                                             double delta) {
  return assemble_dividend_system(validate_model(params, strategy), delta);
}

inline DenseSolution solve_dense(const LinearSystem& system) {
  return solve_dense(system.matrix, system.rhs);
}

inline PiecewiseSolution solve_ruin(const ValidatedModel& model) {
  const auto setup = detail::make_setup(SolutionKind::ruin, model, 0.0);
  const auto sys = detail::assemble(setup);
  return detail::build_solution(setup, sys, solve_dense(sys));
}

inline PiecewiseSolution solve_ruin(const ModelParams& params, const DividendStrategy& strategy) {
  return solve_ruin(validate_model(params, strategy));
}

inline PiecewiseSolution solve_dividends(const ValidatedModel& model, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "dividend discount rate must be positive");
  const auto setup = detail::make_setup(SolutionKind::dividends, model, delta);
  const auto sys = detail::assemble(setup);
  return detail::build_solution(setup, sys, solve_dense(sys));
}

inline PiecewiseSolution solve_dividends(const ModelParams& params, const DividendStrategy& strategy,
                                         double delta) {
  return solve_dividends(validate_model(params, strategy), delta);
}

namespace detail {

inline std::size_t solution_layer(const PiecewiseSolution& s, double x) {
  if (!(x >= 0.0)) throw Error(ErrorCode::NegativeSurplus, "surplus must be non-negative");
  const auto it = std::upper_bound(s.thresholds.begin(), s.thresholds.end(), x);
  return static_cast<std::size_t>(it - s.thresholds.begin()) + 1;
}

}  // namespace detail

/// psi(x) or v(x). At a threshold the upper layer is used (both agree).
inline double eval_piecewise(const PiecewiseSolution& s, double x) {
  return s.layer(detail::solution_layer(s, x)).value(x);
}

/// One-sided derivative; the sides differ only at thresholds.
inline double eval_derivative(const PiecewiseSolution& s, double x, Side side) {
  std::size_t j = detail::solution_layer(s, x);
  if (side == Side::left && j > 1 && x == s.thresholds[j - 2]) --j;
  return s.layer(j).derivative(x);
}

/// Determinant criterion for the two-layer ruin system: it has a unique
/// solution iff this value is non-zero.
inline double two_layer_delta(const ModelParams& p, const DividendStrategy& strategy) {
  if (strategy.layers() != 2 || strategy.thresholds.size() != 1)
    throw Error(ErrorCode::WrongLayerCount, "two_layer_delta needs exactly two layers");
  validate_model(p, strategy);
  if (!check_net_profit(p, strategy).holds)
    throw Error(ErrorCode::NetProfitViolated, "net profit condition fails");
  const double d1 = strategy.rates[0];
  const double d2 = strategy.rates[1];
  const double b = strategy.thresholds[0];
  const auto roots = ruin_quadratic_roots(p, d1);
  const double z1 = roots.exponents[1];  // z_{1,1}: root with + sqrt(D)
  const double z2 = roots.exponents[0];
  const double e_up = std::exp(b / p.mu_bar);
  const double e_down = std::exp(-b / p.mu);
  const double ez1 = std::exp(z1 * b);
  const double ez2 = std::exp(z2 * b);
  const double m1 = p.lambda_bar * p.mu_bar - p.lambda * p.mu - d1;
  const double m2 = p.lambda_bar * p.mu_bar - p.lambda * p.mu - d2;
  const double gap = e_up - e_down;
  const double mix = m1 * e_up - m2;
  const double cross = z2 * ez1 - z1 * ez2;
  const double sum = d1 * p.mu_bar * (z1 - z2) * gap * mix
                   - d1 * p.mu_bar * e_up * (z1 - z2) * m1 * gap
                   + d1 * p.mu * (1.0 - 1.0 / p.mu_bar) * (ez1 - ez2) * mix
                   + (d2 - d1) * (ez1 - ez2) * m1 * gap
                   + d1 * d1 * p.mu * e_up * (p.mu_bar - 1.0) * cross
                   + d1 * p.mu_bar * (d2 - d1) * gap * cross;
  const double mm = p.mu + p.mu_bar;
  return sum / (p.lambda_bar * mm * mm);
}

/// Left minus right side of the integro-differential equation at x, with the
/// sum of absolute term magnitudes for relative comparisons.
struct Residual {
  double value = 0.0;
  double scale = 0.0;
  double relative() const { return scale > 0.0 ? std::abs(value) / scale : std::abs(value); }
};

namespace detail {

inline Residual residual_at(const IdeSetup& s, const PiecewiseSolution& sol, double x) {
  if (!(x >= 0.0)) throw Error(ErrorCode::NegativeSurplus, "surplus must be non-negative");
  for (double b : s.strategy.thresholds)
    if (x == b) throw Error(ErrorCode::ThresholdPoint, "residual is two-valued at a threshold");
  if (sol.layer_count() != s.strategy.layers())
    throw Error(ErrorCode::InvalidArgument, "solution does not match the strategy");
  const std::size_t j = layer_index(s.strategy, x);
  OperatorTerms total;
  auto add = [&](const OperatorTerms& t, double w) {
    total.derivative += w * t.derivative;
    total.level += w * t.level;
    total.lower += w * t.lower;
    total.upper += w * t.upper;
  };
  for (std::size_t l = 1; l <= sol.layer_count(); ++l) {
    const auto& f = sol.layer(l);
    for (std::size_t i = 0; i < f.exponents.size(); ++i)
      if (f.coefficients[i] != 0.0) add(apply_operator(s, j, x, l, f.exponents[i]), f.coefficients[i]);
    if (f.constant != 0.0) add(apply_operator(s, j, x, l, 0.0), f.constant);
  }
  const double src = source_term(s, j, x);
  return {total.combined() - src, std::abs(total.derivative) + std::abs(total.level) +
                                      std::abs(total.lower) + std::abs(total.upper) + std::abs(src)};
}

}  // namespace detail

/// Residual of d_j psi' + (lambda+lambda_bar) psi = (claims integral) + lambda e^{-x/mu}
/// + (premiums integral), with both integrals evaluated in closed form.
inline Residual ruin_residual(const ModelParams& params, const DividendStrategy& strategy,
                              const PiecewiseSolution& solution, double x) {
  if (solution.kind != SolutionKind::ruin)
    throw Error(ErrorCode::InvalidArgument, "ruin_residual needs a ruin solution");
  const auto model = validate_model(params, strategy);
  return detail::residual_at({SolutionKind::ruin, params, model.strategy(), 0.0}, solution, x);
}

/// Residual of d_j v' + (lambda+lambda_bar+delta) v = (integrals) + d_j.
inline Residual dividend_residual(const ModelParams& params, const DividendStrategy& strategy, double delta,
                                  const PiecewiseSolution& solution, double x) {
  if (solution.kind != SolutionKind::dividends)
    throw Error(ErrorCode::InvalidArgument, "dividend_residual needs a dividend solution");
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "dividend discount rate must be positive");
  const auto model = validate_model(params, strategy);
  return detail::residual_at({SolutionKind::dividends, params, model.strategy(), delta}, solution, x);
}

struct ResidualSummary {
  std::size_t points = 0;
  double max_abs = 0.0;
  double median_abs = 0.0;
  double max_relative = 0.0;
  double median_relative = 0.0;
};

/// Default sampling range for residual checks: [0, 10 * max(b_{k-1}, 1)].
inline double residual_sampling_limit(const DividendStrategy& strategy) {
  const double top = strategy.thresholds.empty() ? 1.0 : std::max(strategy.thresholds.back(), 1.0);
  return 10.0 * top;
}

/// Evaluates the residual at `points` uniform random points of [0, limit],
/// resampling any point within 1e-9 of a threshold.
inline ResidualSummary sample_residuals(const ModelParams& params, const DividendStrategy& strategy,
                                        const PiecewiseSolution& solution, std::size_t points,
                                        std::uint64_t seed, double limit = 0.0) {
  if (limit <= 0.0) limit = residual_sampling_limit(strategy);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, limit);
  std::vector<double> abs_values, rel_values;
  while (abs_values.size() < points) {
    const double x = unif(rng);
    bool near = false;
    for (double b : strategy.thresholds) near = near || std::abs(x - b) < 1e-9;
    if (near) continue;
    const Residual r = solution.kind == SolutionKind::ruin
                           ? ruin_residual(params, strategy, solution, x)
                           : dividend_residual(params, strategy, solution.delta, solution, x);
    abs_values.push_back(std::abs(r.value));
    rel_values.push_back(r.relative());
  }
  auto median = [](std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  };
  ResidualSummary out;
  out.points = points;
  out.max_abs = abs_values.empty() ? 0.0 : *std::max_element(abs_values.begin(), abs_values.end());
  out.max_relative = rel_values.empty() ? 0.0 : *std::max_element(rel_values.begin(), rel_values.end());
  out.median_abs = median(abs_values);
  out.median_relative = median(rel_values);
  return out;
}

}  // namespace mlrisk
