#pragma once

// Exact-event Monte Carlo of the surplus process with stochastic premiums and
// a multi-layer dividend strategy.
//
// The claim clock drives the loop. Premiums arriving before the next claim
// are generated one by one, except when the surplus sits in the top layer and
// cannot leave it before the claim even without premiums; then the premium
// count is Poisson and their sum is drawn in a single step. Both routes have
// the same law. Between jumps the surplus drains linearly through the layers
// and dividends are discounted in closed form per linear segment.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "mlrisk/core_types.hpp"
#include "mlrisk/rng.hpp"

namespace mlrisk {

/// Time a_i(x) at which the pure drain started from x reaches the lower edge
/// b_{i-1} of layer i.
struct CrossingTime {
  std::size_t layer;
  double time;
  friend bool operator==(const CrossingTime&, const CrossingTime&) = default;
};

/// a_j(x), a_{j-1}(x), ..., a_1(x) for x in layer j; the last entry is the
/// time the drain reaches 0.
inline std::vector<CrossingTime> drain_schedule(const DividendStrategy& strategy, double x) {
  std::size_t j = layer_index(strategy, x);
  std::vector<CrossingTime> out;
  double t = (x - strategy.lower(j)) / strategy.rate(j);
  out.push_back({j, t});
  while (j > 1) {
    --j;
    t += (strategy.upper(j) - strategy.lower(j)) / strategy.rate(j);
    out.push_back({j, t});
  }
  return out;
}

struct SimulationSettings {
  double delta = 0.0;       ///< dividend discount rate (0 = undiscounted)
  double horizon = 3000.0;  ///< paths still alive at this time are censored
  bool dividends = true;    ///< false simulates the same model without dividend drain
  unsigned workers = 1;
};

struct PathOutcome {
  bool ruined = false;
  bool censored = false;
  bool drained = false;  ///< ruin by dividend drain reaching zero
  double ruin_time = std::numeric_limits<double>::infinity();
  double surplus_prior = 0.0;
  double deficit = 0.0;
  double discounted_dividends = 0.0;
};

namespace detail {

inline double exponential_draw(RngStream& rng, double rate) { return exponential_variate(rng, rate); }

/// Present value at time 0 of rate d paid over [start, start + length].
inline double discounted_flow(double d, double start, double length, double delta) {
  if (length <= 0.0) return 0.0;
  if (delta == 0.0) return d * length;
  return d * std::exp(-delta * start) * (-std::expm1(-delta * length)) / delta;
}

struct DrainStep {
  double surplus;
  double dividends;
  bool ruined;
  double ruin_offset;
};

/// Deterministic drain from x over `duration`, stopping if the surplus hits 0.
inline DrainStep drain(const DividendStrategy& s, double x, double start, double duration, double delta) {
  std::size_t j = layer_index(s, x);
  double elapsed = 0.0;
  double pv = 0.0;
  for (;;) {
    const double d = s.rate(j);
    const double floor = s.lower(j);
    const double seg = (x - floor) / d;
    const double rem = duration - elapsed;
    if (rem < seg) {
      pv += discounted_flow(d, start + elapsed, rem, delta);
      return {std::max(x - d * rem, floor), pv, false, 0.0};
    }
    pv += discounted_flow(d, start + elapsed, seg, delta);
    elapsed += seg;
    x = floor;
    if (j == 1) return {0.0, pv, true, elapsed};
    --j;
  }
}

}  // namespace detail

/// Simulates one path started at x0 until ruin or the horizon.
inline PathOutcome simulate_path(const ValidatedModel& model, double x0, const SimulationSettings& settings,
                                 RngStream& rng) {
  if (!(x0 >= 0.0)) throw Error(ErrorCode::NegativeSurplus, "initial surplus must be non-negative");
  const auto& p = model.params();
  const auto& s = model.strategy();
  const bool active = settings.dividends;
  const double horizon = settings.horizon;
  const double delta = settings.delta;
  const std::size_t k = s.layers();
  const double top_floor = s.lower(k);
  const double top_rate = s.rate(k);

  PathOutcome out;
  auto ruin = [&](double when, double prior, double deficit, bool drained) {
    out.ruined = true;
    out.drained = drained;
    out.ruin_time = when;
    out.surplus_prior = prior;
    out.deficit = deficit;
    return out;
  };
  if (active && x0 == 0.0) return ruin(0.0, 0.0, 0.0, true);

  double t = 0.0;
  double x = x0;
  for (;;) {
    const double t_claim = t + detail::exponential_draw(rng, p.lambda);
    const double end = std::min(t_claim, horizon);
    const double span = end - t;
    if (!active || (x >= top_floor && x - top_rate * span >= top_floor)) {
      if (span > 0.0) {
        const std::int64_t n = detail::poisson_variate(rng, p.lambda_bar * span);
        if (active) {
          out.discounted_dividends += detail::discounted_flow(top_rate, t, span, delta);
          x -= top_rate * span;
        }
        x += model.premiums().sample_sum(n, rng);
      }
      t = end;
    } else {
      for (;;) {
        const double gap = detail::exponential_draw(rng, p.lambda_bar);
        const bool premium_first = t + gap < end;
        const auto step = detail::drain(s, x, t, premium_first ? gap : end - t, delta);
        out.discounted_dividends += step.dividends;
        if (step.ruined) return ruin(t + step.ruin_offset, 0.0, 0.0, true);
        if (!premium_first) {
          x = step.surplus;
          t = end;
          break;
        }
        x = step.surplus + model.premiums().sample(rng);
        t += gap;
      }
    }
    if (t_claim > horizon) {
      out.censored = true;
      return out;
    }
    const double y = model.claims().sample(rng);
    if (y > x) return ruin(t, x, y - x, false);
    x -= y;
  }
}

/// Monte Carlo estimate with its provenance.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  double ci95_low = 0.0;
  double ci95_high = 0.0;
  std::uint64_t n_paths = 0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  double censored_fraction = 0.0;
  double tail_bound = 0.0;  ///< bound on the bias from truncating at the horizon, if known
  std::string generator = generator_name;
};

inline constexpr double z95 = 1.959964;

/// Streaming mean/variance (Welford), mergeable in a fixed order.
class MeanAccumulator {
 public:
  void add(double v) {
    ++n_;
    const double d = v - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (v - mean_);
  }

  void merge(const MeanAccumulator& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    const double n = static_cast<double>(n_ + o.n_);
    const double d = o.mean_ - mean_;
    mean_ += d * static_cast<double>(o.n_) / n;
    m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
    n_ += o.n_;
  }

  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double sample_variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

  Estimate estimate(double horizon, std::uint64_t seed) const {
    Estimate e;
    e.mean = mean_;
    e.std_error = n_ > 0 ? std::sqrt(sample_variance() / static_cast<double>(n_)) : 0.0;
    e.ci95_low = e.mean - z95 * e.std_error;
    e.ci95_high = e.mean + z95 * e.std_error;
    e.n_paths = n_;
    e.horizon = horizon;
    e.seed = seed;
    return e;
  }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

namespace detail {

inline constexpr std::uint64_t block_size = 2048;

/// Runs `fn(stream)` for paths 0..n-1 with stream i keyed by (seed, i). Paths
/// are grouped in fixed blocks reduced in path order, and blocks are merged
/// in block order, so the result does not depend on the worker count.
template <std::size_t N, class Fn>
std::array<MeanAccumulator, N> run_paths(std::uint64_t n_paths, std::uint64_t seed, unsigned workers, Fn fn) {
  const std::uint64_t blocks = (n_paths + block_size - 1) / block_size;
  std::vector<std::array<MeanAccumulator, N>> partial(blocks);
  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    for (std::uint64_t b = next++; b < blocks; b = next++) {
      const std::uint64_t lo = b * block_size;
      const std::uint64_t hi = std::min(n_paths, lo + block_size);
      for (std::uint64_t i = lo; i < hi; ++i) {
        RngStream rng(seed, i);
        const std::array<double, N> v = fn(rng);
        for (std::size_t q = 0; q < N; ++q) partial[b][q].add(v[q]);
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(blocks)));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  std::array<MeanAccumulator, N> total{};
  for (const auto& block : partial)
    for (std::size_t q = 0; q < N; ++q) total[q].merge(block[q]);
  return total;
}

inline void check_run(double x0, std::uint64_t n_paths, const SimulationSettings& settings) {
  if (!(x0 >= 0.0)) throw Error(ErrorCode::NegativeSurplus, "initial surplus must be non-negative");
  if (n_paths == 0) throw Error(ErrorCode::InvalidArgument, "n_paths must be at least 1");
  if (!(settings.horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  if (!(settings.delta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be non-negative");
}

}  // namespace detail

/// Ruin probability, discounted dividends and a Gerber-Shiu functional, all
/// estimated from one set of paths.
struct PathFunctionals {
  Estimate ruin;
  Estimate dividends;
  Estimate gerber_shiu;
  double censored_fraction = 0.0;
};

/// The penalty is evaluated concurrently when settings.workers > 1.
inline PathFunctionals estimate_path_functionals(const ValidatedModel& model, double x0,
                                                 const SimulationSettings& settings, std::uint64_t n_paths,
                                                 std::uint64_t seed,
                                                 const PenaltyFunction& penalty = PenaltyFunction::constant_one(),
                                                 double delta0 = 0.0) {
  detail::check_run(x0, n_paths, settings);
  if (!(delta0 >= 0.0)) throw Error(ErrorCode::InvalidArgument, "delta0 must be non-negative");
  const auto acc = detail::run_paths<4>(n_paths, seed, settings.workers, [&](RngStream& rng) {
    const PathOutcome o = simulate_path(model, x0, settings, rng);
    double gs = 0.0;
    if (o.ruined) {
      const double discount = delta0 == 0.0 ? 1.0 : std::exp(-delta0 * o.ruin_time);
      gs = discount * penalty(o.surplus_prior, o.deficit);
    }
    return std::array<double, 4>{o.ruined ? 1.0 : 0.0, o.discounted_dividends, gs, o.censored ? 1.0 : 0.0};
  });
  PathFunctionals out;
  out.censored_fraction = acc[3].mean();
  out.ruin = acc[0].estimate(settings.horizon, seed);
  out.dividends = acc[1].estimate(settings.horizon, seed);
  out.gerber_shiu = acc[2].estimate(settings.horizon, seed);
  for (Estimate* e : {&out.ruin, &out.dividends, &out.gerber_shiu}) e->censored_fraction = out.censored_fraction;
  if (settings.dividends && settings.delta > 0.0)
    out.dividends.tail_bound =
        model.strategy().max_rate() * std::exp(-settings.delta * settings.horizon) / settings.delta;
  else if (settings.dividends)
    out.dividends.tail_bound = std::numeric_limits<double>::infinity();
  out.ruin.tail_bound = std::numeric_limits<double>::quiet_NaN();
  out.gerber_shiu.tail_bound = std::numeric_limits<double>::quiet_NaN();
  return out;
}

/// Mean ruin indicator; censored paths count as survivals.
inline Estimate estimate_ruin(const ValidatedModel& model, double x0, std::uint64_t n_paths,
                              const SimulationSettings& settings, std::uint64_t seed) {
  return estimate_path_functionals(model, x0, settings, n_paths, seed).ruin;
}

inline Estimate estimate_dividends(const ValidatedModel& model, double x0, std::uint64_t n_paths,
                                   const SimulationSettings& settings, std::uint64_t seed) {
  if (!(settings.delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "dividend discount rate must be positive");
  return estimate_path_functionals(model, x0, settings, n_paths, seed).dividends;
}

/// Mean of exp(-delta0 tau) w(X_{tau-}, |X_tau|) over ruined paths (0 otherwise).
inline Estimate estimate_gerber_shiu(const ValidatedModel& model, double x0, const PenaltyFunction& penalty,
                                     double delta0, std::uint64_t n_paths, const SimulationSettings& settings,
                                     std::uint64_t seed) {
  return estimate_path_functionals(model, x0, settings, n_paths, seed, penalty, delta0).gerber_shiu;
}

/// Expected discounted dividends paid before the first jump:
/// sum_i d_i/(lambda+lambda_bar+delta) (e^{-r a_{i+1}} - e^{-r a_i}) with a_{j+1} = 0.
inline double first_jump_dividends(const ModelParams& params, const DividendStrategy& strategy, double x,
                                   double delta) {
  const double r = params.total_intensity() + delta;
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda + lambda_bar + delta must be positive");
  double previous = 0.0;
  double sum = 0.0;
  for (const auto& [layer, time] : drain_schedule(strategy, x)) {
    sum += strategy.rate(layer) / r * (std::exp(-r * previous) - std::exp(-r * time));
    previous = time;
  }
  return sum;
}

/// Discounted dividends of one path up to its first jump (or drain ruin).
inline double simulate_first_event_dividends(const ValidatedModel& model, double x, double delta, RngStream& rng) {
  const double first = detail::exponential_draw(rng, model.params().total_intensity());
  if (x == 0.0) return 0.0;
  return detail::drain(model.strategy(), x, 0.0, first, delta).dividends;
}

inline Estimate estimate_first_event_dividends(const ValidatedModel& model, double x, double delta,
                                               std::uint64_t n_paths, std::uint64_t seed, unsigned workers = 1) {
  detail::check_run(x, n_paths, {delta, 1.0, true, workers});
  const auto acc = detail::run_paths<1>(n_paths, seed, workers, [&](RngStream& rng) {
    return std::array<double, 1>{simulate_first_event_dividends(model, x, delta, rng)};
  });
  return acc[0].estimate(std::numeric_limits<double>::infinity(), seed);
}

}  // namespace mlrisk
