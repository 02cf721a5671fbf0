#pragma once

#include <cmath>
#include <cstdint>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

namespace mlrisk::detail {

template <class Urbg>
double unit_uniform(Urbg& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Exponential with the given rate (ziggurat).
template <class Urbg>
double exponential_variate(Urbg& rng, double rate) {
  return boost::random::exponential_distribution<double>(rate)(rng);
}

template <class Urbg>
std::int64_t poisson_variate(Urbg& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  return boost::random::poisson_distribution<std::int64_t, double>(mean)(rng);
}

/// Gamma(shape, 1) by Marsaglia and Tsang; shape < 1 is boosted to shape + 1.
template <class Urbg>
double standard_gamma_variate(Urbg& rng, double shape) {
  if (shape < 1.0) {
    const double u = unit_uniform(rng);
    return standard_gamma_variate(rng, shape + 1.0) * std::pow(1.0 - u, 1.0 / shape);
  }
  boost::random::normal_distribution<double> normal;
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = normal(rng);
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = 1.0 - unit_uniform(rng);
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace mlrisk::detail
