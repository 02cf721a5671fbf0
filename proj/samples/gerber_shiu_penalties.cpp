// Gerber-Shiu functionals with built-in and custom penalties, gamma claim sizes.
#include <cmath>
#include <cstdio>

#include "mlrisk/mlrisk.hpp"

int main() {
  const mlrisk::ModelParams params{0.1, 2.3, 3.0, 0.2};
  const mlrisk::DividendStrategy strategy{{5.0}, {0.05, 0.1}};
  const auto model = mlrisk::validate_model(params, strategy, mlrisk::JumpDistribution::gamma(2.0, 1.5));

  mlrisk::SimulationSettings settings;
  settings.horizon = 3000.0;
  const double x0 = 5.0;
  const std::uint64_t paths = 20000;

  const auto penalties = {
      std::pair{"one", mlrisk::PenaltyFunction::constant_one()},
      std::pair{"deficit > 1", mlrisk::PenaltyFunction::deficit_indicator(1.0)},
      std::pair{"deficit^2", mlrisk::PenaltyFunction::deficit_power(2.0)},
      std::pair{"min(prior, 1)",
                mlrisk::PenaltyFunction::custom([](double prior, double) { return std::min(prior, 1.0); })},
  };
  for (const auto& [name, w] : penalties)
    for (double delta0 : {0.0, 0.05}) {
      const auto e = mlrisk::estimate_gerber_shiu(model, x0, w, delta0, paths, settings, 7);
      std::printf("%-14s delta0=%.2f  %.6f +- %.6f\n", name, delta0, e.mean, e.std_error);
    }
}
