// Compares simulated ruin probabilities and dividend values with the closed forms.
#include <cstdio>
#include <cstdlib>

#include "mlrisk/mlrisk.hpp"

int main(int argc, char** argv) {
  const std::uint64_t paths = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 20000;
  const mlrisk::ModelParams params{0.1, 2.3, 3.0, 0.2};
  const mlrisk::DividendStrategy strategy{{3.0, 7.0}, {0.03, 0.05, 0.08}};
  const auto model = mlrisk::validate_model(params, strategy);
  const auto psi = mlrisk::solve_ruin(model);
  const auto v = mlrisk::solve_dividends(model, 0.01);

  mlrisk::SimulationSettings settings;
  settings.delta = 0.01;
  settings.horizon = 3000.0;
  for (double x : {1.0, 5.0, 10.0}) {
    const auto est = mlrisk::estimate_path_functionals(model, x, settings, paths, 2024);
    std::printf("x=%4.1f  psi %.6f  mc %.6f +- %.6f   v %.6f  mc %.6f +- %.6f\n", x, mlrisk::eval_piecewise(psi, x),
                est.ruin.mean, est.ruin.std_error, mlrisk::eval_piecewise(v, x), est.dividends.mean,
                est.dividends.std_error);
  }
}
