// Ruin probability and expected discounted dividends for a two-layer strategy.
#include <cstdio>

#include "mlrisk/mlrisk.hpp"

int main() {
  const mlrisk::ModelParams params{0.1, 2.3, 3.0, 0.2};
  const mlrisk::DividendStrategy strategy{{5.0}, {0.05, 0.1}};
  const double delta = 0.01;

  const auto model = mlrisk::validate_model(params, strategy);
  const auto psi = mlrisk::solve_ruin(model);
  const auto v = mlrisk::solve_dividends(model, delta);

  std::printf("%6s %10s %10s %10s\n", "x", "psi*", "psi", "v");
  for (double x : {0.0, 1.0, 2.0, 5.0, 7.0, 10.0, 15.0, 20.0, 50.0, 70.0})
    std::printf("%6.1f %10.6f %10.6f %10.6f\n", x, mlrisk::no_dividend_ruin(params, x),
                mlrisk::eval_piecewise(psi, x), mlrisk::eval_piecewise(v, x));

  for (std::size_t j = 1; j <= psi.layer_count(); ++j) {
    const auto& f = psi.layer(j);
    std::printf("psi layer %zu on [%g, %g): %g", j, f.anchor, f.upper, f.constant);
    for (std::size_t i = 0; i < f.exponents.size(); ++i)
      std::printf(" %+g exp(%g (x - %g))", f.coefficients[i], f.exponents[i], f.anchor);
    std::printf("\n");
  }
}
