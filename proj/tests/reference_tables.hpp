#pragma once

// Reference values for lambda = 0.1, lambda_bar = 2.3, mu = 3, mu_bar = 0.2, b = (5), delta = 0.01.

#include <array>

namespace reference {

struct Row {
  double x, psi_star, psi, v;
};

// d = (0.05, 0.1)
inline constexpr std::array<Row, 10> table1{{
    {0, 0.666667, 1, 0},
    {1, 0.596560, 0.777184, 3.663273},
    {2, 0.533825, 0.737542, 4.283457},
    {5, 0.382502, 0.636926, 5.911685},
    {7, 0.306284, 0.575029, 6.716708},
    {10, 0.219462, 0.492173, 7.623108},
    {15, 0.125917, 0.379750, 8.612682},
    {20, 0.072245, 0.293007, 9.190265},
    {50, 0.002577, 0.061825, 9.967986},
    {70, 0.000279, 0.021912, 9.996285},
}};

// d = (0.1, 0.05)
inline constexpr std::array<Row, 10> table2{{
    {0, 0.666667, 1, 0},
    {1, 0.596560, 0.721066, 2.611525},
    {2, 0.533825, 0.663275, 2.930525},
    {5, 0.382502, 0.506845, 3.490686},
    {7, 0.306284, 0.426750, 3.805635},
    {10, 0.219462, 0.330912, 4.178134},
    {15, 0.125917, 0.216577, 4.559200},
    {20, 0.072245, 0.141747, 4.763582},
    {50, 0.002577, 0.011141, 4.994372},
    {70, 0.000279, 0.002044, 4.999534},
}};

}  // namespace reference
