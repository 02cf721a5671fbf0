// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mlrisk/cli.hpp"
#include "reference_tables.hpp"

using namespace mlrisk;

namespace {

const ModelParams base{0.1, 2.3, 3.0, 0.2};
const double delta = 0.01;
const DividendStrategy table1{{5}, {0.05, 0.1}};
const DividendStrategy table2{{5}, {0.1, 0.05}};
const DividendStrategy three{{3, 7}, {0.03, 0.05, 0.08}};
const std::string config_dir = MLRISK_CONFIG_DIR;

struct Scenario {
  const char* name;
  DividendStrategy strategy;
};
const Scenario scenarios[] = {{"table1", table1}, {"table2", table2}, {"three_layer", three}};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string cli_output(std::vector<std::string> args, int& code) {
  args.insert(args.begin(), "mlrisk");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return out.str();
}

std::vector<std::vector<double>> table_cells(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

template <class Table>
void table_criterion(int id, const char* config, const Table& ref) {
  const auto t0 = std::chrono::steady_clock::now();
  int code = 0;
  const auto rows = table_cells(cli_output({"table", "--config", config_dir + "/" + config}, code));
  const double elapsed = seconds_since(t0);
  double worst = code == 0 && rows.size() == ref.size() ? 0.0 : INFINITY;
  for (std::size_t i = 0; std::isfinite(worst) && i < ref.size(); ++i) {
    if (rows[i].size() != 4 || rows[i][0] != ref[i].x) {
      worst = INFINITY;
      break;
    }
    worst = std::max({worst, std::abs(rows[i][1] - ref[i].psi_star), std::abs(rows[i][2] - ref[i].psi),
                      std::abs(rows[i][3] - ref[i].v)});
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "30 cells, max abs error %.2e (limit 1e-4), %.3f s (limit 1 s)", worst, elapsed);
  report(id, worst <= 1e-4 && elapsed < 1.0, buf);
}

void roots_criterion() {
  const auto r05 = ruin_quadratic_roots(base, 0.05).exponents;
  const auto r10 = ruin_quadratic_roots(base, 0.1).exponents;
  const auto c05 = dividend_cubic_roots(base, 0.05, delta).exponents;
  const auto c10 = dividend_cubic_roots(base, 0.1, delta).exponents;
  const std::vector<std::pair<double, double>> pairs{
      {r05[1], -0.084781},  {r05[0], -43.248552}, {r10[1], -0.051863},  {r10[0], -19.28147},
      {c05[0], -43.470279}, {c05[1], -0.124597},  {c05[2], 0.061543},   {c10[0], -19.405407},
      {c10[1], -0.107684},  {c10[2], 0.079758}};
  double worst = 0.0;
  for (const auto& [got, want] : pairs) worst = std::max(worst, std::abs(got - want));
  char buf[120];
  std::snprintf(buf, sizeof buf, "10 exponents, max abs error %.2e (limit 1e-5)", worst);
  report(3, worst <= 1e-5, buf);
}

void no_dividend_criterion() {
  const auto [coefficient, decay] = no_dividend_ruin_form(base);
  double worst = std::max(std::abs(coefficient - 0.666667), std::abs(decay - 0.111111));
  for (const auto& row : reference::table1) worst = std::max(worst, std::abs(no_dividend_ruin(base, row.x) - row.psi_star));
  char buf[120];
  std::snprintf(buf, sizeof buf, "coefficient %.6f, rate %.6f, max abs error %.2e (limit 1e-6)", coefficient, decay,
                worst);
  report(4, worst <= 1e-6, buf);
}

void monte_carlo_criterion() {
  const double xs[] = {0, 1, 5, 10, 20};
  const std::uint64_t n = 400000;
  SimulationSettings settings;
  settings.delta = delta;
  settings.horizon = 3000.0;
  settings.workers = 1;
  bool pass = true;
  std::string detail;
  for (const auto& sc : scenarios) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto model = validate_model(base, sc.strategy);
    const auto psi = solve_ruin(model);
    const auto v = solve_dividends(model, delta);
    double worst_z = 0.0;
    for (double x : xs) {
      const auto f = estimate_path_functionals(model, x, settings, n, 42);
      auto z = [](const Estimate& e, double exact) {
        const double diff = e.mean - exact;
        if (e.std_error == 0.0) return std::abs(diff) <= 1e-12 ? 0.0 : INFINITY;
        return diff / e.std_error;
      };
      for (double zi : {z(f.ruin, eval_piecewise(psi, x)), z(f.dividends, eval_piecewise(v, x))})
        if (std::abs(zi) > std::abs(worst_z)) worst_z = zi;
    }
    const double elapsed = seconds_since(t0);
    const bool ok = std::abs(worst_z) < 3.0 && elapsed < 60.0;
    pass = pass && ok;
    char buf[120];
    std::snprintf(buf, sizeof buf, "%s%s worst z %+.2f in %.1f s", detail.empty() ? "" : "; ", sc.name, worst_z,
                  elapsed);
    detail += buf;
  }
  report(5, pass, detail + " (limits |z| < 3, 60 s per scenario)");
}

void residual_criterion() {
  double worst = 0.0;
  for (const auto& sc : scenarios) {
    const auto psi = solve_ruin(base, sc.strategy);
    const auto v = solve_dividends(base, sc.strategy, delta);
    worst = std::max(worst, sample_residuals(base, sc.strategy, psi, 100, 42).max_relative);
    worst = std::max(worst, sample_residuals(base, sc.strategy, v, 100, 42).max_relative);
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "max relative residual %.2e over 3 scenarios (limit 1e-8)", worst);
  report(6, worst < 1e-8, buf);
}

double relative_gap(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

void structure_criterion() {
  double joint = 0.0, boundary = 0.0;
  bool limits = true;
  for (const auto& sc : scenarios) {
    const auto& st = sc.strategy;
    const auto psi = solve_ruin(base, st);
    const auto v = solve_dividends(base, st, delta);
    for (std::size_t j = 1; j < st.layers(); ++j) {
      const double b = st.thresholds[j - 1];
      for (const auto* s : {&psi, &v}) {
        const bool div = s == &v;
        joint = std::max(joint, relative_gap(s->layer(j).value(b), s->layer(j + 1).value(b)));
        const double lhs = st.rate(j) * eval_derivative(*s, b, Side::left) - (div ? st.rate(j) : 0.0);
        const double rhs = st.rate(j + 1) * eval_derivative(*s, b, Side::right) - (div ? st.rate(j + 1) : 0.0);
        joint = std::max(joint, relative_gap(lhs, rhs));
      }
    }
    boundary = std::max({boundary, std::abs(eval_piecewise(psi, 0.0) - 1.0), std::abs(eval_piecewise(v, 0.0))});
    const double top = st.thresholds.back(), far = 10.0 * top, cap = st.rates.back() / delta;
    limits = limits && eval_piecewise(psi, far) < eval_piecewise(psi, top) &&
             std::abs(eval_piecewise(v, far) - cap) < std::abs(eval_piecewise(v, top) - cap);
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "joints %.2e (limit 1e-8), boundary %.2e (limit 1e-10), limits %s", joint, boundary,
                limits ? "directional" : "violated");
  report(7, joint <= 1e-8 && boundary <= 1e-10 && limits, buf);
}

void delta_criterion() {
  bool pass = true;
  for (const auto& s : {table1, table2}) {
    const double d = two_layer_delta(base, s);
    const auto sol = solve_dense(assemble_ruin_system(base, s));
    pass = pass && std::isfinite(d) && d != 0.0 && std::isfinite(sol.condition_estimate);
  }
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int agreed = 0, tried = 0;
  while (tried < 50) {
    const ModelParams p{std::pow(10.0, u(rng)), std::pow(10.0, u(rng)), std::pow(10.0, u(rng)),
                        std::pow(10.0, u(rng))};
    const double room = p.lambda_bar * p.mu_bar - p.lambda * p.mu;
    if (room <= 0.0) continue;
    std::uniform_real_distribution<double> rate(0.01 * room, 0.99 * room);
    const DividendStrategy s{{std::pow(10.0, u(rng) + 0.5)}, {rate(rng), rate(rng)}};
    ++tried;
    const double d = two_layer_delta(p, s);
    bool solvable = false;
    try {
      const auto sol = solve_dense(assemble_ruin_system(p, s));
      solvable = std::isfinite(sol.condition_estimate);
    } catch (const Error&) {
    }
    if ((std::isfinite(d) && d != 0.0) == solvable) ++agreed;
  }
  report(8, pass && agreed == 50,
         "nonzero for both tables; agreement on " + std::to_string(agreed) + "/50 random instances");
}

void first_jump_criterion() {
  const auto model = validate_model(base, table1);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 12.0);
  double worst_z = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double x = u(rng);
    const auto e = estimate_first_event_dividends(model, x, delta, 1000000, 500 + i);
    const double z = (e.mean - first_jump_dividends(base, table1, x, delta)) / e.std_error;
    if (std::abs(z) > std::abs(worst_z)) worst_z = z;
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "10 starting surpluses, worst z %+.2f (limit 3)", worst_z);
  report(9, std::abs(worst_z) < 3.0, buf);
}

void determinism_criterion() {
  const std::vector<std::string> args{"simulate", "--config", config_dir + "/three_layer.ini", "--paths", "20000",
                                      "--horizon", "1000"};
  std::vector<std::string> outputs;
  bool ok = true;
  for (const char* workers : {"1", "1", "4"}) {
    auto a = args;
    a.insert(a.end(), {"--workers", workers});
    int code = 0;
    outputs.push_back(cli_output(a, code));
    ok = ok && code == 0;
  }
  const bool same = ok && outputs[0] == outputs[1] && outputs[0] == outputs[2] && !outputs[0].empty();
  report(10, same, same ? "byte-identical output for repeated runs and 1 vs 4 workers" : "outputs differ");
}

void gerber_shiu_criterion() {
  const auto model = validate_model(base, table1);
  SimulationSettings st;
  st.horizon = 3000.0;
  bool reduces = true, discounted = true, bounded = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (double x : {1.0, 5.0}) {
      const auto ruin = estimate_ruin(model, x, 20000, st, seed);
      const auto plain = estimate_gerber_shiu(model, x, PenaltyFunction::constant_one(), 0.0, 20000, st, seed);
      const auto disc = estimate_gerber_shiu(model, x, PenaltyFunction::constant_one(), 0.05, 20000, st, seed);
      const auto ind = estimate_gerber_shiu(model, x, PenaltyFunction::deficit_indicator(1.0), 0.0, 20000, st, seed);
      reduces = reduces && plain.mean == ruin.mean && plain.std_error == ruin.std_error;
      if (ruin.mean > 0.0) discounted = discounted && disc.mean < plain.mean;
      bounded = bounded && ind.mean <= ruin.mean && ind.mean >= 0.0;
    }
  }
  report(11, reduces && discounted && bounded,
         std::string("reduction ") + (reduces ? "exact" : "differs") + ", discounting " +
             (discounted ? "strictly lower" : "not lower") + ", indicator " + (bounded ? "bounded" : "exceeds ruin"));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> checks{
      [] { table_criterion(1, "table1.ini", reference::table1); },
      [] { table_criterion(2, "table2.ini", reference::table2); },
      roots_criterion,
      no_dividend_criterion,
      monte_carlo_criterion,
      residual_criterion,
      structure_criterion,
      delta_criterion,
      first_jump_criterion,
      determinism_criterion,
      gerber_shiu_criterion,
  };
  for (std::size_t i = 0; i < checks.size(); ++i) {
    try {
      checks[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), false, std::string("exception: ") + e.what());
    }
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(checks.size()) - failures, checks.size());
  return failures == 0 ? 0 : 1;
}
