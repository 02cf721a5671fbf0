#pragma once

// mlrisk command line: solve, simulate, table and residual.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mlrisk/closed_form.hpp"
#include "mlrisk/config.hpp"
#include "mlrisk/simulation.hpp"

namespace mlrisk {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int internal = 1;
inline constexpr int config = 2;
inline constexpr int net_profit = 3;
inline constexpr int singular = 4;
inline constexpr int discriminant = 5;
inline constexpr int residual = 6;
}  // namespace exit_code

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NetProfitViolated: return exit_code::net_profit;
    case ErrorCode::SingularMatrix:
    case ErrorCode::NearSingular: return exit_code::singular;
    case ErrorCode::NonPositiveDiscriminant: return exit_code::discriminant;
    case ErrorCode::NonPositiveParameter:
    case ErrorCode::UnorderedThresholds:
    case ErrorCode::EmptyRates:
    case ErrorCode::RateCountMismatch:
    case ErrorCode::DistributionMismatch:
    case ErrorCode::UnsupportedDistribution:
    case ErrorCode::NegativeSurplus:
    case ErrorCode::WrongLayerCount:
    case ErrorCode::ThresholdPoint:
    case ErrorCode::InvalidArgument:
    case ErrorCode::ConfigError: return exit_code::config;
  }
  return exit_code::internal;
}

namespace cli_detail {

using nlohmann::json;
using detail::format_double;

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json parameters_record(const RunConfig& c) {
  json j;
  j["model"] = {{"lambda", c.model.lambda},
                {"lambda_bar", c.model.lambda_bar},
                {"mu", c.model.mu},
                {"mu_bar", c.model.mu_bar},
                {"claim_distribution", c.claim_distribution},
                {"claim_shape", c.claim_shape},
                {"premium_distribution", c.premium_distribution},
                {"premium_shape", c.premium_shape}};
  j["strategy"] = {{"thresholds", c.strategy.thresholds}, {"rates", c.strategy.rates}};
  j["discount"] = {{"delta0", c.delta0}, {"delta", c.delta ? json(*c.delta) : json(nullptr)}};
  j["penalty"] = {{"kind", c.penalty}, {"threshold", c.penalty_threshold}, {"exponent", c.penalty_exponent}};
  return j;
}

inline std::filesystem::path plot_path(const std::string& out) {
  std::filesystem::path p(out);
  p.replace_extension();
  p += ".plot.csv";
  return p;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::ConfigError, "cannot open output file '" + path + "'");
  f << text;
  if (!f) throw Error(ErrorCode::ConfigError, "cannot write output file '" + path + "'");
}

inline void emit(const RunConfig& c, const std::string& text, std::ostream& out) {
  if (c.out.empty())
    out << text;
  else
    write_text(c.out, text);
}

inline ValidatedModel closed_form_model(const RunConfig& c) {
  const auto model = make_model(c);
  if (!model.exponential_jumps())
    throw Error(ErrorCode::UnsupportedDistribution,
                "closed forms need exponential claims and premiums; use the 'simulate' command for other "
                "distributions");
  return model;
}

inline double require_delta(const RunConfig& c, const char* what) {
  if (!c.delta) throw Error(ErrorCode::ConfigError, std::string("discount.delta is required for ") + what);
  return *c.delta;
}

struct Outcome {
  std::string text;
  int code = exit_code::ok;
  std::string warning;
};

inline void flag_near_singular(const PiecewiseSolution& s, Outcome& o) {
  if (!s.near_singular) return;
  o.code = exit_code::singular;
  o.warning += std::string("warning: NearSingular: ") + to_string(s.kind) + " system condition estimate " +
               format_double(s.condition_estimate) + "\n";
}

inline Outcome cmd_solve(const RunConfig& c) {
  const auto model = closed_form_model(c);
  std::vector<PiecewiseSolution> sols{solve_ruin(model)};
  if (c.delta) sols.push_back(solve_dividends(model, *c.delta));
  Outcome o;
  for (const auto& s : sols) flag_near_singular(s, o);

  if (c.format == OutputFormat::record) {
    json doc;
    doc["command"] = "solve";
    doc["parameters"] = parameters_record(c);
    doc["solutions"] = json::array();
    for (const auto& s : sols) {
      json js;
      js["kind"] = to_string(s.kind);
      js["condition_estimate"] = s.condition_estimate;
      js["near_singular"] = s.near_singular;
      js["layers"] = json::array();
      for (std::size_t j = 1; j <= s.layer_count(); ++j) {
        const auto& f = s.layer(j);
        json raw = json::array();
        for (std::size_t i = 0; i < f.exponents.size(); ++i) raw.push_back(number_or_null(f.raw_coefficient(i)));
        js["layers"].push_back({{"layer", j},
                                {"anchor", f.anchor},
                                {"upper", number_or_null(f.upper)},
                                {"rate", f.rate},
                                {"exponents", f.exponents},
                                {"scaled_coefficients", f.coefficients},
                                {"raw_coefficients", raw},
                                {"constant", f.constant}});
      }
      js["values"] = json::array();
      for (double x : c.grid) js["values"].push_back({{"x", x}, {"value", eval_piecewise(s, x)}});
      doc["solutions"].push_back(js);
    }
    json star = json::array();
    for (double x : c.grid) star.push_back({{"x", x}, {"value", no_dividend_ruin(c.model, x)}});
    doc["psi_star"] = star;
    o.text = doc.dump(2) + "\n";
    return o;
  }

  std::ostringstream csv;
  csv << "solution,quantity,layer,index,x,value\n";
  for (const auto& s : sols) {
    const std::string name = s.kind == SolutionKind::ruin ? "psi" : "v";
    csv << name << ",condition_estimate,,,," << format_double(s.condition_estimate) << "\n";
    for (std::size_t j = 1; j <= s.layer_count(); ++j) {
      const auto& f = s.layer(j);
      csv << name << ",anchor," << j << ",,," << format_double(f.anchor) << "\n";
      csv << name << ",rate," << j << ",,," << format_double(f.rate) << "\n";
      for (std::size_t i = 0; i < f.exponents.size(); ++i) {
        csv << name << ",exponent," << j << "," << i + 1 << ",," << format_double(f.exponents[i]) << "\n";
        csv << name << ",scaled_coefficient," << j << "," << i + 1 << ",," << format_double(f.coefficients[i])
            << "\n";
        const double raw = f.raw_coefficient(i);
        if (std::isfinite(raw))
          csv << name << ",raw_coefficient," << j << "," << i + 1 << ",," << format_double(raw) << "\n";
      }
      csv << name << ",constant," << j << ",,," << format_double(f.constant) << "\n";
    }
    for (double x : c.grid)
      csv << name << ",value,,," << format_double(x) << "," << format_double(eval_piecewise(s, x)) << "\n";
  }
  for (double x : c.grid)
    csv << "psi_star,value,,," << format_double(x) << "," << format_double(no_dividend_ruin(c.model, x)) << "\n";
  o.text = csv.str();
  return o;
}

inline Outcome cmd_table(const RunConfig& c, std::vector<std::pair<std::string, std::string>>& extra_files) {
  const double delta = require_delta(c, "the table command");
  const auto model = closed_form_model(c);
  const auto psi = solve_ruin(model);
  const auto v = solve_dividends(model, delta);
  Outcome o;
  flag_near_singular(psi, o);
  flag_near_singular(v, o);

  if (c.format == OutputFormat::record) {
    json doc;
    doc["command"] = "table";
    doc["parameters"] = parameters_record(c);
    doc["rows"] = json::array();
    for (double x : c.grid)
      doc["rows"].push_back(
          {{"x", x}, {"psi_star", no_dividend_ruin(c.model, x)}, {"psi", eval_piecewise(psi, x)},
           {"v", eval_piecewise(v, x)}});
    o.text = doc.dump(2) + "\n";
  } else {
    std::ostringstream csv;
    csv << "x,psi_star,psi,v\n";
    for (double x : c.grid)
      csv << format_double(x) << "," << fixed6(no_dividend_ruin(c.model, x)) << "," << fixed6(eval_piecewise(psi, x))
          << "," << fixed6(eval_piecewise(v, x)) << "\n";
    o.text = csv.str();
  }

  if (!c.out.empty()) {
    const double top = c.grid.back() > 0.0 ? c.grid.back() : residual_sampling_limit(c.strategy);
    constexpr int steps = 400;
    std::ostringstream plot;
    plot << "x,psi_star,psi,v\n";
    for (int i = 0; i <= steps; ++i) {
      const double x = top * i / steps;
      plot << format_double(x) << "," << format_double(no_dividend_ruin(c.model, x)) << ","
           << format_double(eval_piecewise(psi, x)) << "," << format_double(eval_piecewise(v, x)) << "\n";
    }
    extra_files.emplace_back(plot_path(c.out).string(), plot.str());
  }
  return o;
}

inline Outcome cmd_simulate(const RunConfig& c) {
  const auto model = make_model(c);
  const auto has = [&](const char* q) { return std::find(c.estimates.begin(), c.estimates.end(), q) != c.estimates.end(); };
  if (has("dividends")) require_delta(c, "dividend estimates");
  SimulationSettings settings;
  settings.delta = c.delta.value_or(0.0);
  settings.horizon = c.horizon;
  settings.workers = c.workers;
  const auto penalty = make_penalty(c);

  struct Row {
    std::string quantity;
    double x;
    Estimate e;
  };
  std::vector<Row> rows;
  for (double x : c.grid) {
    const auto f = estimate_path_functionals(model, x, settings, c.paths, c.seed, penalty, c.delta0);
    for (const auto& q : c.estimates) {
      if (q == "ruin") rows.push_back({q, x, f.ruin});
      if (q == "dividends") rows.push_back({q, x, f.dividends});
      if (q == "gerber_shiu") rows.push_back({q, x, f.gerber_shiu});
    }
  }

  Outcome o;
  if (c.format == OutputFormat::record) {
    json doc;
    doc["command"] = "simulate";
    doc["parameters"] = parameters_record(c);
    doc["generator"] = generator_name;
    doc["seed"] = c.seed;
    doc["n_paths"] = c.paths;
    doc["horizon"] = c.horizon;
    doc["estimates"] = json::array();
    for (const auto& r : rows)
      doc["estimates"].push_back({{"quantity", r.quantity},
                                  {"x", r.x},
                                  {"mean", r.e.mean},
                                  {"std_error", r.e.std_error},
                                  {"ci95_low", r.e.ci95_low},
                                  {"ci95_high", r.e.ci95_high},
                                  {"censored_fraction", r.e.censored_fraction},
                                  {"tail_bound", number_or_null(r.e.tail_bound)}});
    o.text = doc.dump(2) + "\n";
    return o;
  }
  std::ostringstream csv;
  csv << "quantity,x,mean,std_error,ci95_low,ci95_high,n_paths,horizon,seed,censored_fraction,tail_bound,generator\n";
  for (const auto& r : rows)
    csv << r.quantity << "," << format_double(r.x) << "," << format_double(r.e.mean) << ","
        << format_double(r.e.std_error) << "," << format_double(r.e.ci95_low) << "," << format_double(r.e.ci95_high)
        << "," << r.e.n_paths << "," << format_double(r.e.horizon) << "," << r.e.seed << ","
        << format_double(r.e.censored_fraction) << "," << format_double(r.e.tail_bound) << "," << r.e.generator
        << "\n";
  o.text = csv.str();
  return o;
}

inline Outcome cmd_residual(const RunConfig& c) {
  const auto model = closed_form_model(c);
  std::vector<PiecewiseSolution> sols{solve_ruin(model)};
  if (c.delta) sols.push_back(solve_dividends(model, *c.delta));
  Outcome o;
  for (const auto& s : sols) flag_near_singular(s, o);
  constexpr std::size_t points = 100;

  std::vector<std::pair<std::string, ResidualSummary>> rows;
  bool exceeded = false;
  for (const auto& s : sols) {
    const auto summary = sample_residuals(c.model, c.strategy, s, points, c.seed);
    exceeded = exceeded || !(summary.max_relative <= c.tolerance);
    rows.emplace_back(s.kind == SolutionKind::ruin ? "ruin" : "dividends", summary);
  }
  if (exceeded && o.code == exit_code::ok) o.code = exit_code::residual;

  if (c.format == OutputFormat::record) {
    json doc;
    doc["command"] = "residual";
    doc["parameters"] = parameters_record(c);
    doc["tolerance"] = c.tolerance;
    doc["seed"] = c.seed;
    doc["residuals"] = json::array();
    for (const auto& [name, r] : rows)
      doc["residuals"].push_back({{"equation", name},
                                  {"points", r.points},
                                  {"max_abs", r.max_abs},
                                  {"median_abs", r.median_abs},
                                  {"max_relative", r.max_relative},
                                  {"median_relative", r.median_relative},
                                  {"pass", r.max_relative <= c.tolerance}});
    o.text = doc.dump(2) + "\n";
  } else {
    std::ostringstream csv;
    csv << "equation,points,max_abs,median_abs,max_relative,median_relative,tolerance,status\n";
    for (const auto& [name, r] : rows)
      csv << name << "," << r.points << "," << format_double(r.max_abs) << "," << format_double(r.median_abs) << ","
          << format_double(r.max_relative) << "," << format_double(r.median_relative) << ","
          << format_double(c.tolerance) << "," << (r.max_relative <= c.tolerance ? "pass" : "fail") << "\n";
    o.text = csv.str();
  }
  if (exceeded) o.warning += "residual tolerance " + format_double(c.tolerance) + " exceeded\n";
  return o;
}

/// Flags shared by every subcommand; each overrides the matching config key.
struct Overrides {
  std::string config;
  std::string grid;
  std::uint64_t paths = 0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string format;
  double tolerance = 0.0;
  unsigned workers = 0;
  bool dump = false;
  std::vector<CLI::Option*> options;
};

inline void add_common_options(CLI::App& cmd, Overrides& ov) {
  ov.options = {
      cmd.add_option("--config", ov.config, "INI configuration file")->required(),
      cmd.add_option("--grid", ov.grid, "comma-separated surplus values"),
      cmd.add_option("--paths", ov.paths, "Monte Carlo paths per grid point"),
      cmd.add_option("--horizon", ov.horizon, "simulation horizon"),
      cmd.add_option("--seed", ov.seed, "random seed (also used for residual points)"),
      cmd.add_option("--out", ov.out, "output file (default stdout)"),
      cmd.add_option("--format", ov.format, "csv or record"),
      cmd.add_option("--tolerance", ov.tolerance, "relative residual tolerance"),
      cmd.add_option("--workers", ov.workers, "simulation worker threads"),
  };
  cmd.add_flag("--dump-config", ov.dump, "print the effective configuration and exit");
}

inline RunConfig effective_config(const Overrides& ov) {
  RunConfig c = load_config(ov.config);
  auto given = [&](const char* name) {
    for (auto* o : ov.options)
      if (o->check_lname(name) && o->count() > 0) return true;
    return false;
  };
  if (given("grid")) c.grid = detail::parse_doubles("--grid", ov.grid);
  if (given("paths")) c.paths = ov.paths;
  if (given("horizon")) c.horizon = ov.horizon;
  if (given("seed")) c.seed = ov.seed;
  if (given("out")) c.out = ov.out;
  if (given("format")) {
    if (ov.format == "csv") c.format = OutputFormat::csv;
    else if (ov.format == "record") c.format = OutputFormat::record;
    else throw Error(ErrorCode::ConfigError, "--format: expected csv or record");
  }
  if (given("tolerance")) c.tolerance = ov.tolerance;
  if (given("workers")) c.workers = ov.workers;
  check_run_config(c);
  return c;
}

}  // namespace cli_detail

/// Runs the command line and returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  CLI::App app{"Ruin probabilities and dividend values under multi-layer dividend strategies", "mlrisk"};
  app.require_subcommand(1);
  const std::vector<std::string> names{"solve", "simulate", "table", "residual"};
  const std::vector<std::string> help{
      "closed-form coefficients and values on the grid",
      "Monte Carlo estimates on the grid",
      "psi*, psi and v on the grid with six decimals",
      "integro-differential residuals at random points",
  };
  std::vector<Overrides> overrides(names.size());
  std::vector<CLI::App*> commands;
  for (std::size_t i = 0; i < names.size(); ++i) {
    commands.push_back(app.add_subcommand(names[i], help[i]));
    add_common_options(*commands.back(), overrides[i]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream cli_out, cli_err;
    const int code = app.exit(e, cli_out, cli_err);
    out << cli_out.str();
    err << cli_err.str();
    return code == 0 ? exit_code::ok : exit_code::config;
  }

  std::size_t which = 0;
  while (!commands[which]->parsed()) ++which;
  const Overrides& ov = overrides[which];

  try {
    const RunConfig c = effective_config(ov);
    if (ov.dump) {
      out << dump_config(c);
      return exit_code::ok;
    }
    std::vector<std::pair<std::string, std::string>> extra;
    Outcome o;
    switch (which) {
      case 0: o = cmd_solve(c); break;
      case 1: o = cmd_simulate(c); break;
      case 2: o = cmd_table(c, extra); break;
      default: o = cmd_residual(c); break;
    }
    emit(c, o.text, out);
    for (const auto& [path, text] : extra) write_text(path, text);
    err << o.warning;
    return o.code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return exit_code::internal;
  }
}

}  // namespace mlrisk
