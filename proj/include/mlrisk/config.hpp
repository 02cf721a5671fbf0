#pragma once

// INI-style run configuration shared by the library and the CLI.
//
//   [model]     lambda, lambda_bar, mu, mu_bar,
//               claim_distribution, claim_shape, premium_distribution, premium_shape
//   [strategy]  thresholds (comma list, may be empty), rates (comma list)
//   [discount]  delta0, delta
//   [penalty]   kind = one | deficit_indicator | deficit_power, threshold, exponent
//   [run]       grid, paths, horizon, seed, format, tolerance, estimate, workers, out

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mlrisk/core_types.hpp"

namespace mlrisk {

enum class OutputFormat { csv, record };

inline const char* to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "record"; }

inline const std::vector<double>& default_grid() {
  static const std::vector<double> grid{0, 1, 2, 5, 7, 10, 15, 20, 50, 70};
  return grid;
}

struct RunConfig {
  ModelParams model;
  DividendStrategy strategy;
  std::string claim_distribution = "exponential";
  double claim_shape = 1.0;
  std::string premium_distribution = "exponential";
  double premium_shape = 1.0;

  double delta0 = 0.0;
  std::optional<double> delta;

  std::string penalty = "one";
  double penalty_threshold = 0.0;
  double penalty_exponent = 1.0;

  std::vector<double> grid = default_grid();
  std::uint64_t paths = 100000;
  double horizon = 3000.0;
  std::uint64_t seed = 42;
  OutputFormat format = OutputFormat::csv;
  double tolerance = 1e-8;
  std::vector<std::string> estimates{"ruin", "dividends"};
  unsigned workers = 1;
  std::string out;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline Error config_error(const std::string& key, const std::string& message) {
  return Error(ErrorCode::ConfigError, key + ": " + message);
}

template <class T>
T parse_number(const std::string& key, std::string_view text) {
  const std::string t = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw config_error(key, "cannot parse '" + t + "' as a number");
  return value;
}

inline std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  if (trim(text).empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = text.find(',', start);
    out.push_back(trim(text.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::vector<double> parse_doubles(const std::string& key, std::string_view text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_number<double>(key, item));
  return out;
}

/// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out;
}

inline bool known_key(const std::string& section, const std::string& key) {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> keys{
      {"model",
       {"lambda", "lambda_bar", "mu", "mu_bar", "claim_distribution", "claim_shape", "premium_distribution",
        "premium_shape"}},
      {"strategy", {"thresholds", "rates"}},
      {"discount", {"delta0", "delta"}},
      {"penalty", {"kind", "threshold", "exponent"}},
      {"run", {"grid", "paths", "horizon", "seed", "format", "tolerance", "estimate", "workers", "out"}},
  };
  for (const auto& [name, list] : keys)
    if (name == section) return std::find(list.begin(), list.end(), key) != list.end();
  return false;
}

inline JumpDistribution make_jump(const std::string& kind, double mean, double shape) {
  if (kind == "exponential") return JumpDistribution::exponential(mean);
  if (kind == "deterministic") return JumpDistribution::deterministic(mean);
  return JumpDistribution::gamma(shape, mean / shape);
}

}  // namespace detail

/// Checks the run options that do not depend on the model.
inline void check_run_config(const RunConfig& c) {
  auto dist_ok = [](const std::string& d) {
    return d == "exponential" || d == "deterministic" || d == "gamma";
  };
  if (!dist_ok(c.claim_distribution))
    throw detail::config_error("model.claim_distribution", "expected exponential, deterministic or gamma");
  if (!dist_ok(c.premium_distribution))
    throw detail::config_error("model.premium_distribution", "expected exponential, deterministic or gamma");
  if (!(c.claim_shape > 0.0)) throw detail::config_error("model.claim_shape", "must be positive");
  if (!(c.premium_shape > 0.0)) throw detail::config_error("model.premium_shape", "must be positive");
  if (!(c.delta0 >= 0.0)) throw detail::config_error("discount.delta0", "must be non-negative");
  if (c.delta && !(*c.delta > 0.0)) throw detail::config_error("discount.delta", "must be positive");
  if (c.penalty != "one" && c.penalty != "deficit_indicator" && c.penalty != "deficit_power")
    throw detail::config_error("penalty.kind", "expected one, deficit_indicator or deficit_power");
  if (!(c.penalty_threshold >= 0.0)) throw detail::config_error("penalty.threshold", "must be non-negative");
  if (!(c.penalty_exponent >= 0.0)) throw detail::config_error("penalty.exponent", "must be non-negative");
  if (c.grid.empty()) throw detail::config_error("run.grid", "must not be empty");
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    if (!(c.grid[i] >= 0.0) || !std::isfinite(c.grid[i]))
      throw detail::config_error("run.grid", "values must be finite and non-negative");
    if (i > 0 && c.grid[i] < c.grid[i - 1]) throw detail::config_error("run.grid", "values must be sorted");
  }
  if (c.paths == 0) throw detail::config_error("run.paths", "must be at least 1");
  if (!(c.horizon > 0.0) || !std::isfinite(c.horizon)) throw detail::config_error("run.horizon", "must be positive");
  if (!(c.tolerance > 0.0)) throw detail::config_error("run.tolerance", "must be positive");
  if (c.workers == 0) throw detail::config_error("run.workers", "must be at least 1");
  if (c.estimates.empty()) throw detail::config_error("run.estimate", "must name at least one quantity");
  for (const auto& e : c.estimates)
    if (e != "ruin" && e != "dividends" && e != "gerber_shiu")
      throw detail::config_error("run.estimate", "unknown quantity '" + e + "'");
}

inline RunConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw detail::config_error(section, "key outside of a section");
    for (const auto& [key, value] : body)
      if (!detail::known_key(section, key)) throw detail::config_error(section + "." + key, "unknown key");
  }

  auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) return detail::trim(*v);
    return std::nullopt;
  };
  auto number = [&](const std::string& path, double& target) {
    if (auto v = get(path)) target = detail::parse_number<double>(path, *v);
  };

  RunConfig c;
  auto required = [&](const std::string& path) {
    auto v = get(path);
    if (!v) throw detail::config_error(path, "missing");
    return detail::parse_number<double>(path, *v);
  };
  c.model.lambda = required("model.lambda");
  c.model.lambda_bar = required("model.lambda_bar");
  c.model.mu = required("model.mu");
  c.model.mu_bar = required("model.mu_bar");
  if (auto v = get("model.claim_distribution")) c.claim_distribution = *v;
  if (auto v = get("model.premium_distribution")) c.premium_distribution = *v;
  number("model.claim_shape", c.claim_shape);
  number("model.premium_shape", c.premium_shape);

  if (auto v = get("strategy.thresholds")) c.strategy.thresholds = detail::parse_doubles("strategy.thresholds", *v);
  auto rates = get("strategy.rates");
  if (!rates) throw detail::config_error("strategy.rates", "missing");
  c.strategy.rates = detail::parse_doubles("strategy.rates", *rates);

  number("discount.delta0", c.delta0);
  if (auto v = get("discount.delta")) c.delta = detail::parse_number<double>("discount.delta", *v);

  if (auto v = get("penalty.kind")) c.penalty = *v;
  number("penalty.threshold", c.penalty_threshold);
  number("penalty.exponent", c.penalty_exponent);

  if (auto v = get("run.grid")) c.grid = detail::parse_doubles("run.grid", *v);
  if (auto v = get("run.paths")) c.paths = detail::parse_number<std::uint64_t>("run.paths", *v);
  number("run.horizon", c.horizon);
  if (auto v = get("run.seed")) c.seed = detail::parse_number<std::uint64_t>("run.seed", *v);
  if (auto v = get("run.format")) {
    if (*v == "csv") c.format = OutputFormat::csv;
    else if (*v == "record") c.format = OutputFormat::record;
    else throw detail::config_error("run.format", "expected csv or record");
  }
  number("run.tolerance", c.tolerance);
  if (auto v = get("run.estimate")) c.estimates = detail::split_list(*v);
  if (auto v = get("run.workers")) c.workers = detail::parse_number<unsigned>("run.workers", *v);
  if (auto v = get("run.out")) c.out = *v;

  check_run_config(c);
  return c;
}

inline RunConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config file '" + path + "'");
  return parse_config(in);
}

/// Writes every field, so the text parses back to an identical RunConfig.
inline std::string dump_config(const RunConfig& c) {
  using detail::format_double;
  std::ostringstream o;
  o << "[model]\n"
    << "lambda = " << format_double(c.model.lambda) << "\n"
    << "lambda_bar = " << format_double(c.model.lambda_bar) << "\n"
    << "mu = " << format_double(c.model.mu) << "\n"
    << "mu_bar = " << format_double(c.model.mu_bar) << "\n"
    << "claim_distribution = " << c.claim_distribution << "\n"
    << "claim_shape = " << format_double(c.claim_shape) << "\n"
    << "premium_distribution = " << c.premium_distribution << "\n"
    << "premium_shape = " << format_double(c.premium_shape) << "\n\n"
    << "[strategy]\n"
    << "thresholds = " << detail::join_doubles(c.strategy.thresholds) << "\n"
    << "rates = " << detail::join_doubles(c.strategy.rates) << "\n\n"
    << "[discount]\n"
    << "delta0 = " << format_double(c.delta0) << "\n";
  if (c.delta) o << "delta = " << format_double(*c.delta) << "\n";
  o << "\n[penalty]\n"
    << "kind = " << c.penalty << "\n"
    << "threshold = " << format_double(c.penalty_threshold) << "\n"
    << "exponent = " << format_double(c.penalty_exponent) << "\n\n"
    << "[run]\n"
    << "grid = " << detail::join_doubles(c.grid) << "\n"
    << "paths = " << c.paths << "\n"
    << "horizon = " << format_double(c.horizon) << "\n"
    << "seed = " << c.seed << "\n"
    << "format = " << to_string(c.format) << "\n"
    << "tolerance = " << format_double(c.tolerance) << "\n"
    << "estimate = ";
  for (std::size_t i = 0; i < c.estimates.size(); ++i) o << (i ? ", " : "") << c.estimates[i];
  o << "\n"
    << "workers = " << c.workers << "\n";
  if (!c.out.empty()) o << "out = " << c.out << "\n";
  return o.str();
}

inline ValidatedModel make_model(const RunConfig& c) {
  return validate_model(c.model, c.strategy,
                        detail::make_jump(c.claim_distribution, c.model.mu, c.claim_shape),
                        detail::make_jump(c.premium_distribution, c.model.mu_bar, c.premium_shape));
}

inline PenaltyFunction make_penalty(const RunConfig& c) {
  if (c.penalty == "deficit_indicator") return PenaltyFunction::deficit_indicator(c.penalty_threshold);
  if (c.penalty == "deficit_power") return PenaltyFunction::deficit_power(c.penalty_exponent);
  return PenaltyFunction::constant_one();
}

}  // namespace mlrisk
