#pragma once

#include <fstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "tsec/expr.hpp"
#include "tsec/forms.hpp"

namespace tsec::cli {

/// Knobs shared by the commands; every one can be set under [options].
struct Options {
  int truncation = 8;
  long long denominator = 64;
  double dt = 1e-3;
  double tolerance = 1e-8;
  double level = 0.0;
  int section_resolution = 64;
  double h_bound = 1.0;
  int budget = 200;
  int returns = 100;
  int orbits = 1000;
  double suspension_tolerance = 1e-8;
};

struct ExperimentConfig {
  std::string name;
  int dimension = 2;
  int resolution = 64;
  expr::Node field;
  expr::Node density;
  std::optional<expr::Node> metric;
  std::optional<expr::Node> periods;
  std::optional<expr::Node> primitive;
  Options options;
};

namespace detail {

inline std::string unquote(std::string s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
    s = s.substr(1, s.size() - 2);
  return s;
}

inline expr::Node expression(const boost::property_tree::ptree& pt, const std::string& key, int dim) {
  std::string text = unquote(pt.get<std::string>(key));
  try {
    return expr::parse_field_expression(text, dim);
  } catch (const std::exception& e) {
    throw std::invalid_argument("config key " + key + ": " + e.what());
  }
}

template <class T>
T number(const boost::property_tree::ptree& pt, const std::string& key, T fallback) {
  auto v = pt.get_optional<std::string>(key);
  if (!v) return fallback;
  std::string s = unquote(*v);
  try {
    std::size_t used = 0;
    T out;
    if constexpr (std::is_integral_v<T>)
      out = static_cast<T>(std::stoll(s, &used));
    else
      out = static_cast<T>(std::stod(s, &used));
    if (used != s.size()) throw std::invalid_argument(s);
    return out;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key " + key + ": not a number: '" + s + "'");
  }
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& is) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(is, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  cfg.name = detail::unquote(pt.get<std::string>("experiment.name", "experiment"));
  cfg.dimension = detail::number<int>(pt, "experiment.dimension", 2);
  cfg.resolution = detail::number<int>(pt, "experiment.resolution", 64);
  if (cfg.dimension != 2 && cfg.dimension != 3)
    throw std::invalid_argument("config: dimension must be 2 or 3");
  if (cfg.resolution < 8 || cfg.resolution % 2 != 0)
    throw std::invalid_argument("config: resolution must be even and at least 8");
  if (!pt.get_optional<std::string>("flow.field")) throw std::invalid_argument("config: missing flow.field");
  cfg.field = detail::expression(pt, "flow.field", cfg.dimension);
  if (expr::components(cfg.field).size() != static_cast<std::size_t>(cfg.dimension))
    throw std::invalid_argument("config: flow.field must have " + std::to_string(cfg.dimension) + " components");
  cfg.density = pt.get_optional<std::string>("flow.density") ? detail::expression(pt, "flow.density", cfg.dimension)
                                                              : expr::parse_field_expression("1");
  if (cfg.density.kind == expr::Node::Kind::vector) throw std::invalid_argument("config: flow.density must be scalar");
  if (pt.get_optional<std::string>("metric.g")) {
    cfg.metric = detail::expression(pt, "metric.g", cfg.dimension);
    auto rows = expr::components(*cfg.metric);
    bool ok = rows.size() == static_cast<std::size_t>(cfg.dimension);
    for (const auto& r : rows) ok = ok && expr::components(r).size() == static_cast<std::size_t>(cfg.dimension);
    if (!ok || cfg.metric->kind != expr::Node::Kind::vector)
      throw std::invalid_argument("config: metric.g must be a " + std::to_string(cfg.dimension) + "x" +
                                  std::to_string(cfg.dimension) + " matrix literal");
  }
  if (pt.get_optional<std::string>("angle.periods")) {
    cfg.periods = detail::expression(pt, "angle.periods", cfg.dimension);
    if (expr::components(*cfg.periods).size() != static_cast<std::size_t>(cfg.dimension))
      throw std::invalid_argument("config: angle.periods must have " + std::to_string(cfg.dimension) + " entries");
    cfg.primitive = pt.get_optional<std::string>("angle.primitive")
                        ? detail::expression(pt, "angle.primitive", cfg.dimension)
                        : expr::parse_field_expression("0");
  }
  Options& o = cfg.options;
  o.truncation = detail::number(pt, "options.truncation", o.truncation);
  o.denominator = detail::number(pt, "options.denominator", o.denominator);
  o.dt = detail::number(pt, "options.dt", o.dt);
  o.tolerance = detail::number(pt, "options.tolerance", o.tolerance);
  o.level = detail::number(pt, "options.level", o.level);
  o.section_resolution = detail::number(pt, "options.section_resolution", o.section_resolution);
  o.h_bound = detail::number(pt, "options.h_bound", o.h_bound);
  o.budget = detail::number(pt, "options.budget", o.budget);
  o.returns = detail::number(pt, "options.returns", o.returns);
  o.orbits = detail::number(pt, "options.orbits", o.orbits);
  o.suspension_tolerance = detail::number(pt, "options.suspension_tolerance", o.suspension_tolerance);
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open " + path);
  return parse_config(is);
}

inline VectorField sample_field(const ExperimentConfig& cfg, const Grid& grid) {
  auto comps = expr::components(cfg.field);
  return VectorField::sample(grid, [&](const Vec& x) {
    Vec v{0.0, 0.0, 0.0};
    for (int a = 0; a < grid.dimension(); ++a) v[a] = expr::evaluate(comps[a], x);
    return v;
  });
}

/// Omega = rho dx^1 ^ ... ^ dx^n; rho must be positive at every grid point.
inline DifferentialForm sample_volume(const ExperimentConfig& cfg, const Grid& grid) {
  ScalarField rho = ScalarField::sample(grid, [&](const Vec& x) { return expr::evaluate(cfg.density, x); });
  if (!(rho.min() > 0.0)) throw std::invalid_argument("config: density is not positive on the grid");
  return DifferentialForm::volume(rho);
}

inline MetricField sample_metric(const ExperimentConfig& cfg, const Grid& grid) {
  if (!cfg.metric) return MetricField::euclidean(grid);
  auto rows = expr::components(*cfg.metric);
  int n = grid.dimension();
  MetricField g = MetricField::sample(grid, [&](const Vec& x) {
    SmallMatrix m{n, {}};
    for (int r = 0; r < n; ++r) {
      auto cols = expr::components(rows[r]);
      for (int c = 0; c < n; ++c) m(r, c) = expr::evaluate(cols[c], x);
    }
    for (int r = 0; r < n; ++r)
      for (int c = r + 1; c < n; ++c)
        if (std::abs(m(r, c) - m(c, r)) > 1e-12 * (1.0 + std::abs(m(r, c))))
          throw std::invalid_argument("config: metric.g is not symmetric");
    return m;
  });
  g.require_spd();
  return g;
}

}  // namespace tsec::cli
