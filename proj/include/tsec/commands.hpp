#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "tsec/config.hpp"
#include "tsec/poincare.hpp"
#include "tsec/section_search.hpp"

namespace tsec::cli {

using Json = nlohmann::ordered_json;
using flow::AngleFunction;
using flow::CrossSection;

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"check-invariance", "check-harmonic", "find-section", "build-metric",
                                              "return-map",       "suspend",        "round-trip"};
  return names;
}

/// Command-line overrides applied on top of the config file.
struct Overrides {
  std::optional<int> resolution;
  std::optional<int> truncation;
  std::optional<long long> denominator;
  std::optional<double> tolerance;
};

inline void apply(ExperimentConfig& cfg, const Overrides& o) {
  if (o.resolution) {
    if (*o.resolution < 8 || *o.resolution % 2 != 0)
      throw std::invalid_argument("--resolution must be even and at least 8");
    cfg.resolution = *o.resolution;
  }
  if (o.truncation) cfg.options.truncation = *o.truncation;
  if (o.denominator) cfg.options.denominator = *o.denominator;
  if (o.tolerance) cfg.options.tolerance = *o.tolerance;
}

struct RunResult {
  int exit_code = 0;
  Json report;
};

namespace detail {

inline Json residual(const ResidualReport& r) { return Json{{"l2", r.l2}, {"sup", r.sup}}; }

inline Json vec(const Vec& v, int n) {
  Json a = Json::array();
  for (int i = 0; i < n; ++i) a.push_back(v[i]);
  return a;
}

inline Json feasibility(const search::FeasibilityOutcome& o) {
  Json j;
  j["verdict"] = search::to_string(o.verdict);
  j["c"] = o.c;
  j["c_rational"] = nullptr;
  j["margin"] = o.margin;
  j["K"] = o.diagnostics.K;
  j["N"] = o.diagnostics.N;
  Json orbits = Json::array();
  for (const auto& orb : o.certificate.orbits) {
    orbits.push_back(Json{{"point", vec(orb.point, static_cast<int>(orb.homology.size()))},
                          {"period", orb.period},
                          {"class", orb.homology}});
  }
  j["certificate"] = Json{{"orbits", orbits}};
  if (o.verdict == search::Verdict::feasible) j["fine_margin"] = o.fine_margin;
  j["diagnostics"] = Json{{"iterations", o.diagnostics.iterations},
                          {"lp_used", o.diagnostics.lp_used},
                          {"lp_converged", o.diagnostics.lp_converged},
                          {"lp_rounds", o.diagnostics.lp_rounds},
                          {"pivots", o.diagnostics.pivots}};
  return j;
}

inline void add_rational(Json& j, const search::FeasibilityOutcome& r) {
  Json cr = Json::array();
  for (long long p : r.numerators) cr.push_back(p);
  cr.push_back(r.denominator);
  j["c_rational"] = cr;
  j["rational_margin"] = r.margin;
  j["margin_before_rounding"] = r.margin_before_rounding;
  j["margin_loss_bound"] = r.margin_loss_bound;
}

inline Json section(const CrossSection& cs) {
  Json j;
  j["denominator"] = cs.denominator;
  j["numerators"] = cs.numerators;
  j["integer_periods"] = cs.integer_periods;
  j["period_gcd"] = cs.period_gcd;
  if (cs.dimension() == 2) j["connected"] = cs.period_gcd == 1;
  j["axis"] = axis_name(cs.level_set.axis());
  j["sheets"] = cs.sheets();
  j["level"] = cs.level;
  j["margin"] = cs.margin;
  j["orientation"] = cs.orientation;
  j["mesh_points"] = cs.mesh.size();
  return j;
}

inline void write_section_mesh(const std::filesystem::path& path, const CrossSection& cs) {
  std::ofstream os(path);
  int d = cs.dimension() - 1;
  os << "sheet";
  for (int i = 0; i < d; ++i) os << ",s" << i + 1;
  for (int a = 0; a < cs.dimension(); ++a) os << ',' << axis_name(a);
  os << '\n' << std::setprecision(17);
  std::size_t per = cs.params_per_sheet();
  for (std::size_t i = 0; i < cs.mesh.size(); ++i) {
    os << i / per;
    for (int k = 0; k < d; ++k) os << ',' << cs.params[i][k];
    for (int a = 0; a < cs.dimension(); ++a) os << ',' << cs.mesh[i][a];
    os << '\n';
  }
}

template <class T>
void write_field(const std::filesystem::path& dir, const std::string& name, const T& field) {
  std::filesystem::create_directories(dir / "fields");
  std::ofstream os(dir / "fields" / (name + ".csv"));
  write_csv(os, field);
}

inline void write_field(const std::filesystem::path& dir, const std::string& name, const ScalarField& f) {
  std::filesystem::create_directories(dir / "fields");
  std::ofstream os(dir / "fields" / (name + ".csv"));
  write_csv(os, f.grid(), {name}, {&f});
}

}  // namespace detail

/// Everything a command needs: sampled data and where to put files.
struct Context {
  ExperimentConfig cfg;
  Grid grid;
  VectorField X;
  DifferentialForm Omega;
  std::filesystem::path out;

  Context(ExperimentConfig c, std::filesystem::path dir)
      : cfg(std::move(c)), grid(cfg.dimension, cfg.resolution), X(sample_field(cfg, grid)),
        Omega(sample_volume(cfg, grid)), out(std::move(dir)) {}

  search::SearchOptions search_options() const {
    search::SearchOptions o;
    o.truncation = cfg.options.truncation;
    o.budget = cfg.options.budget;
    o.h_bound = cfg.options.h_bound;
    return o;
  }

  /// F from [angle] when given.
  std::optional<AngleFunction> configured_angle() const {
    if (!cfg.periods) return std::nullopt;
    std::vector<double> c;
    for (const auto& e : expr::components(*cfg.periods)) c.push_back(expr::evaluate(e, {0.0, 0.0, 0.0}));
    ScalarField h = ScalarField::sample(grid, [&](const Vec& x) { return expr::evaluate(*cfg.primitive, x); });
    return AngleFunction(std::move(c), std::move(h));
  }
};

namespace detail {

struct SectionRun {
  search::FeasibilityOutcome outcome;
  std::optional<search::FeasibilityOutcome> rational;
  std::optional<CrossSection> section;
  Json report;
};

/// Feasibility outcome for the class given under [angle].
inline search::FeasibilityOutcome configured_outcome(const Context& ctx, const AngleFunction& F) {
  search::FeasibilityOutcome o;
  o.c = F.periods();
  o.h = F.primitive();
  o.margin = F.margin(ctx.X);
  o.fine_margin = o.margin;
  o.diagnostics.N = ctx.grid.resolution();
  if (!(o.margin > 0.0))
    throw Rejected("configured angle is not transverse to X (margin " + std::to_string(o.margin) + ")");
  o.verdict = search::Verdict::feasible;
  return o;
}

/// find_transverse_closed_form (or the [angle] class when configured), then
/// (when feasible) rationalize and extract.
inline SectionRun section_pipeline(const Context& ctx) {
  SectionRun run;
  auto opt = ctx.search_options();
  auto F = ctx.configured_angle();
  run.outcome = F ? configured_outcome(ctx, *F) : search::find_transverse_closed_form(ctx.X, opt);
  run.report = feasibility(run.outcome);
  run.report["angle_source"] = F ? "config" : "section search";
  if (run.outcome.verdict == search::Verdict::infeasible) {
    auto chk = search::verify_certificate(ctx.X, run.outcome.certificate);
    run.report["certificate"]["verified"] = chk.valid;
    run.report["certificate"]["max_closure"] = chk.max_closure;
    bool cancel = run.outcome.certificate.orbits.size() == 2;
    for (std::size_t a = 0; cancel && a < run.outcome.certificate.orbits[0].homology.size(); ++a)
      cancel = run.outcome.certificate.orbits[0].homology[a] + run.outcome.certificate.orbits[1].homology[a] == 0;
    run.report["certificate"]["classes_sum_to_zero"] = cancel;
  }
  if (run.outcome.verdict != search::Verdict::feasible) return run;
  run.rational = search::rationalize_periods(run.outcome, ctx.X, ctx.cfg.options.denominator, opt);
  add_rational(run.report, *run.rational);
  run.section = search::build_cross_section(*run.rational, ctx.X, ctx.cfg.options.section_resolution,
                                            ctx.cfg.options.level);
  run.report["section"] = section(*run.section);
  return run;
}

/// Circle-valued F for return maps: [angle] if its periods are integers,
/// otherwise the defining function of the extracted section.
inline AngleFunction circle_angle(const Context& ctx, Json& report) {
  if (auto F = ctx.configured_angle(); F && F->circle_valued(1e-9)) {
    report["angle_source"] = "config";
    return *F;
  }
  SectionRun run = section_pipeline(ctx);
  report["angle_source"] = run.report["angle_source"];
  report["feasibility"] = run.report;
  if (!run.section) throw Rejected(std::string("no cross section: search verdict ") +
                                   search::to_string(run.outcome.verdict));
  return run.section->level_set.function();
}

inline Json forward(const harmonic::ForwardReport& f) {
  Json j;
  j["margin"] = f.margin;
  j["residuals"] = Json{{"d_theta", f.d_theta},
                        {"d_star_theta", f.d_star_theta},
                        {"flat_closedness", f.flat_closedness},
                        {"volume_match", f.volume_match},
                        {"star_identity", f.star_identity},
                        {"measured_sign", f.measured_sign}};
  j["tolerance"] = f.tolerance;
  j["verdict"] = f.success ? "harmonic" : "not_harmonic";
  return j;
}

}  // namespace detail

inline RunResult check_invariance(const Context& ctx) {
  RunResult r;
  DifferentialForm L = lie_derivative_volume(ctx.X, ctx.Omega);
  auto res = L.norm();
  bool ok = res.sup < ctx.cfg.options.tolerance;
  r.report["lie_derivative"] = detail::residual(res);
  r.report["tolerance"] = ctx.cfg.options.tolerance;
  r.report["verdict"] = ok ? "invariant" : "not_invariant";
  detail::write_field(ctx.out, "lie_derivative", L);
  r.exit_code = ok ? 0 : 2;
  return r;
}

inline RunResult check_harmonic(const Context& ctx) {
  RunResult r;
  MetricField g = sample_metric(ctx.cfg, ctx.grid);
  DifferentialForm theta = interior_product(ctx.X, ctx.Omega);
  HarmonicResiduals hr = harmonic_residuals(g, theta);
  double tol = ctx.cfg.options.tolerance;
  r.report["metric"] = ctx.cfg.metric ? "config" : "euclidean";
  r.report["residuals"] = Json{{"d_theta", detail::residual(hr.closed)}, {"d_star_theta", detail::residual(hr.coclosed)}};
  double mismatch = (ctx.Omega[0] - g.volume_density()).sup_norm();
  r.report["volume_match"] = mismatch;
  if (mismatch <= 1e-9) {
    auto sr = star_identity_check(g, ctx.X, ctx.Omega);
    r.report["star_identity"] = Json{{"residual", sr.residual.sup}, {"measured_sign", sr.sign}};
  } else {
    r.report["star_identity"] = nullptr;
  }
  r.report["tolerance"] = tol;
  bool ok = hr.harmonic(tol);
  r.report["verdict"] = ok ? "harmonic" : "not_harmonic";
  detail::write_field(ctx.out, "theta", theta);
  detail::write_field(ctx.out, "star_theta", hodge_star(g, theta));
  r.exit_code = ok ? 0 : 2;
  return r;
}

inline RunResult find_section(const Context& ctx) {
  RunResult r;
  auto run = detail::section_pipeline(ctx);
  r.report = run.report;
  if (run.section) detail::write_section_mesh(ctx.out / "section_mesh.csv", *run.section);
  r.exit_code = run.section ? 0 : 2;
  return r;
}

inline RunResult build_metric(const Context& ctx) {
  RunResult r;
  AngleFunction F;
  if (auto cf = ctx.configured_angle()) {
    F = *cf;
    r.report["angle_source"] = "config";
  } else {
    auto run = detail::section_pipeline(ctx);
    r.report["angle_source"] = "section search";
    r.report["feasibility"] = run.report;
    if (!run.rational) throw Rejected(std::string("no transverse closed form: search verdict ") +
                                      search::to_string(run.outcome.verdict));
    F = run.rational->angle();
  }
  r.report["periods"] = F.periods();
  auto fr = harmonic::verify_main_theorem_forward(ctx.X, F, ctx.Omega, ctx.cfg.options.tolerance);
  Json fj = detail::forward(fr);
  for (auto& [k, v] : fj.items()) r.report[k] = v;
  detail::write_field(ctx.out, "metric", fr.adapted.metric);
  detail::write_field(ctx.out, "conformal_scale", fr.adapted.conformal_scale);
  detail::write_field(ctx.out, "flat_form", fr.adapted.flat_form);
  r.exit_code = fr.success ? 0 : 2;
  return r;
}

inline RunResult return_map(const Context& ctx) {
  RunResult r;
  AngleFunction G = detail::circle_angle(ctx, r.report);
  const auto& o = ctx.cfg.options;
  auto pd = flow::poincare_map(ctx.X, G, o.level, o.section_resolution, o.dt);
  std::ofstream os(ctx.out / "return_map.csv");
  flow::write_csv(os, pd);
  double tmin = std::numeric_limits<double>::infinity(), tmax = 0.0;
  for (std::size_t i = 0; i < pd.times.size(); ++i)
    if (!pd.failed[i]) {
      tmin = std::min(tmin, pd.times[i]);
      tmax = std::max(tmax, pd.times[i]);
    }
  r.report["periods"] = G.periods();
  r.report["axis"] = axis_name(pd.axis);
  r.report["sheets"] = pd.sheets;
  r.report["samples"] = pd.params.size();
  r.report["failures"] = pd.failures();
  r.report["tau_min"] = tmin;
  r.report["tau_max"] = tmax;
  r.report["dt"] = pd.dt;
  r.report["steps"] = pd.steps;
  r.report["refinements"] = pd.refinements;
  r.report["verdict"] = pd.failures() == 0 ? "complete" : "incomplete";
  r.exit_code = pd.failures() == 0 ? 0 : 2;
  return r;
}

inline RunResult suspend(const Context& ctx) {
  RunResult r;
  AngleFunction G = detail::circle_angle(ctx, r.report);
  const auto& o = ctx.cfg.options;
  auto pd = flow::poincare_map(ctx.X, G, o.level, o.section_resolution, o.dt);
  auto model = flow::SuspensionModel::from_poincare(pd);
  auto res = flow::orbit_equivalence_check(ctx.X, G, model, o.returns, 8, o.dt);
  bool ok = res.sup < o.suspension_tolerance;
  r.report["periods"] = G.periods();
  r.report["returns"] = o.returns;
  r.report["starts"] = 8;
  r.report["hit_deviation"] = detail::residual(res);
  r.report["tolerance"] = o.suspension_tolerance;
  r.report["verdict"] = ok ? "equivalent" : "not_equivalent";
  r.exit_code = ok ? 0 : 2;
  return r;
}

/// Both directions: section => adapted metric => harmonic i_X Omega => section.
inline RunResult round_trip(const Context& ctx) {
  RunResult r;
  const auto& o = ctx.cfg.options;
  auto inv = lie_derivative_volume(ctx.X, ctx.Omega).norm();
  r.report["invariance"] = detail::residual(inv);
  if (!(inv.sup < o.tolerance))
    throw Rejected("round-trip: the flow does not preserve Omega (||L_X Omega|| = " + std::to_string(inv.sup) + ")");
  auto run = detail::section_pipeline(ctx);
  r.report["feasibility"] = run.report;
  if (!run.section) {
    r.report["verdict"] = "no_section";
    r.exit_code = 2;
    return r;
  }
  detail::write_section_mesh(ctx.out / "section_mesh.csv", *run.section);
  auto fr = harmonic::verify_main_theorem_forward(ctx.X, run.rational->angle(), ctx.Omega, o.tolerance);
  r.report["forward"] = detail::forward(fr);
  if (!fr.success) {
    r.report["verdict"] = "forward_failed";
    r.exit_code = 2;
    return r;
  }
  auto br = search::verify_main_theorem_backward(ctx.X, ctx.Omega, fr.adapted.metric, o.denominator,
                                                 o.section_resolution, o.tolerance, ctx.search_options());
  auto cross = search::check_section_crossings(ctx.X, *br.section, o.orbits, o.dt);
  Json b;
  b["d_theta"] = br.d_theta;
  b["d_star_theta"] = br.d_star_theta;
  b["omega_closedness"] = br.omega_closedness;
  b["omega_x_sign"] = br.sign;
  b["min_abs_omega_x"] = br.min_abs_omega_x;
  Json cr = Json::array();
  for (long long p : br.outcome.numerators) cr.push_back(p);
  cr.push_back(br.outcome.denominator);
  b["c_rational"] = cr;
  b["section"] = detail::section(*br.section);
  b["crossings"] = Json{{"orbits", cross.orbits},
                        {"misses", cross.misses},
                        {"max_time", cross.max_time},
                        {"time_bound", cross.time_bound}};
  r.report["backward"] = b;
  bool ok = br.success && cross.misses == 0;
  r.report["verdict"] = ok ? "success" : "backward_failed";
  r.exit_code = ok ? 0 : 2;
  return r;
}

/// Pretty-prints like Json::dump(2) but with every floating-point value at 17
/// significant digits, so reports are byte-stable and round-trip exactly.
inline void write_json(std::ostream& os, const Json& j, int depth = 0) {
  auto pad = [&](int d) { os << std::string(static_cast<std::size_t>(2 * d), ' '); };
  if (j.is_object() || j.is_array()) {
    bool obj = j.is_object();
    if (j.empty()) {
      os << (obj ? "{}" : "[]");
      return;
    }
    os << (obj ? "{\n" : "[\n");
    std::size_t i = 0;
    for (auto it = j.begin(); it != j.end(); ++it, ++i) {
      pad(depth + 1);
      if (obj) os << Json(it.key()).dump() << ": ";
      write_json(os, *it, depth + 1);
      os << (i + 1 < j.size() ? ",\n" : "\n");
    }
    pad(depth);
    os << (obj ? '}' : ']');
  } else if (j.is_number_float()) {
    double v = j.get<double>();
    if (!std::isfinite(v)) {
      os << "null";
      return;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string t = buf;
    if (t.find_first_of(".eEn") == std::string::npos) t += ".0";
    os << t;
  } else {
    os << j.dump();
  }
}

/// Runs one command and writes report.json into `out`. A Rejected precondition
/// is a verdict failure (exit 2); other exceptions propagate (exit 1 at the CLI).
inline int run_command(const std::string& command, ExperimentConfig cfg, const std::filesystem::path& out) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), command) == names.end())
    throw std::invalid_argument("unknown command '" + command + "'");
  std::filesystem::create_directories(out);
  Json report;
  report["command"] = command;
  report["experiment"] = cfg.name;
  report["dimension"] = cfg.dimension;
  report["resolution"] = cfg.resolution;
  int code = 0;
  try {
    Context ctx(std::move(cfg), out);
    RunResult r;
    if (command == "check-invariance") r = check_invariance(ctx);
    else if (command == "check-harmonic") r = check_harmonic(ctx);
    else if (command == "find-section") r = find_section(ctx);
    else if (command == "build-metric") r = build_metric(ctx);
    else if (command == "return-map") r = return_map(ctx);
    else if (command == "suspend") r = suspend(ctx);
    else r = round_trip(ctx);
    for (auto& [k, v] : r.report.items()) report[k] = v;
    code = r.exit_code;
  } catch (const Rejected& e) {
    report["verdict"] = "rejected";
    report["reason"] = e.what();
    code = 2;
  }
  report["exit_code"] = code;
  std::ofstream os(out / "report.json");
  write_json(os, report);
  os << '\n';
  return code;
}

}  // namespace tsec::cli
