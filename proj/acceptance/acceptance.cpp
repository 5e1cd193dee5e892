// Acceptance checks; prints one PASS/FAIL line per criterion.
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "trig_poly.hpp"
#include "tsec/harmonic_verify.hpp"
#include "tsec/poincare.hpp"
#include "tsec/section_search.hpp"

using namespace tsec;
using flow::AngleFunction;
namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

const double gamma_ = 0.5 * (std::sqrt(5.0) - 1.0);
int failures = 0;

void report(int id, bool pass, const std::string& detail, std::chrono::steady_clock::time_point start) {
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("criterion %2d: %s  %s  (%.1f s)\n", id, pass ? "PASS" : "FAIL", detail.c_str(), secs);
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

VectorField stream(const Grid& g, double eps) {
  return VectorField::sample(g, [eps](const Vec& x) { return Vec{1.0 + eps * std::sin(2.0 * M_PI * x[1]), 0.0, 0.0}; });
}

VectorField torus(const Grid& g) {
  return VectorField::sample(g, [](const Vec& x) {
    return Vec{1.0 + 0.3 * std::sin(2.0 * M_PI * x[2]), gamma_, 1.0 + 0.4 * std::sin(2.0 * M_PI * x[0])};
  });
}

struct Case {
  std::string name;
  VectorField X;
  AngleFunction F;
};

std::vector<Case> corpus(int N) {
  Grid g2(2, N), g3(3, N);
  std::vector<Case> out;
  out.push_back({"linear", VectorField::constant(g2, {1.0, gamma_}), AngleFunction::linear(g2, {1.0, 0.0})});
  for (double eps : {0.3, 0.5, 0.9})
    out.push_back({"stream " + fmt(eps), stream(g2, eps), AngleFunction::linear(g2, {1.0, 0.0})});
  out.push_back({"torus", torus(g3), AngleFunction::linear(g3, {1.0, 0.0, 0.0})});
  return out;
}

DifferentialForm unit_volume(const Grid& g) { return DifferentialForm::volume(ScalarField::constant(g, 1.0)); }

VectorField sample(const Grid& g, const std::vector<oracle::TrigPoly>& X) {
  std::vector<ScalarField> c;
  for (const auto& p : X) c.push_back(p.sample(g));
  return VectorField(std::move(c));
}

// Random SPD metric field: a constant SPD part plus a positive multiple of the identity.
MetricField random_metric(std::mt19937_64& rng, const Grid& g) {
  int n = g.dimension();
  auto base = oracle::random_spd(rng, n);
  std::uniform_int_distribution<int> k(-2, 2);
  std::uniform_real_distribution<double> ph(0.0, 1.0);
  std::array<int, 3> w{k(rng), k(rng), k(rng)};
  double phase = ph(rng);
  return MetricField::sample(g, [&](const Vec& x) {
    double arg = phase;
    for (int a = 0; a < n; ++a) arg += w[a] * x[a];
    double bump = 0.5 * (1.0 + std::sin(2.0 * M_PI * arg));
    SmallMatrix s{n, {}};
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) s(r, c) = base[r][c] + (r == c ? bump : 0.0);
    return s;
  });
}

void criterion1() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  bool ok = true;
  std::string signs;
  for (int n : {2, 3}) {
    Grid g(n, 32);
    int sign = 0;
    for (int trial = 0; trial < 100; ++trial) {
      auto metric = random_metric(rng, g);
      std::vector<oracle::TrigPoly> Xp;
      for (int a = 0; a < n; ++a) Xp.push_back(oracle::random_poly(rng, n, 3, 3));
      auto rep = star_identity_check(metric, sample(g, Xp), DifferentialForm::volume(metric.volume_density()));
      worst = std::max(worst, rep.residual.sup);
      if (sign == 0) sign = rep.sign;
      ok = ok && rep.sign == sign && rep.residual.sup < 1e-10;
    }
    signs += " s(n=" + std::to_string(n) + ")=" + std::to_string(sign);
  }
  report(1, ok, "star identity residual " + fmt(worst) + signs, t0);
}

void criterion2() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + trial % 2;
    int k = trial % (n + 1);
    int l = (trial / 2) % (n + 1 - k);
    Grid g(n, 32);
    auto gm = oracle::random_spd(rng, n);
    auto metric = oracle::constant_metric(g, gm);
    auto a = oracle::random_form(rng, n, k, 3, 3);
    auto b = oracle::random_form(rng, n, l, 3, 3);
    auto as = a.sample(g);
    if (k < n) worst = std::max(worst, oracle::sup_error(exterior_derivative(as), oracle::d(a)));
    if (k > 0) worst = std::max(worst, oracle::sup_error(codifferential(metric, as), oracle::codifferential(gm, a)));
    worst = std::max(worst, oracle::sup_error(laplacian(metric, as), oracle::laplacian(gm, a)));
    worst = std::max(worst, oracle::sup_error(hodge_star(metric, as), oracle::star(gm, a)));
    worst = std::max(worst, oracle::sup_error(wedge(as, b.sample(g)), oracle::wedge(a, b)));
    if (k + 2 <= n) worst = std::max(worst, exterior_derivative(exterior_derivative(as)).norm().sup);
    auto vm = random_metric(rng, g);
    double sign = (k * (n - k)) % 2 == 0 ? 1.0 : -1.0;
    worst = std::max(worst, (hodge_star(vm, hodge_star(vm, as)) - sign * as).norm().sup);
  }
  report(2, worst < 1e-10, "worst sup error " + fmt(worst) + " over 20 cases", t0);
}

// Criteria 3 and 9 share the forward runs.
void criteria3and9() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok3 = true, ok9 = true;
  double worst = 0.0, min_pairing = 1e300;
  for (const auto& c : corpus(64)) {
    const Grid& g = c.X.grid();
    auto rep = harmonic::verify_main_theorem_forward(c.X, c.F, unit_volume(g));
    double r = std::max({rep.d_theta, rep.d_star_theta, rep.flat_closedness, rep.volume_match, rep.star_identity});
    worst = std::max(worst, r);
    ok3 = ok3 && rep.success && r < 1e-8;
    if (!rep.success) continue;
    auto theta = interior_product(c.X, unit_volume(g));
    double pn = 0.0;
    for (double p : cohomology_periods(theta)) pn = std::max(pn, std::abs(p));
    auto cs = flow::make_cross_section(c.X, c.F, 1, 0.0, g.dimension() == 2 ? 64 : 32);
    double pairing = std::abs(harmonic::section_pairing(cs, theta));
    min_pairing = std::min(min_pairing, pairing);
    ok9 = ok9 && pn > 0.0 && pairing > 0.1;
  }
  report(3, ok3, "forward residuals <= " + fmt(worst) + " on 5 corpus flows at N=64", t0);

  auto t1 = std::chrono::steady_clock::now();
  Grid g3(3, 32);
  auto X = torus(g3);
  auto h = ScalarField::sample(g3, [](const Vec& x) { return 0.05 * std::cos(2.0 * M_PI * (x[1] - x[2])); });
  auto cs3 = flow::make_cross_section(X, AngleFunction({1.0, 0.0, 0.0}, h), 1, 0.0, 32);
  auto beta = DifferentialForm(1, {ScalarField::sample(g3, [](const Vec& x) { return std::sin(2.0 * M_PI * (x[0] + x[2])); }),
                                   ScalarField::sample(g3, [](const Vec& x) { return std::cos(2.0 * M_PI * x[1]); }),
                                   ScalarField::constant(g3, 0.0)});
  double exact3 = std::abs(harmonic::section_pairing(cs3, exterior_derivative(beta)));
  Grid g2(2, 64);
  auto cs2 = flow::make_cross_section(VectorField::constant(g2, {1.0, gamma_}), AngleFunction::linear(g2, {2.0, 1.0}), 1,
                                      0.0, 64);
  auto f = ScalarField::sample(g2, [](const Vec& x) { return std::sin(2.0 * M_PI * (x[0] + 3.0 * x[1])); });
  double exact2 = std::abs(harmonic::section_pairing(cs2, gradient_form(f)));
  double exact = std::max(exact2, exact3);
  report(9, ok9 && exact < 1e-8, "min |pairing| " + fmt(min_pairing) + ", exact-form pairing " + fmt(exact), t1);
}

// Criteria 4 and 8 both use the backward construction on (1, gamma).
void criteria4and8() {
  auto t0 = std::chrono::steady_clock::now();
  Grid g(2, 64);
  auto X = VectorField::constant(g, {1.0, gamma_});
  auto rep = search::verify_main_theorem_backward(X, unit_volume(g), MetricField::euclidean(g));
  bool ok = rep.success && rep.section.has_value();
  std::string detail = "backward failed";
  if (ok) {
    auto cr = search::check_section_crossings(X, *rep.section, 1000);
    ok = cr.orbits == 1000 && cr.misses == 0 && cr.max_time <= cr.time_bound;
    detail = std::to_string(cr.misses) + " misses of " + std::to_string(cr.orbits) + ", max hit time " +
             fmt(cr.max_time) + " <= bound " + fmt(cr.time_bound) + ", class " +
             std::to_string(rep.outcome.numerators[0]) + "/" + std::to_string(rep.outcome.denominator) + "," +
             std::to_string(rep.outcome.numerators[1]) + "/" + std::to_string(rep.outcome.denominator);
  }
  report(4, ok, detail, t0);

  auto t1 = std::chrono::steady_clock::now();
  auto r21 = search::verify_main_theorem_backward(X, unit_volume(g), MetricField::euclidean(g), 21);
  const auto& o = r21.outcome;
  bool convergent = o.denominator == 21 && o.numerators == std::vector<long long>{21, 13};
  bool bound = o.margin_before_rounding - o.margin <= o.margin_loss_bound + 1e-14;
  bool ok8 = convergent && o.margin > 0.0 && bound && r21.section && r21.section->margin > 0.0;
  report(8, ok8,
         "periods " + std::to_string(o.numerators[0]) + "/" + std::to_string(o.denominator) + ", " +
             std::to_string(o.numerators[1]) + "/" + std::to_string(o.denominator) + ", margin " + fmt(o.margin) +
             ", loss " + fmt(o.margin_before_rounding - o.margin) + " <= bound " + fmt(o.margin_loss_bound),
         t1);
}

void criterion6() {
  auto t0 = std::chrono::steady_clock::now();
  Grid g(2, 64);
  auto pd = flow::poincare_map(VectorField::constant(g, {1.0, gamma_}), AngleFunction::linear(g, {1.0, 0.0}), 0.0, 64,
                               1e-3);
  double ep = 0.0;
  for (std::size_t i = 0; i < pd.params.size(); ++i)
    ep = std::max(ep, circle_distance(pd.return_params[i][0], pd.params[i][0] + gamma_));
  double et = 0.0;
  bool ok = pd.failures() == 0;
  for (double eps : {0.3, 0.5, 0.9}) {
    auto ps = flow::poincare_map(stream(g, eps), AngleFunction::linear(g, {1.0, 0.0}), 0.0, 64, 1e-3);
    ok = ok && ps.failures() == 0;
    for (std::size_t i = 0; i < ps.params.size(); ++i) {
      double y = ps.params[i][0];
      et = std::max(et, std::abs(ps.times[i] - 1.0 / (1.0 + eps * std::sin(2.0 * M_PI * y))));
    }
  }
  report(6, ok && ep < 1e-8 && et < 1e-6, "rotation error " + fmt(ep) + ", return-time error " + fmt(et), t0);
}

void criterion7() {
  auto t0 = std::chrono::steady_clock::now();
  double rate = 0.0;
  for (const auto& c : corpus(64)) {
    auto rp = flow::reparametrize_unit_return(c.X, c.F);
    rate = std::max(rate, pair(c.F.differential(), rp.field).map([](double v) { return v - 1.0; }).sup_norm());
  }
  // Section sample counts as in the configs: the roof 1/(1 + 0.9 sin 2 pi y) needs 128.
  Grid g2(2, 64), g3(3, 32);
  std::vector<std::pair<Case, int>> susp{
      {{"linear", VectorField::constant(g2, {1.0, gamma_}), AngleFunction::linear(g2, {1.0, 0.0})}, 64},
      {{"torus", torus(g3), AngleFunction::linear(g3, {1.0, 0.0, 0.0})}, 32}};
  for (double eps : {0.3, 0.5, 0.9})
    susp.push_back({{"stream " + fmt(eps), stream(g2, eps), AngleFunction::linear(g2, {1.0, 0.0})}, 128});
  double hits = 0.0;
  std::string worst_case;
  for (const auto& [c, m] : susp) {
    auto model = flow::SuspensionModel::from_poincare(flow::poincare_map(c.X, c.F, 0.0, m, 1e-3));
    double e = flow::orbit_equivalence_check(c.X, c.F, model, 100, 2).sup;
    if (e >= hits) worst_case = c.name;
    hits = std::max(hits, e);
  }
  report(7, rate < 1e-12 && hits < 1e-8,
         "|dF(X~) - 1| " + fmt(rate) + ", suspension hit error " + fmt(hits) + " (worst: " + worst_case + ")", t0);
}

struct CliRun {
  std::map<std::string, int> codes;
  std::map<std::string, std::string> reports;
  std::map<std::string, Json> json;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

CliRun cli_suite(const fs::path& root) {
  CliRun run;
  fs::remove_all(root);
  std::vector<fs::path> configs;
  for (const auto& e : fs::directory_iterator(fs::path(TSEC_SOURCE_DIR) / "configs"))
    if (e.path().extension() == ".ini") configs.push_back(e.path());
  std::sort(configs.begin(), configs.end());
  static const std::vector<std::string> commands{"check-invariance", "check-harmonic", "find-section", "build-metric",
                                                 "return-map",       "suspend",        "round-trip"};
  for (const auto& cfg : configs)
    for (const auto& cmd : commands) {
      std::string key = cfg.stem().string() + "/" + cmd;
      fs::path out = root / key;
      std::string line = std::string(TSEC_CLI_PATH) + " " + cmd + " --config " + cfg.string() + " --out " +
                         out.string() + " >/dev/null 2>&1";
      int status = std::system(line.c_str());
      run.codes[key] = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
      if (fs::exists(out / "report.json")) {
        run.reports[key] = slurp(out / "report.json");
        run.json[key] = Json::parse(run.reports[key]);
      }
    }
  return run;
}

void criteria5and10() {
  auto t0 = std::chrono::steady_clock::now();
  fs::path tmp = fs::temp_directory_path() / "tsec_acceptance";
  CliRun a = cli_suite(tmp / "a");
  bool ok = true;
  std::string detail;
  int round_trips = 0;
  for (const auto& [key, code] : a.codes) {
    auto slash = key.find('/');
    std::string cfg = key.substr(0, slash), cmd = key.substr(slash + 1);
    if (cfg == "winding" || cmd != "round-trip") continue;
    ++round_trips;
    if (code != 0) {
      ok = false;
      detail += " " + cfg + " round-trip exit " + std::to_string(code) + ";";
    }
  }
  bool rejected = a.codes["winding/check-invariance"] == 2 && a.json["winding/check-invariance"]["verdict"] == "not_invariant";
  const Json& fs_w = a.json["winding/find-section"];
  bool infeasible = a.codes["winding/find-section"] == 2 && fs_w["verdict"] == "infeasible" &&
                    fs_w["certificate"]["verified"] == true && fs_w["certificate"]["classes_sum_to_zero"] == true;
  ok = ok && rejected && infeasible && round_trips > 0;
  report(5, ok,
         std::to_string(round_trips) + " round-trips exit 0; winding: invariance " +
             (rejected ? "rejected" : "NOT rejected") + ", find-section " +
             (infeasible ? "infeasible with verified certificate" : "NOT certified") + detail,
         t0);

  auto t1 = std::chrono::steady_clock::now();
  CliRun b = cli_suite(tmp / "b");
  bool same = a.codes == b.codes && a.reports == b.reports && !a.reports.empty();
  int differing = 0;
  for (const auto& [k, v] : a.reports)
    if (!b.reports.count(k) || b.reports.at(k) != v) ++differing;
  report(10, same,
         std::to_string(a.reports.size()) + " report.json files compared, " + std::to_string(differing) + " differ",
         t1);
  fs::remove_all(tmp);
}

template <class F>
void guarded(const std::vector<int>& ids, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    for (int id : ids) report(id, false, std::string("threw: ") + e.what(), std::chrono::steady_clock::now());
  }
}

}  // namespace

int main() {
  guarded({1}, criterion1);
  guarded({2}, criterion2);
  guarded({3, 9}, criteria3and9);
  guarded({4, 8}, criteria4and8);
  guarded({6}, criterion6);
  guarded({7}, criterion7);
  guarded({5, 10}, criteria5and10);
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
