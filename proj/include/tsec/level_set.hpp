#pragma once

#include <numeric>

#include "tsec/flow.hpp"

namespace tsec::flow {

/// Level set {G = level mod 1} of a circle-valued G = p.x + h with integer p.
/// It is presented as |p_a| sheets of a graph x_a = phi(s), where a is the
/// dominant axis and s ranges over the remaining coordinates in [0,1)^{n-1}.
class LevelSet {
public:
  LevelSet() = default;
  LevelSet(AngleFunction G, double level) : G_(std::move(G)), level_(level) {
    if (!G_.circle_valued(1e-9))
      throw std::invalid_argument("level set: angle function must have integer periods");
    int n = G_.dimension();
    axis_ = 0;
    for (int a = 1; a < n; ++a)
      if (std::abs(G_.periods()[a]) > std::abs(G_.periods()[axis_])) axis_ = a;
    long long pa = std::llround(G_.periods()[axis_]);
    if (pa == 0) throw std::invalid_argument("level set: zero period vector");
    sheets_ = static_cast<int>(std::llabs(pa));
    orientation_ = pa > 0 ? 1 : -1;
    for (int a = 0; a < n; ++a)
      if (a != axis_) others_.push_back(a);
    // The graph description needs d_a G to keep the sign of p_a everywhere.
    double worst = (orientation_ * G_.differential()[axis_]).min();
    if (!(worst > 0.0))
      throw std::runtime_error("level set: not a graph over the transverse coordinates (min sign(p_a) d_a G = " +
                               std::to_string(worst) + ")");
  }

  const AngleFunction& function() const { return G_; }
  double level() const { return level_; }
  int dimension() const { return G_.dimension(); }
  int axis() const { return axis_; }
  int sheets() const { return sheets_; }
  const std::vector<int>& parameter_axes() const { return others_; }

  /// Point on sheet m over the parameter s (entries 0..n-2 of `s`), x_a in [0,1).
  Vec solve(const Vec& s, int sheet) const {
    Vec x{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < others_.size(); ++i) x[others_[i]] = s[i];
    auto phi = [&](double t) {
      Vec y = x;
      y[axis_] = t;
      return G_.value(y) - level_;
    };
    double phi0 = phi(0.0);
    double target = orientation_ > 0 ? std::floor(phi0) + 1.0 + sheet : std::ceil(phi0) - 1.0 - sheet;
    // phi is monotone in t with phi(1) = phi(0) + p_a; bracket then polish.
    double lo = 0.0, hi = 1.0;
    double t = 0.5;
    for (int it = 0; it < 200; ++it) {
      double r = orientation_ * (phi(t) - target);
      if (std::abs(r) < 1e-15) break;
      if (r < 0.0) lo = t; else hi = t;
      Vec y = x;
      y[axis_] = t;
      double slope = orientation_ * G_.gradient(y)[axis_];
      double next = t - r / slope;
      t = (next > lo && next < hi) ? next : 0.5 * (lo + hi);
      if (hi - lo < 1e-16) break;
    }
    x[axis_] = wrap_unit(t);
    return x;
  }

  /// Parameter coordinates of a point on the level set.
  Vec parameters(const Vec& x) const {
    Vec s{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < others_.size(); ++i) s[i] = wrap_unit(x[others_[i]]);
    return s;
  }

  /// Tangent vectors d x / d s_i of the graph at x: e_b - (d_b G / d_a G) e_a.
  std::vector<Vec> tangents(const Vec& x) const {
    Vec grad = G_.gradient(x);
    std::vector<Vec> out;
    for (int b : others_) {
      Vec t{0.0, 0.0, 0.0};
      t[b] = 1.0;
      t[axis_] = -grad[b] / grad[axis_];
      out.push_back(t);
    }
    return out;
  }

private:
  AngleFunction G_;
  double level_ = 0.0;
  int axis_ = 0;
  int sheets_ = 1;
  int orientation_ = 1;
  std::vector<int> others_;
};

inline double determinant(const std::vector<Vec>& cols, int n) {
  SmallMatrix m{n, {}};
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) m(r, c) = cols[c][r];
  return m.determinant();
}

/// Parameter grid points s_j = j/M on [0,1)^{d}, d = 1 or 2.
inline std::vector<Vec> parameter_grid(int dim, int resolution) {
  std::vector<Vec> out;
  if (dim == 1) {
    for (int j = 0; j < resolution; ++j) out.push_back({static_cast<double>(j) / resolution, 0.0, 0.0});
  } else {
    for (int j2 = 0; j2 < resolution; ++j2)
      for (int j1 = 0; j1 < resolution; ++j1)
        out.push_back({static_cast<double>(j1) / resolution, static_cast<double>(j2) / resolution, 0.0});
  }
  return out;
}

/// Compact level set of an angle function with rational periods, meshed on
/// its graph parameterization.
struct CrossSection {
  AngleFunction defining;                // F = c_Q . x + h
  std::vector<long long> numerators;     // c_Q = numerators / denominator
  long long denominator = 1;
  std::vector<long long> integer_periods;  // reduced q c_Q / gcd
  long long period_gcd = 1;
  LevelSet level_set;                    // G = integer_periods . x + (q/gcd) h
  double level = 0.0;
  int resolution = 0;
  std::vector<Vec> params;               // sheet-major: sheet * params_per_sheet + j
  std::vector<Vec> mesh;
  double margin = 0.0;                   // min dF(X) over the ambient grid
  int orientation = 1;                   // sign of det(X, tangent frame)

  int dimension() const { return defining.dimension(); }
  int sheets() const { return level_set.sheets(); }
  std::size_t params_per_sheet() const { return params.size() / static_cast<std::size_t>(std::max(1, sheets())); }
};

/// Builds the section {q/gcd * F = level mod 1} for F with rational periods.
inline CrossSection make_cross_section(const VectorField& X, const AngleFunction& F,
                                       long long denominator, double level, int resolution) {
  if (denominator <= 0) throw std::invalid_argument("cross section: denominator must be positive");
  if (resolution < 2) throw std::invalid_argument("cross section: resolution too small");
  int n = F.dimension();
  CrossSection cs;
  cs.defining = F;
  cs.denominator = denominator;
  cs.level = level;
  cs.resolution = resolution;
  long long g = 0;
  for (double c : F.periods()) {
    double scaled = c * static_cast<double>(denominator);
    long long p = std::llround(scaled);
    if (std::abs(scaled - static_cast<double>(p)) > 1e-9)
      throw std::invalid_argument("cross section: periods are not multiples of 1/denominator");
    cs.numerators.push_back(p);
    g = std::gcd(g, std::llabs(p));
  }
  if (g == 0) throw std::invalid_argument("cross section: zero period vector");
  cs.period_gcd = g;
  std::vector<double> reduced;
  for (long long p : cs.numerators) {
    cs.integer_periods.push_back(p / g);
    reduced.push_back(static_cast<double>(p / g));
  }
  double scale = static_cast<double>(denominator) / static_cast<double>(g);
  cs.level_set = LevelSet(AngleFunction(reduced, scale * F.primitive()), level);
  cs.margin = F.margin(X);
  if (!(cs.margin > 0.0))
    throw Rejected("cross section: X is not transverse to ker dF (margin " + std::to_string(cs.margin) + ")");

  auto base = parameter_grid(n - 1, resolution);
  FieldSampler Xs(X);
  int orient = 0;
  for (int m = 0; m < cs.level_set.sheets(); ++m) {
    for (const auto& s : base) {
      Vec x = cs.level_set.solve(s, m);
      std::vector<Vec> cols{Xs(x)};
      for (const auto& t : cs.level_set.tangents(x)) cols.push_back(t);
      double det = determinant(cols, n);
      int sgn = det > 0.0 ? 1 : -1;
      if (orient == 0) orient = sgn;
      else if (orient != sgn)
        throw std::runtime_error("cross section: inconsistent orientation of (X, tangent frame)");
      cs.params.push_back(s);
      cs.mesh.push_back(x);
    }
  }
  cs.orientation = orient;

  // Periodic closure: shifting any parameter by one permutes the sheets.
  for (std::size_t i = 0; i + 1 < static_cast<std::size_t>(n); ++i) {
    Vec shifted{0.0, 0.0, 0.0};
    shifted[i] = 1.0;
    std::vector<double> at0, at1;
    for (int m = 0; m < cs.level_set.sheets(); ++m) {
      at0.push_back(cs.level_set.solve({0.0, 0.0, 0.0}, m)[cs.level_set.axis()]);
      at1.push_back(cs.level_set.solve(shifted, m)[cs.level_set.axis()]);
    }
    for (double a : at0) {
      double gap = 1.0;
      for (double b : at1) gap = std::min(gap, circle_distance(a, b));
      if (gap > 1e-9)
        throw std::runtime_error("cross section: level set mesh does not close periodically (gap " +
                                 std::to_string(gap) + ")");
    }
  }
  return cs;
}

struct Crossing {
  bool found = false;
  Vec point{0.0, 0.0, 0.0};  // lifted
  double time = 0.0;
  long steps = 0;
  int refinements = 0;
};

/// Integrates from x (lifted) until the lifted value of F reaches `target`,
/// bracketing at RK4 steps and bisecting the final sub-step to |dF| < 1e-12.
/// F must increase along orbits.
inline Crossing advance_until(const FieldSampler& X, const AngleFunction& F, Vec x, double target,
                              double dt, double max_time) {
  Crossing c;
  double t = 0.0;
  while (t < max_time) {
    Vec next = rk4_step(X, x, dt);
    ++c.steps;
    if (!finite(next)) return c;
    double fn = F.value(next);
    if (fn >= target) {
      double lo = 0.0, hi = dt;
      Vec y = next;
      double ty = dt;
      double r = fn - target;
      for (int it = 0; it < 200 && std::abs(r) >= 1e-12; ++it) {
        double mid = 0.5 * (lo + hi);
        y = rk4_step(X, x, mid);
        ty = mid;
        r = F.value(y) - target;
        ++c.refinements;
        if (r < 0.0) lo = mid; else hi = mid;
        if (hi - lo < 1e-17) break;
      }
      c.found = true;
      c.point = y;
      c.time = t + ty;
      return c;
    }
    x = next;
    t = static_cast<double>(c.steps) * dt;
  }
  return c;
}

}  // namespace tsec::flow
