#pragma once

#include <random>

#include "tsec/level_set.hpp"

namespace tsec::flow {

/// Sampled first-return map and time on a level set of a circle-valued F.
struct PoincareData {
  int dimension = 0;
  int axis = 0;
  int sheets = 1;
  int resolution = 0;
  double level = 0.0;
  double dt = 0.0;
  Interpolation interpolation = Interpolation::trigonometric;
  std::vector<Vec> params;
  std::vector<Vec> points;
  std::vector<Vec> returns;         // P(x), wrapped to [0,1)^n
  std::vector<Vec> return_params;
  std::vector<double> times;        // tau(x)
  std::vector<char> failed;
  long steps = 0;
  long refinements = 0;

  std::size_t failures() const { return static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1)); }
};

/// For each section sample x, integrates until F has increased by one full
/// period and records P(x) and tau(x). F must have integer periods and dF(X) > 0.
inline PoincareData poincare_map(const VectorField& X, const AngleFunction& F, double level,
                                 int section_resolution, double dt = 1e-3,
                                 Interpolation interp = Interpolation::trigonometric,
                                 double max_time = 0.0) {
  double margin = F.margin(X);
  if (!(margin > 0.0))
    throw Rejected("poincare map: F is not transverse to X (margin " + std::to_string(margin) + ")");
  if (!F.circle_valued(1e-9))
    throw std::invalid_argument("poincare map: F must have integer periods (rationalize and scale first)");
  if (max_time <= 0.0) max_time = 2.0 / margin + 10.0 * dt;
  LevelSet ls(F, level);
  FieldSampler Xs(X, interp);
  PoincareData pd;
  pd.dimension = X.dimension();
  pd.axis = ls.axis();
  pd.sheets = ls.sheets();
  pd.resolution = section_resolution;
  pd.level = level;
  pd.dt = dt;
  pd.interpolation = interp;
  auto base = parameter_grid(pd.dimension - 1, section_resolution);
  for (int m = 0; m < ls.sheets(); ++m) {
    for (const auto& s : base) {
      Vec x = ls.solve(s, m);
      Crossing c = advance_until(Xs, F, x, F.value(x) + 1.0, dt, max_time);
      pd.steps += c.steps;
      pd.refinements += c.refinements;
      pd.params.push_back(s);
      pd.points.push_back(x);
      pd.failed.push_back(c.found ? 0 : 1);
      Vec p = c.found ? wrap(c.point, pd.dimension) : Vec{0.0, 0.0, 0.0};
      pd.returns.push_back(p);
      pd.return_params.push_back(ls.parameters(p));
      pd.times.push_back(c.found ? c.time : std::numeric_limits<double>::quiet_NaN());
    }
  }
  return pd;
}

inline void write_csv(std::ostream& os, const PoincareData& pd) {
  int d = pd.dimension - 1;
  os << "sheet";
  for (int i = 0; i < d; ++i) os << ",s" << i + 1;
  for (int a = 0; a < pd.dimension; ++a) os << ',' << axis_name(a);
  for (int a = 0; a < pd.dimension; ++a) os << ",P" << axis_name(a);
  os << ",tau,failed\n" << std::setprecision(17);
  std::size_t per_sheet = pd.params.size() / static_cast<std::size_t>(pd.sheets);
  for (std::size_t i = 0; i < pd.params.size(); ++i) {
    os << i / per_sheet;
    for (int k = 0; k < d; ++k) os << ',' << pd.params[i][k];
    for (int a = 0; a < pd.dimension; ++a) os << ',' << pd.points[i][a];
    for (int a = 0; a < pd.dimension; ++a) os << ',' << pd.returns[i][a];
    os << ',' << pd.times[i] << ',' << static_cast<int>(pd.failed[i]) << '\n';
  }
}

/// Base map f and roof tau sampled on the section parameter grid; the quotient
/// of {(s,t) : 0 <= t <= tau(s)} by (s, tau(s)) ~ (f(s), 0).
class SuspensionModel {
public:
  SuspensionModel(int param_dim, int resolution, std::vector<Vec> map_samples, std::vector<double> roof,
                  double level = 0.0)
      : grid_(param_dim, resolution), level_(level), map_(std::move(map_samples)) {
    if (map_.size() != grid_.size())
      throw std::invalid_argument("suspension: map sample count does not match the section grid");
    for (std::size_t i = 0; i < roof.size(); ++i)
      if (!(roof[i] > 0.0) || !std::isfinite(roof[i]))
        throw std::invalid_argument("suspension: roof function is not positive at section index " +
                                    std::to_string(i));
    roof_ = ScalarField(grid_, std::move(roof));
    roof_interp_ = spectral::Interpolant(roof_);
    for (int i = 0; i < param_dim; ++i) {
      displacement_.push_back(unwrapped_displacement(i));
      disp_interp_.emplace_back(displacement_.back());
    }
    check_invertible(1e-8);
  }

  /// Single-sheet Poincare data only: the section must be a graph over its parameters.
  static SuspensionModel from_poincare(const PoincareData& pd) {
    if (pd.sheets != 1)
      throw std::invalid_argument("suspension: section has " + std::to_string(pd.sheets) +
                                  " sheets; only single-sheet sections are supported");
    if (pd.failures() > 0) throw std::invalid_argument("suspension: Poincare data has failed samples");
    return SuspensionModel(pd.dimension - 1, pd.resolution, pd.return_params, pd.times, pd.level);
  }

  int dimension() const { return grid_.dimension(); }
  int resolution() const { return grid_.resolution(); }
  double level() const { return level_; }
  const std::vector<Vec>& map_samples() const { return map_; }
  const ScalarField& roof_samples() const { return roof_; }

  Vec map(const Vec& s) const {
    Vec out{0.0, 0.0, 0.0};
    for (int i = 0; i < dimension(); ++i) out[i] = wrap_unit(s[i] + disp_interp_[i](s));
    return out;
  }

  double roof(const Vec& s) const { return roof_interp_(s); }

  /// Copy with f shifted by a constant along the first parameter; used to inject faults.
  SuspensionModel shifted(double delta) const {
    std::vector<Vec> m = map_;
    for (auto& v : m) v[0] = wrap_unit(v[0] + delta);
    return SuspensionModel(dimension(), resolution(), std::move(m), roof_.values(), level_);
  }

private:
  ScalarField unwrapped_displacement(int comp) const {
    int n = grid_.resolution();
    std::vector<double> u(grid_.size());
    for (std::size_t idx = 0; idx < grid_.size(); ++idx) {
      Vec s = grid_.point(idx);
      double raw = map_[idx][comp] - s[comp];
      raw -= std::round(raw);
      auto j = grid_.multi_index(idx);
      double ref = raw;
      if (j[0] > 0) ref = u[idx - 1];
      else if (grid_.dimension() > 1 && j[1] > 0) ref = u[idx - static_cast<std::size_t>(n)];
      u[idx] = raw + std::round(ref - raw);
    }
    return ScalarField(grid_, std::move(u));
  }

  void check_invertible(double tol) const {
    int d = dimension();
    for (std::size_t idx = 0; idx < grid_.size(); ++idx) {
      Vec target = map(grid_.point(idx));
      Vec s = grid_.point(idx);
      for (int it = 0; it < 50; ++it) {
        Vec fs = map(s);
        Vec r{0.0, 0.0, 0.0};
        double rn = 0.0;
        for (int i = 0; i < d; ++i) {
          r[i] = fs[i] - target[i];
          r[i] -= std::round(r[i]);
          rn = std::max(rn, std::abs(r[i]));
        }
        if (rn < 1e-14) break;
        SmallMatrix J{d, {}};
        for (int i = 0; i < d; ++i) {
          Vec gr = disp_interp_[i].gradient(s);
          for (int k = 0; k < d; ++k) J(i, k) = (i == k ? 1.0 : 0.0) + gr[k];
        }
        if (std::abs(J.determinant()) < 1e-14) break;
        SmallMatrix Ji = J.inverse();
        for (int i = 0; i < d; ++i) {
          double step = 0.0;
          for (int k = 0; k < d; ++k) step += Ji(i, k) * r[k];
          s[i] -= step;
        }
      }
      Vec s0 = grid_.point(idx);
      for (int i = 0; i < d; ++i)
        if (circle_distance(s[i], s0[i]) > tol)
          throw std::invalid_argument("suspension: base map is not invertible near section index " +
                                      std::to_string(idx));
    }
  }

  Grid grid_;
  double level_ = 0.0;
  std::vector<Vec> map_;
  ScalarField roof_;
  spectral::Interpolant roof_interp_;
  std::vector<ScalarField> displacement_;
  std::vector<spectral::Interpolant> disp_interp_;
};

struct SuspensionState {
  Vec base{0.0, 0.0, 0.0};
  double height = 0.0;  // 0 <= height < roof(base)
};

/// The special flow: unit vertical speed, glued at the roof by the base map.
class SpecialFlow {
public:
  explicit SpecialFlow(SuspensionModel model) : model_(std::move(model)) {}

  SuspensionState advance(SuspensionState st, double duration) const {
    if (duration < 0.0) throw std::invalid_argument("special flow: negative duration");
    double remaining = duration;
    while (true) {
      double top = model_.roof(st.base);
      if (st.height + remaining < top) {
        st.height += remaining;
        return st;
      }
      remaining -= top - st.height;
      st.base = model_.map(st.base);
      st.height = 0.0;
    }
  }

  struct Hit {
    Vec base;
    double time;
  };

  /// Successive arrivals at the base starting from (s0, 0).
  std::vector<Hit> base_hits(const Vec& s0, int count) const {
    std::vector<Hit> out;
    Vec s = s0;
    double t = 0.0;
    for (int k = 0; k < count; ++k) {
      t += model_.roof(s);
      s = model_.map(s);
      out.push_back({s, t});
    }
    return out;
  }

  const SuspensionModel& model() const { return model_; }

private:
  SuspensionModel model_;
};

inline SpecialFlow suspend(const SuspensionModel& model) { return SpecialFlow(model); }

/// Compares section hits (position and cumulative time) of the flow of X
/// against the special flow of `model`, from `starts` random section points.
inline ResidualReport orbit_equivalence_check(const VectorField& X, const AngleFunction& F,
                                              const SuspensionModel& model, int returns,
                                              int starts = 8, double dt = 1e-3,
                                              std::uint64_t seed = 20240601) {
  LevelSet ls(F, model.level());
  if (ls.sheets() != 1) throw std::invalid_argument("orbit equivalence: multi-sheet section");
  FieldSampler Xs(X);
  SpecialFlow sf(model);
  double margin = F.margin(X);
  double max_time = 2.0 / margin + 10.0 * dt;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  int d = X.dimension() - 1;
  double sup = 0.0, acc = 0.0;
  long count = 0;
  for (int st = 0; st < starts; ++st) {
    Vec s{0.0, 0.0, 0.0};
    for (int i = 0; i < d; ++i) s[i] = uni(rng);
    Vec x = ls.solve(s, 0);
    double f0 = F.value(x);
    double shift = 0.0;  // F drop from wrapping x back into the unit cell
    double t = 0.0;
    auto hits = sf.base_hits(s, returns);
    for (int k = 0; k < returns; ++k) {
      Crossing c = advance_until(Xs, F, x, f0 + (k + 1) - shift, dt, max_time);
      double dev;
      if (!c.found) {
        dev = std::numeric_limits<double>::infinity();
      } else {
        x = c.point;
        for (int a = 0; a < X.dimension(); ++a) {
          double m = std::floor(x[a]);
          x[a] -= m;
          shift += F.periods()[a] * m;
        }
        t += c.time;
        Vec p = ls.parameters(x);
        dev = std::abs(t - hits[k].time);
        for (int i = 0; i < d; ++i) dev = std::max(dev, circle_distance(p[i], hits[k].base[i]));
      }
      sup = std::max(sup, dev);
      acc += dev * dev;
      ++count;
    }
  }
  ResidualReport r;
  r.sup = sup;
  r.l2 = std::sqrt(acc / std::max<long>(1, count));
  r.resolution = model.resolution();
  return r;
}

}  // namespace tsec::flow
