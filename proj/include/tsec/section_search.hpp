#pragma once

#include <numeric>
#include <optional>
#include <random>
#include <set>

#include "tsec/harmonic_verify.hpp"
#include "tsec/simplex.hpp"

namespace tsec::search {

using flow::AngleFunction;
using flow::CrossSection;
using flow::FieldSampler;

enum class Verdict { feasible, infeasible, undecided };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::feasible: return "feasible";
    case Verdict::infeasible: return "infeasible";
    default: return "undecided";
  }
}

struct SearchOptions {
  int truncation = 8;             // K: |k|_inf <= K
  int budget = 200;               // projected-subgradient iterations
  double epsilon_margin = 1e-6;
  double h_bound = 1.0;           // L1 bound on the Fourier coefficients of h
  int lp_max_columns = 6000;      // skip the simplex polish above this size
  int max_rounds = 60;
  int cut_batch = 64;
  long max_pivots = 200000;
  double certificate_dt = 1e-2;
  int certificate_seeds = 4;      // per axis
  double burn_in = 10.0;
  double search_time = 20.0;
  double closure_tol = 1e-6;
};

/// Real trigonometric basis cos(2 pi k.x), sin(2 pi k.x) over a half-space of
/// wavevectors 0 < |k|_inf <= K. Coefficient 2m is the cosine of mode m.
struct TrigBasis {
  int dimension = 2;
  int truncation = 0;
  std::vector<std::array<int, 3>> modes;

  TrigBasis() = default;
  TrigBasis(int dim, int K) : dimension(dim), truncation(K) {
    if (K < 0) throw std::invalid_argument("trig basis: negative truncation");
    std::array<int, 3> k{0, 0, 0};
    int kz_max = dim == 3 ? K : 0;
    int ky_max = dim >= 2 ? K : 0;
    for (k[2] = -kz_max; k[2] <= kz_max; ++k[2])
      for (k[1] = -ky_max; k[1] <= ky_max; ++k[1])
        for (k[0] = -K; k[0] <= K; ++k[0]) {
          int first = 0;
          for (int a = dim - 1; a >= 0; --a)
            if (k[a] != 0) first = k[a];
          if (first > 0) modes.push_back(k);
        }
  }

  std::size_t size() const { return 2 * modes.size(); }
};

/// Field sum_m a_m cos(2 pi k_m.x) + b_m sin(2 pi k_m.x), or its partial
/// derivative along `axis` when axis >= 0.
inline ScalarField synthesize(const Grid& grid, const TrigBasis& basis, const std::vector<double>& coef,
                              int axis = -1) {
  int N = grid.resolution();
  if (2 * basis.truncation >= N)
    throw std::invalid_argument("trig basis: truncation " + std::to_string(basis.truncation) +
                                " is not resolved on N = " + std::to_string(N));
  spectral::detail::Buffer buf(grid.size());
  spectral::Complex* c = buf.as_complex();
  std::fill(c, c + grid.size(), spectral::Complex(0.0, 0.0));
  double S = static_cast<double>(grid.size());
  const double two_pi = 2.0 * M_PI;
  for (std::size_t m = 0; m < basis.modes.size(); ++m) {
    const auto& k = basis.modes[m];
    spectral::Complex v(coef[2 * m], -coef[2 * m + 1]);
    v *= 0.5 * S;
    if (axis >= 0) v *= spectral::Complex(0.0, two_pi * k[axis]);
    std::array<int, 3> jp{0, 0, 0}, jm{0, 0, 0};
    for (int a = 0; a < grid.dimension(); ++a) {
      jp[a] = ((k[a] % N) + N) % N;
      jm[a] = ((-k[a] % N) + N) % N;
    }
    c[grid.linear_index(jp)] += v;
    c[grid.linear_index(jm)] += std::conj(v);
  }
  spectral::detail::transform(buf, grid, FFTW_BACKWARD);
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c[i].real() / S;
  return ScalarField(grid, std::move(out));
}

/// c.X + dh(X) on the grid for h in the trigonometric basis.
inline std::vector<double> grid_margins(const VectorField& X, const std::vector<double>& c, const TrigBasis& basis,
                                        const std::vector<double>& coef) {
  const Grid& grid = X.grid();
  int n = grid.dimension();
  std::vector<double> r(grid.size(), 0.0);
  for (int a = 0; a < n; ++a)
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += c[a] * X[a][j];
  if (basis.modes.empty()) return r;
  for (int a = 0; a < n; ++a) {
    ScalarField d = synthesize(grid, basis, coef, a);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += d[j] * X[a][j];
  }
  return r;
}

/// Gradient of dh(X)(x_j) with respect to the basis coefficients.
inline std::vector<double> derivative_row(const VectorField& X, const TrigBasis& basis, std::size_t j) {
  Vec x = X.grid().point(j);
  Vec v = X.at(j);
  std::vector<double> row(basis.size());
  const double two_pi = 2.0 * M_PI;
  for (std::size_t m = 0; m < basis.modes.size(); ++m) {
    const auto& k = basis.modes[m];
    double phase = 0.0, kx = 0.0;
    for (int a = 0; a < basis.dimension; ++a) {
      phase += k[a] * x[a];
      kx += k[a] * v[a];
    }
    phase *= two_pi;
    row[2 * m] = -two_pi * kx * std::sin(phase);
    row[2 * m + 1] = two_pi * kx * std::cos(phase);
  }
  return row;
}

/// Euclidean projection onto the L1 ball of the given radius.
inline void project_l1(double* v, std::size_t len, double radius) {
  double total = 0.0;
  for (std::size_t i = 0; i < len; ++i) total += std::abs(v[i]);
  if (total <= radius) return;
  std::vector<double> u(len);
  for (std::size_t i = 0; i < len; ++i) u[i] = std::abs(v[i]);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    cum += u[i];
    double t = (cum - radius) / static_cast<double>(i + 1);
    if (i + 1 == len || u[i + 1] <= t) {
      theta = t;
      break;
    }
  }
  for (std::size_t i = 0; i < len; ++i) {
    double a = std::max(std::abs(v[i]) - theta, 0.0);
    v[i] = v[i] < 0.0 ? -a : a;
  }
}

struct ClosedOrbit {
  Vec point{0.0, 0.0, 0.0};
  double period = 0.0;
  std::vector<long long> homology;
  double closure_error = 0.0;
};

struct Certificate {
  std::vector<ClosedOrbit> orbits;
};

struct Diagnostics {
  int iterations = 0;      // projected-subgradient iterations
  int lp_rounds = 0;
  long pivots = 0;
  bool lp_used = false;
  bool lp_converged = false;
  int K = 0;
  int N = 0;
};

struct FeasibilityOutcome {
  Verdict verdict = Verdict::undecided;
  std::vector<double> c;
  ScalarField h;
  TrigBasis basis;
  std::vector<double> coefficients;
  double margin = 0.0;
  double fine_margin = 0.0;  // re-evaluated on the 2N grid (feasible only)
  Certificate certificate;
  Diagnostics diagnostics;
  // Set by rationalize_periods.
  std::vector<long long> numerators;
  long long denominator = 0;
  double margin_before_rounding = 0.0;
  double margin_loss_bound = 0.0;

  bool rational() const { return denominator > 0; }
  AngleFunction angle() const { return AngleFunction(c, h); }
};

namespace detail {

struct LpSolution {
  std::vector<double> c;
  std::vector<double> coef;
  double margin = -std::numeric_limits<double>::infinity();  // true min over the grid
  int rounds = 0;
  long pivots = 0;
  bool converged = false;
};

/// max t s.t. c.X_j + dh(X)_j >= t on the active points, ||c||_1 <= 1 (or c fixed),
/// ||coef||_1 <= B. Variables [c+, c-, w+, w-, s] with t = s - T so that the
/// origin is a feasible vertex.
inline lp::Result solve_restricted(const VectorField& X, const TrigBasis& basis, const std::vector<double>* fixed_c,
                                   double bound, const std::vector<std::size_t>& active, double T,
                                   long max_pivots, std::vector<double>& c_out, std::vector<double>& coef_out,
                                   double& t_out) {
  int n = X.dimension();
  int nc = fixed_c ? 0 : 2 * n;
  int nw = 2 * static_cast<int>(basis.size());
  int cols = nc + nw + 1;
  int rows = static_cast<int>(active.size()) + (fixed_c ? 0 : 1) + (nw > 0 ? 1 : 0);
  lp::Problem p(rows, cols);
  int r = 0;
  for (std::size_t j : active) {
    Vec v = X.at(j);
    double rhs = T;
    if (fixed_c) {
      for (int a = 0; a < n; ++a) rhs += (*fixed_c)[a] * v[a];
    } else {
      for (int a = 0; a < n; ++a) {
        p.a(r, a) = -v[a];
        p.a(r, n + a) = v[a];
      }
    }
    if (nw > 0) {
      auto d = derivative_row(X, basis, j);
      for (std::size_t m = 0; m < d.size(); ++m) {
        p.a(r, nc + static_cast<int>(m)) = -d[m];
        p.a(r, nc + static_cast<int>(d.size() + m)) = d[m];
      }
    }
    p.a(r, cols - 1) = 1.0;
    p.b[r] = rhs;
    ++r;
  }
  if (!fixed_c) {
    for (int a = 0; a < nc; ++a) p.a(r, a) = 1.0;
    p.b[r] = 1.0;
    ++r;
  }
  if (nw > 0) {
    for (int m = 0; m < nw; ++m) p.a(r, nc + m) = 1.0;
    p.b[r] = bound;
    ++r;
  }
  p.obj[cols - 1] = 1.0;
  // Among (near-)optimal h prefer the smallest in L1, so h = 0 when it does not help.
  for (int m = 0; m < nw; ++m) p.obj[nc + m] = -1e-5;
  lp::Result res = lp::solve(p, max_pivots);
  if (fixed_c) {
    c_out = *fixed_c;
  } else {
    c_out.assign(n, 0.0);
    for (int a = 0; a < n; ++a) c_out[a] = res.x[a] - res.x[n + a];
  }
  coef_out.assign(basis.size(), 0.0);
  for (std::size_t m = 0; m < basis.size(); ++m)
    coef_out[m] = res.x[nc + m] - res.x[nc + basis.size() + m];
  t_out = res.x[cols - 1] - T;
  return res;
}

inline std::vector<std::size_t> coarse_points(const Grid& grid) {
  int N = grid.resolution();
  int per_axis = grid.dimension() == 2 ? 16 : 8;
  int stride = std::max(1, N / per_axis);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto j = grid.multi_index(i);
    bool keep = true;
    for (int a = 0; a < grid.dimension(); ++a) keep = keep && (j[a] % stride == 0);
    if (keep) out.push_back(i);
  }
  return out;
}

/// Cutting-plane loop: solve on the active set, add the most violated grid points.
inline LpSolution cutting_plane(const VectorField& X, const TrigBasis& basis, const std::vector<double>* fixed_c,
                                const SearchOptions& opt, std::set<std::size_t> active) {
  int n = X.dimension();
  double T = 1.0;
  for (std::size_t j = 0; j < X.grid().size(); ++j) {
    Vec v = X.at(j);
    double s = 0.0;
    if (fixed_c) {
      for (int a = 0; a < n; ++a) s += (*fixed_c)[a] * v[a];
      T = std::max(T, 1.0 + std::abs(s));
    } else {
      for (int a = 0; a < n; ++a) s = std::max(s, std::abs(v[a]));
      T = std::max(T, 1.0 + s);
    }
  }
  LpSolution best;
  for (int round = 0; round < opt.max_rounds; ++round) {
    std::vector<std::size_t> rows(active.begin(), active.end());
    std::vector<double> c, coef;
    double t = 0.0;
    lp::Result res = solve_restricted(X, basis, fixed_c, opt.h_bound, rows, T, opt.max_pivots, c, coef, t);
    best.pivots += res.pivots;
    best.rounds = round + 1;
    auto r = grid_margins(X, c, basis, coef);
    double mr = *std::min_element(r.begin(), r.end());
    if (mr > best.margin) {
      best.margin = mr;
      best.c = c;
      best.coef = coef;
    }
    if (res.status != lp::Status::optimal) break;
    double cut = t - 1e-10 * (1.0 + std::abs(t));
    if (mr >= cut) {
      best.converged = true;
      break;
    }
    std::vector<std::size_t> order(r.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return r[a] < r[b] || (r[a] == r[b] && a < b);
    });
    int added = 0;
    for (std::size_t j : order) {
      if (r[j] >= cut || added >= opt.cut_batch) break;
      if (active.insert(j).second) ++added;
    }
    if (added == 0) break;
  }
  return best;
}

inline std::size_t lp_columns(int n, const TrigBasis& basis, bool fixed_c) {
  return (fixed_c ? 0 : 2 * static_cast<std::size_t>(n)) + 2 * basis.size() + 1;
}

}  // namespace detail

/// First closed orbit met by the forward (direction +1) or backward flow from
/// `seed` after a burn-in. The class is reported for the forward flow of X.
inline std::optional<ClosedOrbit> find_closed_orbit(const FieldSampler& X, const Vec& seed, int direction,
                                                   const SearchOptions& opt) {
  int n = X.dimension();
  double dt = opt.certificate_dt;
  auto field = [&](const Vec& x) {
    Vec v = X(x);
    if (direction < 0)
      for (double& e : v) e = -e;
    return v;
  };
  auto step = [&](const Vec& x, double h) {
    Vec k1 = field(x);
    Vec k2 = field(flow::axpy(0.5 * h, k1, x));
    Vec k3 = field(flow::axpy(0.5 * h, k2, x));
    Vec k4 = field(flow::axpy(h, k3, x));
    Vec out = x;
    for (int a = 0; a < 3; ++a) out[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
    return out;
  };
  Vec x = seed;
  for (double t = 0.0; t < opt.burn_in; t += dt) x = step(x, dt);
  Vec p = flow::wrap(x, n);
  x = p;
  auto offset = [&](const Vec& y, std::vector<long long>& z) {
    z.assign(n, 0);
    double e = 0.0;
    for (int a = 0; a < n; ++a) {
      double d = y[a] - p[a];
      z[a] = std::llround(d);
      e += (d - z[a]) * (d - z[a]);
    }
    return std::sqrt(e);
  };
  std::vector<long long> z;
  Vec prev = x;
  double e_prev = std::numeric_limits<double>::infinity(), e_prev2 = e_prev;
  Vec prev2 = x;
  int steps = static_cast<int>(std::ceil(opt.search_time / dt));
  for (int k = 1; k <= steps; ++k) {
    Vec next = step(x, dt);
    if (!flow::finite(next)) return std::nullopt;
    std::vector<long long> zn;
    double e = offset(next, zn);
    // e_prev is a local minimum: refine over [t_{k-2}, t_k] by golden section.
    if (k >= 2 && e_prev <= e_prev2 && e_prev < e && e_prev < 0.05) {
      std::vector<long long> zp;
      offset(prev, zp);
      bool nonzero = std::any_of(zp.begin(), zp.end(), [](long long v) { return v != 0; });
      if (nonzero) {
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double lo = 0.0, hi = 2.0 * dt;
        std::vector<long long> tmp;
        auto err = [&](double s) { return offset(step(prev2, s), tmp); };
        double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
        double fa = err(a), fb = err(b);
        for (int it = 0; it < 80; ++it) {
          if (fa < fb) {
            hi = b; b = a; fb = fa;
            a = hi - g * (hi - lo); fa = err(a);
          } else {
            lo = a; a = b; fa = fb;
            b = lo + g * (hi - lo); fb = err(b);
          }
        }
        double s = 0.5 * (lo + hi);
        double closure = err(s);
        if (closure < opt.closure_tol) {
          ClosedOrbit orb;
          orb.point = p;
          orb.period = (k - 2) * dt + s;
          orb.closure_error = closure;
          orb.homology = zp;
          if (direction < 0)
            for (auto& v : orb.homology) v = -v;
          return orb;
        }
      }
    }
    prev2 = prev;
    prev = next;
    e_prev2 = e_prev;
    e_prev = e;
    x = next;
  }
  return std::nullopt;
}

/// Looks for two closed orbits with opposite nonzero homology classes.
inline std::optional<Certificate> search_certificate(const VectorField& X, const SearchOptions& opt) {
  FieldSampler Xs(X);
  int n = X.dimension();
  int m = opt.certificate_seeds;
  std::vector<ClosedOrbit> found;
  int total = 1;
  for (int a = 0; a < n; ++a) total *= m;
  for (int dir : {1, -1}) {
    for (int s = 0; s < total; ++s) {
      Vec seed{0.0, 0.0, 0.0};
      int rem = s;
      for (int a = 0; a < n; ++a) {
        seed[a] = (rem % m + 0.5) / m;
        rem /= m;
      }
      auto orb = find_closed_orbit(Xs, seed, dir, opt);
      if (!orb) continue;
      for (const auto& other : found) {
        bool opposite = true;
        for (int a = 0; a < n; ++a) opposite = opposite && (other.homology[a] == -orb->homology[a]);
        if (opposite) return Certificate{{other, *orb}};
      }
      found.push_back(*orb);
    }
  }
  return std::nullopt;
}

struct CertificateCheck {
  bool valid = false;
  double max_closure = 0.0;
  std::string reason;
};

/// Re-integrates each certificate orbit over its period with step dt, checks
/// closure and the homology class, and that the two classes cancel.
inline CertificateCheck verify_certificate(const VectorField& X, const Certificate& cert, double dt = 1e-3,
                                           double tol = 1e-6) {
  CertificateCheck chk;
  int n = X.dimension();
  if (cert.orbits.size() != 2) {
    chk.reason = "certificate must contain exactly two orbits";
    return chk;
  }
  FieldSampler Xs(X);
  for (const auto& orb : cert.orbits) {
    Vec x = orb.point;
    double t = 0.0;
    while (t < orb.period) {
      double h = std::min(dt, orb.period - t);
      x = flow::rk4_step(Xs, x, h);
      t += h;
    }
    double e = 0.0;
    bool nonzero = false;
    for (int a = 0; a < n; ++a) {
      double d = x[a] - orb.point[a];
      long long z = std::llround(d);
      if (z != orb.homology[a]) {
        chk.reason = "orbit displacement does not match its class";
        return chk;
      }
      nonzero = nonzero || z != 0;
      e += (d - z) * (d - z);
    }
    e = std::sqrt(e);
    chk.max_closure = std::max(chk.max_closure, e);
    if (!nonzero) {
      chk.reason = "orbit class is zero";
      return chk;
    }
  }
  if (chk.max_closure >= tol) {
    chk.reason = "orbit does not close to tolerance";
    return chk;
  }
  for (int a = 0; a < n; ++a)
    if (cert.orbits[0].homology[a] + cert.orbits[1].homology[a] != 0) {
      chk.reason = "classes do not cancel";
      return chk;
    }
  chk.valid = true;
  return chk;
}

/// Decides whether some closed 1-form c.dx + dh, h of degree <= K, is
/// positive on X at every grid point.
inline FeasibilityOutcome find_transverse_closed_form(const VectorField& X, const SearchOptions& opt = {}) {
  const Grid& grid = X.grid();
  int n = grid.dimension();
  if (!(X.min_norm() > 0.0)) throw Rejected("find_transverse_closed_form: X has a zero on the grid");
  FeasibilityOutcome out;
  out.basis = TrigBasis(n, opt.truncation);
  const TrigBasis& basis = out.basis;
  out.diagnostics.K = opt.truncation;
  out.diagnostics.N = grid.resolution();
  if (2 * opt.truncation >= grid.resolution())
    throw std::invalid_argument("find_transverse_closed_form: truncation K must be below N/2");

  // Projected subgradient on the concave objective min_j (c.X_j + dh(X)_j).
  std::vector<double> c(n, 0.0), coef(basis.size(), 0.0);
  double l1 = 0.0;
  for (int a = 0; a < n; ++a) {
    c[a] = X[a].mean();
    l1 += std::abs(c[a]);
  }
  if (l1 > 0.0)
    for (double& v : c) v /= l1;
  else
    c[0] = 1.0;
  std::vector<double> best_c = c, best_coef = coef;
  double best = -std::numeric_limits<double>::infinity();
  std::set<std::size_t> active;
  for (int it = 0; it < opt.budget; ++it) {
    auto r = grid_margins(X, c, basis, coef);
    std::size_t j = static_cast<std::size_t>(std::min_element(r.begin(), r.end()) - r.begin());
    if (r[j] > best) {
      best = r[j];
      best_c = c;
      best_coef = coef;
    }
    active.insert(j);
    out.diagnostics.iterations = it + 1;
    Vec v = X.at(j);
    auto d = derivative_row(X, basis, j);
    double norm = 0.0;
    for (int a = 0; a < n; ++a) norm += v[a] * v[a];
    for (double e : d) norm += e * e;
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    double step = 0.2 / (norm * std::sqrt(it + 1.0));
    for (int a = 0; a < n; ++a) c[a] += step * v[a];
    for (std::size_t m = 0; m < d.size(); ++m) coef[m] += step * d[m];
    project_l1(c.data(), c.size(), 1.0);
    project_l1(coef.data(), coef.size(), opt.h_bound);
  }

  if (detail::lp_columns(n, basis, false) <= static_cast<std::size_t>(opt.lp_max_columns)) {
    auto seed = detail::coarse_points(grid);
    active.insert(seed.begin(), seed.end());
    auto lp = detail::cutting_plane(X, basis, nullptr, opt, active);
    out.diagnostics.lp_used = true;
    out.diagnostics.lp_converged = lp.converged;
    out.diagnostics.lp_rounds = lp.rounds;
    out.diagnostics.pivots = lp.pivots;
    if (lp.margin >= best) {
      best = lp.margin;
      best_c = lp.c;
      best_coef = lp.coef;
    }
  }

  // Scale to ||c||_1 = 1 when the optimum sits inside the ball.
  double norm1 = 0.0;
  for (double v : best_c) norm1 += std::abs(v);
  if (best > 0.0 && norm1 > 0.0 && norm1 < 1.0) {
    for (double& v : best_c) v /= norm1;
    for (double& v : best_coef) v /= norm1;
    best /= norm1;
  }
  out.c = best_c;
  out.coefficients = best_coef;
  out.h = synthesize(grid, basis, best_coef);
  out.margin = best;

  if (best > opt.epsilon_margin) {
    const Grid fine(n, 2 * grid.resolution());
    std::vector<ScalarField> comps;
    for (int a = 0; a < n; ++a) comps.push_back(spectral::resample(X[a], fine.resolution()));
    VectorField Xf(std::move(comps));
    auto rf = grid_margins(Xf, best_c, basis, best_coef);
    out.fine_margin = *std::min_element(rf.begin(), rf.end());
    out.verdict = out.fine_margin > 0.0 ? Verdict::feasible : Verdict::undecided;
    return out;
  }
  if (auto cert = search_certificate(X, opt)) {
    out.certificate = *cert;
    out.verdict = Verdict::infeasible;
  }
  return out;
}

/// Rounds the periods to a rational vector p/q with q <= D, keeping h when the
/// margin survives and re-optimizing h with the periods fixed otherwise.
inline FeasibilityOutcome rationalize_periods(const FeasibilityOutcome& in, const VectorField& X, long long D,
                                              const SearchOptions& opt = {}) {
  if (in.verdict != Verdict::feasible || !(in.margin > 0.0))
    throw Rejected(std::string("rationalize_periods: outcome is ") + to_string(in.verdict) + ", not feasible");
  if (D < 1) throw std::invalid_argument("rationalize_periods: denominator bound must be >= 1");
  int n = X.dimension();
  double cmax = 0.0;
  for (double v : in.c) cmax = std::max(cmax, std::abs(v));
  double s = 1.0 / cmax;
  std::vector<double> cs(in.c);
  for (double& v : cs) v *= s;
  ScalarField hs = s * in.h;
  std::vector<double> coefs(in.coefficients);
  for (double& v : coefs) v *= s;
  ScalarField dhX = pair(gradient_form(hs), X);

  struct Candidate {
    long long q;
    double err;
  };
  std::vector<Candidate> cands;
  for (long long q = 1; q <= D; ++q) {
    double err = 0.0;
    for (double v : cs) err = std::max(err, std::abs(v - std::round(v * q) / q));
    cands.push_back({q, err});
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return a.err < b.err - 1e-15 || (std::abs(a.err - b.err) <= 1e-15 && a.q < b.q);
  });
  double xmax = 0.0;
  for (std::size_t j = 0; j < X.grid().size(); ++j) {
    Vec v = X.at(j);
    xmax = std::max(xmax, std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
  }
  for (const auto& cand : cands) {
    std::vector<long long> p(n);
    std::vector<double> cq(n);
    for (int a = 0; a < n; ++a) {
      p[a] = std::llround(cs[a] * cand.q);
      cq[a] = static_cast<double>(p[a]) / cand.q;
    }
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < X.grid().size(); ++j) {
      double v = dhX[j];
      for (int a = 0; a < n; ++a) v += cq[a] * X[a][j];
      m = std::min(m, v);
    }
    FeasibilityOutcome out = in;
    out.h = hs;
    out.coefficients = coefs;
    if (!(m > 0.0) && !in.basis.modes.empty() &&
        detail::lp_columns(n, in.basis, true) <= static_cast<std::size_t>(opt.lp_max_columns)) {
      std::set<std::size_t> active;
      auto seed = detail::coarse_points(X.grid());
      active.insert(seed.begin(), seed.end());
      auto lp = detail::cutting_plane(X, in.basis, &cq, opt, active);
      if (lp.margin > m) {
        m = lp.margin;
        out.coefficients = lp.coef;
        out.h = synthesize(X.grid(), in.basis, lp.coef);
      }
    }
    if (!(m > 0.0)) continue;
    long long g = cand.q;
    for (long long v : p) g = std::gcd(g, std::llabs(v));
    out.denominator = cand.q / g;
    out.numerators.clear();
    for (long long v : p) out.numerators.push_back(v / g);
    out.c = cq;
    out.margin = m;
    out.margin_before_rounding = s * in.margin;
    double dist = 0.0;
    for (int a = 0; a < n; ++a) dist += (cs[a] - cq[a]) * (cs[a] - cq[a]);
    out.margin_loss_bound = std::sqrt(dist) * xmax;
    return out;
  }
  double dist = 0.0;
  for (double v : cs) {
    double e = v - std::round(v * D) / D;
    dist += e * e;
  }
  throw Rejected("rationalize_periods: denominator bound " + std::to_string(D) +
                 " is insufficient (margin-loss bound " + std::to_string(std::sqrt(dist) * xmax) + ")");
}

inline CrossSection build_cross_section(const FeasibilityOutcome& outcome, const VectorField& X, int resolution,
                                        double level = 0.0) {
  if (!outcome.rational()) throw std::invalid_argument("build_cross_section: periods are not rationalized");
  if (!(outcome.margin > 0.0)) throw Rejected("build_cross_section: non-positive margin");
  return flow::make_cross_section(X, outcome.angle(), outcome.denominator, level, resolution);
}

struct CrossingReport {
  int orbits = 0;
  int misses = 0;
  double max_time = 0.0;
  double time_bound = 0.0;
};

/// Random orbits must meet the section within 2 q / margin.
inline CrossingReport check_section_crossings(const VectorField& X, const CrossSection& cs, int orbits = 1000,
                                              double dt = 1e-3, std::uint64_t seed = 20240601) {
  CrossingReport rep;
  rep.orbits = orbits;
  rep.time_bound = 2.0 * static_cast<double>(cs.denominator) / cs.margin;
  const AngleFunction& G = cs.level_set.function();
  FieldSampler Xs(X);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  int n = X.dimension();
  for (int k = 0; k < orbits; ++k) {
    Vec x{0.0, 0.0, 0.0};
    for (int a = 0; a < n; ++a) x[a] = uni(rng);
    double g0 = G.value(x) - cs.level;
    double target = cs.level + std::floor(g0) + 1.0;
    auto c = flow::advance_until(Xs, G, x, target, dt, rep.time_bound);
    if (!c.found) ++rep.misses;
    else rep.max_time = std::max(rep.max_time, c.time);
  }
  return rep;
}

struct BackwardReport {
  double d_theta = 0.0;
  double d_star_theta = 0.0;
  double omega_closedness = 0.0;
  double min_abs_omega_x = 0.0;
  int sign = 0;              // sign of omega(X) = (*theta)(X)
  FeasibilityOutcome outcome;
  std::optional<CrossSection> section;
  bool success = false;
};

/// From a metric making i_X Omega harmonic, builds omega = *_g i_X Omega,
/// rationalizes its class and extracts a cross section.
inline BackwardReport verify_main_theorem_backward(const VectorField& X, const DifferentialForm& Omega,
                                                   const MetricField& g, long long D = 64, int resolution = 64,
                                                   double tol = harmonic::default_tolerance,
                                                   const SearchOptions& opt = {}) {
  BackwardReport rep;
  DifferentialForm theta = interior_product(X, Omega);
  HarmonicResiduals hr = harmonic_residuals(g, theta);
  rep.d_theta = hr.closed.sup;
  rep.d_star_theta = hr.coclosed.sup;
  if (!hr.harmonic(tol))
    throw Rejected("backward: i_X Omega is not harmonic for the candidate metric (||d theta|| = " +
                   std::to_string(rep.d_theta) + ", ||d * theta|| = " + std::to_string(rep.d_star_theta) + ")");
  DifferentialForm omega = hodge_star(g, theta);
  rep.omega_closedness = exterior_derivative(omega).norm().sup;
  ScalarField wx = pair(omega, X);
  double lo = wx.min(), hi = wx.max();
  if (lo > 0.0) rep.sign = 1;
  else if (hi < 0.0) rep.sign = -1;
  rep.min_abs_omega_x = rep.sign > 0 ? lo : (rep.sign < 0 ? -hi : 0.0);
  if (rep.sign == 0) throw Rejected("backward: omega(X) vanishes or changes sign");
  AngleFunction F = AngleFunction::from_closed_form(static_cast<double>(rep.sign) * omega);
  FeasibilityOutcome fo;
  fo.verdict = Verdict::feasible;
  fo.c = F.periods();
  fo.h = F.primitive();
  fo.margin = F.margin(X);
  fo.fine_margin = fo.margin;
  fo.diagnostics.N = X.grid().resolution();
  if (!(fo.margin > 0.0)) throw Rejected("backward: primitive decomposition lost transversality");
  rep.outcome = rationalize_periods(fo, X, D, opt);
  rep.section = build_cross_section(rep.outcome, X, resolution);
  rep.success = rep.section->margin > 0.0;
  return rep;
}

}  // namespace tsec::search
