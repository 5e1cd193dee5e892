#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace tsec::lp {

/// maximize obj . x  subject to  A x <= b,  x >= 0,  with b >= 0 so that the
/// origin is feasible and no phase one is needed.
struct Problem {
  int rows = 0;
  int cols = 0;
  std::vector<double> A;  // row-major rows x cols
  std::vector<double> b;
  std::vector<double> obj;

  Problem(int r, int c) : rows(r), cols(c), A(static_cast<std::size_t>(r) * c, 0.0), b(r, 0.0), obj(c, 0.0) {}
  double& a(int i, int j) { return A[static_cast<std::size_t>(i) * cols + j]; }
};

enum class Status { optimal, unbounded, pivot_limit };

struct Result {
  Status status = Status::pivot_limit;
  std::vector<double> x;
  double objective = 0.0;
  long pivots = 0;
};

/// Dense tableau simplex with Dantzig pricing. The right-hand side is perturbed
/// by distinct tiny amounts so that no vertex is degenerate; the final basis
/// is then re-evaluated against the original b through the slack columns,
/// which hold B^{-1}. Bland's rule takes over after a run of degenerate
/// pivots as a second guard against cycling.
inline Result solve(const Problem& p, long max_pivots = 200000) {
  const int m = p.rows;
  const int n = p.cols;
  const int width = n + m + 1;
  for (double v : p.b)
    if (v < 0.0) throw std::invalid_argument("simplex: right-hand side must be non-negative");
  std::vector<double> T(static_cast<std::size_t>(m + 1) * width, 0.0);
  auto at = [&](int i, int j) -> double& { return T[static_cast<std::size_t>(i) * width + j]; };
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) at(i, j) = p.A[static_cast<std::size_t>(i) * n + j];
    at(i, n + i) = 1.0;
    double frac = std::fmod(0.6180339887498949 * (i + 1), 1.0);
    at(i, width - 1) = p.b[i] + 1e-7 * (1.0 + std::abs(p.b[i])) * (0.5 + frac);
  }
  for (int j = 0; j < n; ++j) at(m, j) = -p.obj[j];
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;

  const double eps = 1e-11;        // pivot element
  const double price_eps = 1e-9;   // reduced cost
  Result res;
  int degenerate_run = 0;
  bool bland = false;
  std::vector<double> pivot_row(width);
  while (true) {
    int enter = -1;
    double best = -price_eps;
    for (int j = 0; j < n + m; ++j) {
      double rc = at(m, j);
      if (rc < best) {
        enter = j;
        if (bland) break;
        best = rc;
      }
    }
    if (enter < 0) {
      res.status = Status::optimal;
      break;
    }
    int leave = -1;
    double ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      double aie = at(i, enter);
      if (aie > eps) {
        double r = std::max(at(i, width - 1), 0.0) / aie;
        if (r < ratio - 1e-14 || (std::abs(r - ratio) <= 1e-14 && leave >= 0 && basis[i] < basis[leave])) {
          ratio = r;
          leave = i;
        }
      }
    }
    if (leave < 0) {
      res.status = Status::unbounded;
      break;
    }
    if (res.pivots >= max_pivots) {
      res.status = Status::pivot_limit;
      break;
    }
    degenerate_run = (ratio <= 1e-14) ? degenerate_run + 1 : 0;
    bland = degenerate_run > 50;

    double piv = at(leave, enter);
    for (int j = 0; j < width; ++j) pivot_row[j] = at(leave, j) / piv;
    for (int j = 0; j < width; ++j) at(leave, j) = pivot_row[j];
    for (int i = 0; i <= m; ++i) {
      if (i == leave) continue;
      double f = at(i, enter);
      if (f == 0.0) continue;
      double* row = &at(i, 0);
      for (int j = 0; j < width; ++j) row[j] -= f * pivot_row[j];
      row[enter] = 0.0;
      if (i < m && row[width - 1] < 0.0 && row[width - 1] > -1e-12) row[width - 1] = 0.0;
    }
    basis[leave] = enter;
    ++res.pivots;
  }
  res.x.assign(n, 0.0);
  for (int r = 0; r < m; ++r) {
    if (basis[r] >= n) continue;
    double v = 0.0;
    for (int i = 0; i < m; ++i) v += at(r, n + i) * p.b[i];
    res.x[basis[r]] = std::max(v, 0.0);
  }
  res.objective = 0.0;
  for (int j = 0; j < n; ++j) res.objective += p.obj[j] * res.x[j];
  return res;
}

}  // namespace tsec::lp
