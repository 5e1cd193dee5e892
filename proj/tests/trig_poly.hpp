#pragma once

// Exact trigonometric polynomials on T^n, stored as complex Fourier
// coefficients. Derivatives and products are computed symbolically and serve
// as the reference for the grid operators.

#include <cmath>
#include <complex>
#include <map>
#include <random>

#include "tsec/forms.hpp"

namespace oracle {

using Wave = std::array<int, 3>;
using Cplx = std::complex<double>;

struct TrigPoly {
  std::map<Wave, Cplx> c;

  static TrigPoly constant(double v) {
    TrigPoly p;
    if (v != 0.0) p.c[{0, 0, 0}] = v;
    return p;
  }

  // a cos(2 pi k.x) + b sin(2 pi k.x)
  static TrigPoly mode(const Wave& k, double a, double b) {
    TrigPoly p;
    Wave m{-k[0], -k[1], -k[2]};
    if (k == m) {
      p.c[k] = a;
      return p;
    }
    p.c[k] += Cplx(a, -b) * 0.5;
    p.c[m] += Cplx(a, b) * 0.5;
    return p;
  }

  double operator()(const tsec::Vec& x) const {
    double v = 0.0;
    for (const auto& [k, a] : c) {
      double ph = 2.0 * M_PI * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
      v += (a * Cplx(std::cos(ph), std::sin(ph))).real();
    }
    return v;
  }

  TrigPoly d(int axis) const {
    TrigPoly p;
    for (const auto& [k, a] : c)
      if (k[axis] != 0) p.c[k] = a * Cplx(0.0, 2.0 * M_PI * k[axis]);
    return p;
  }

  int degree() const {
    int m = 0;
    for (const auto& [k, a] : c)
      for (int v : k) m = std::max(m, std::abs(v));
    return m;
  }

  friend TrigPoly operator+(TrigPoly a, const TrigPoly& b) {
    for (const auto& [k, v] : b.c) a.c[k] += v;
    return a;
  }
  friend TrigPoly operator-(TrigPoly a, const TrigPoly& b) {
    for (const auto& [k, v] : b.c) a.c[k] -= v;
    return a;
  }
  friend TrigPoly operator*(double s, TrigPoly a) {
    for (auto& [k, v] : a.c) v *= s;
    return a;
  }
  friend TrigPoly operator*(const TrigPoly& a, const TrigPoly& b) {
    TrigPoly p;
    for (const auto& [ka, va] : a.c)
      for (const auto& [kb, vb] : b.c) p.c[{ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2]}] += va * vb;
    return p;
  }

  tsec::ScalarField sample(const tsec::Grid& g) const {
    return tsec::ScalarField::sample(g, [this](const tsec::Vec& x) { return (*this)(x); });
  }
};

inline TrigPoly random_poly(std::mt19937_64& rng, int dim, int K, int terms) {
  std::uniform_int_distribution<int> wave(-K, K);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  TrigPoly p = TrigPoly::constant(amp(rng));
  for (int t = 0; t < terms; ++t) {
    Wave k{0, 0, 0};
    for (int a = 0; a < dim; ++a) k[a] = wave(rng);
    p = p + TrigPoly::mode(k, amp(rng), amp(rng));
  }
  return p;
}

// A k-form as a map from increasing index tuples to polynomial coefficients.
struct SymForm {
  int n = 2;
  int k = 0;
  std::map<std::vector<int>, TrigPoly> coef;

  TrigPoly at(const std::vector<int>& I) const {
    auto it = coef.find(I);
    return it == coef.end() ? TrigPoly{} : it->second;
  }

  tsec::DifferentialForm sample(const tsec::Grid& g) const {
    std::vector<tsec::ScalarField> out;
    for (const auto& I : tsec::multi_indices(n, k)) out.push_back(at(I).sample(g));
    return tsec::DifferentialForm(k, std::move(out));
  }
};

inline std::vector<std::vector<int>> subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  for (int mask = 0; mask < (1 << n); ++mask) {
    if (__builtin_popcount(mask) != k) continue;
    std::vector<int> I;
    for (int i = 0; i < n; ++i)
      if (mask & (1 << i)) I.push_back(i);
    out.push_back(I);
  }
  return out;
}

// Sign of the permutation that sorts the concatenation of I and J; 0 on overlap.
inline int shuffle_sign(const std::vector<int>& I, const std::vector<int>& J) {
  std::vector<int> v = I;
  v.insert(v.end(), J.begin(), J.end());
  int s = 1;
  for (std::size_t a = 0; a < v.size(); ++a)
    for (std::size_t b = a + 1; b < v.size(); ++b) {
      if (v[a] == v[b]) return 0;
      if (v[a] > v[b]) s = -s;
    }
  return s;
}

inline SymForm random_form(std::mt19937_64& rng, int n, int k, int K, int terms) {
  SymForm f{n, k, {}};
  for (const auto& I : subsets(n, k)) f.coef[I] = random_poly(rng, n, K, terms);
  return f;
}

// d(sum a_I dx^I) = sum_{I,j} d_j a_I dx^j ^ dx^I
inline SymForm d(const SymForm& a) {
  SymForm out{a.n, a.k + 1, {}};
  for (const auto& [I, p] : a.coef)
    for (int j = 0; j < a.n; ++j) {
      int s = shuffle_sign({j}, I);
      if (s == 0) continue;
      std::vector<int> K = I;
      K.push_back(j);
      std::sort(K.begin(), K.end());
      out.coef[K] = out.at(K) + static_cast<double>(s) * p.d(j);
    }
  return out;
}

inline SymForm wedge(const SymForm& a, const SymForm& b) {
  SymForm out{a.n, a.k + b.k, {}};
  for (const auto& [I, p] : a.coef)
    for (const auto& [J, q] : b.coef) {
      int s = shuffle_sign(I, J);
      if (s == 0) continue;
      std::vector<int> K = I;
      K.insert(K.end(), J.begin(), J.end());
      std::sort(K.begin(), K.end());
      out.coef[K] = out.at(K) + static_cast<double>(s) * (p * q);
    }
  return out;
}

inline SymForm interior(const std::vector<TrigPoly>& X, const SymForm& a) {
  SymForm out{a.n, a.k - 1, {}};
  for (const auto& [I, p] : a.coef)
    for (std::size_t pos = 0; pos < I.size(); ++pos) {
      std::vector<int> J = I;
      J.erase(J.begin() + static_cast<long>(pos));
      double s = (pos % 2 == 0) ? 1.0 : -1.0;
      out.coef[J] = out.at(J) + s * (X[I[pos]] * p);
    }
  return out;
}

// Determinant by cofactor expansion (k <= 3).
inline double det(const std::vector<std::vector<double>>& m) {
  std::size_t k = m.size();
  if (k == 0) return 1.0;
  if (k == 1) return m[0][0];
  double s = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<std::vector<double>> sub;
    for (std::size_t r = 1; r < k; ++r) {
      std::vector<double> row;
      for (std::size_t q = 0; q < k; ++q)
        if (q != c) row.push_back(m[r][q]);
      sub.push_back(row);
    }
    s += ((c % 2 == 0) ? 1.0 : -1.0) * m[0][c] * det(sub);
  }
  return s;
}

inline std::vector<std::vector<double>> inverse(const std::vector<std::vector<double>>& g) {
  std::size_t n = g.size();
  double D = det(g);
  std::vector<std::vector<double>> inv(n, std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      std::vector<std::vector<double>> sub;
      for (std::size_t i = 0; i < n; ++i) {
        if (i == c) continue;
        std::vector<double> row;
        for (std::size_t j = 0; j < n; ++j)
          if (j != r) row.push_back(g[i][j]);
        sub.push_back(row);
      }
      inv[r][c] = (((r + c) % 2 == 0) ? 1.0 : -1.0) * det(sub) / D;
    }
  return inv;
}

// Hodge star for a constant metric, from the defining identity
// e_J ^ *b = <e_J, b>_g vol_g with the Gram-determinant inner product on k-forms.
inline SymForm star(const std::vector<std::vector<double>>& g, const SymForm& a) {
  int n = a.n;
  auto ginv = inverse(g);
  double vol = std::sqrt(det(g));
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  SymForm out{n, n - a.k, {}};
  for (const auto& J : subsets(n, a.k)) {
    std::vector<int> L;
    std::set_difference(all.begin(), all.end(), J.begin(), J.end(), std::back_inserter(L));
    TrigPoly acc;
    for (const auto& [I, p] : a.coef) {
      std::vector<std::vector<double>> gram(J.size(), std::vector<double>(I.size()));
      for (std::size_t r = 0; r < J.size(); ++r)
        for (std::size_t c = 0; c < I.size(); ++c) gram[r][c] = ginv[J[r]][I[c]];
      acc = acc + det(gram) * p;
    }
    out.coef[L] = static_cast<double>(shuffle_sign(J, L)) * vol * acc;
  }
  return out;
}

inline SymForm scale(double s, SymForm a) {
  for (auto& [I, p] : a.coef) p = s * p;
  return a;
}

inline SymForm add(SymForm a, const SymForm& b) {
  for (const auto& [I, p] : b.coef) a.coef[I] = a.at(I) + p;
  return a;
}

// delta = (-1)^k *^{-1} d * with *^{-1} = (-1)^{k(n-k)} * on k-forms.
inline SymForm codifferential(const std::vector<std::vector<double>>& g, const SymForm& a) {
  int n = a.n, k = a.k;
  SymForm inner = d(star(g, a));  // (n-k+1)-form
  int m = inner.k;
  double inv_sign = ((m * (n - m)) % 2 == 0) ? 1.0 : -1.0;
  double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return scale(sign * inv_sign, star(g, inner));
}

inline SymForm laplacian(const std::vector<std::vector<double>>& g, const SymForm& a) {
  SymForm out{a.n, a.k, {}};
  if (a.k > 0) out = add(out, d(codifferential(g, a)));
  if (a.k < a.n) out = add(out, codifferential(g, d(a)));
  return out;
}

inline double sup_error(const tsec::DifferentialForm& got, const SymForm& want) {
  double e = 0.0;
  const auto& g = got.grid();
  auto idx = tsec::multi_indices(want.n, want.k);
  for (std::size_t p = 0; p < idx.size(); ++p) {
    TrigPoly w = want.at(idx[p]);
    for (std::size_t i = 0; i < g.size(); ++i) e = std::max(e, std::abs(got[p][i] - w(g.point(i))));
  }
  return e;
}

inline std::vector<std::vector<double>> random_spd(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<std::vector<double>> a(n, std::vector<double>(n)), g(n, std::vector<double>(n, 0.0));
  for (auto& r : a)
    for (auto& v : r) v = u(rng);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) g[i][j] += a[i][k] * a[j][k];
      if (i == j) g[i][j] += 1.0;
    }
  return g;
}

inline tsec::MetricField constant_metric(const tsec::Grid& grid, const std::vector<std::vector<double>>& g) {
  int n = grid.dimension();
  return tsec::MetricField::sample(grid, [&](const tsec::Vec&) {
    tsec::SmallMatrix m{n, {}};
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m(r, c) = g[r][c];
    return m;
  });
}

}  // namespace oracle
