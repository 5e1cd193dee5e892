#pragma once

#include "tsec/grid.hpp"
#include "tsec/spectral.hpp"

namespace tsec {

using MultiIndex = std::vector<int>;

inline int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  int r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Increasing multi-indices I subset {0..n-1}, |I| = k, in lexicographic order.
inline std::vector<MultiIndex> multi_indices(int n, int k) {
  std::vector<MultiIndex> out;
  if (k < 0 || k > n) return out;
  MultiIndex cur(k);
  for (int i = 0; i < k; ++i) cur[i] = i;
  while (true) {
    out.push_back(cur);
    int i = k - 1;
    while (i >= 0 && cur[i] == n - k + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

inline int position_of(int n, const MultiIndex& idx) {
  auto all = multi_indices(n, static_cast<int>(idx.size()));
  for (std::size_t p = 0; p < all.size(); ++p)
    if (all[p] == idx) return static_cast<int>(p);
  throw std::invalid_argument("multi-index is not increasing or out of range");
}

inline MultiIndex complement(int n, const MultiIndex& idx) {
  MultiIndex out;
  for (int i = 0; i < n; ++i)
    if (std::find(idx.begin(), idx.end(), i) == idx.end()) out.push_back(i);
  return out;
}

/// Sign of the permutation sorting the concatenation (a, b) of two disjoint
/// increasing index lists; 0 if they overlap.
inline int merge_sign(const MultiIndex& a, const MultiIndex& b) {
  int inversions = 0;
  for (int x : a)
    for (int y : b) {
      if (x == y) return 0;
      if (x > y) ++inversions;
    }
  return (inversions % 2) ? -1 : 1;
}

inline MultiIndex merged(const MultiIndex& a, const MultiIndex& b) {
  MultiIndex out(a);
  out.insert(out.end(), b.begin(), b.end());
  std::sort(out.begin(), out.end());
  return out;
}

inline std::string basis_name(const MultiIndex& idx) {
  if (idx.empty()) return "1";
  std::string s;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) s += "^";
    s += "d";
    s += axis_name(idx[i]);
  }
  return s;
}

/// sum_I a_I dx^I over increasing multi-indices I with |I| = degree.
class DifferentialForm {
public:
  DifferentialForm() = default;
  DifferentialForm(int degree, std::vector<ScalarField> coefficients)
      : degree_(degree), coeffs_(std::move(coefficients)) {
    if (coeffs_.empty()) throw std::invalid_argument("form: no coefficient fields");
    grid_ = coeffs_.front().grid();
    int n = grid_.dimension();
    if (n < 2) throw std::invalid_argument("form: ambient torus must be T^2 or T^3");
    if (degree_ < 0 || degree_ > n)
      throw std::invalid_argument("form: degree " + std::to_string(degree_) + " invalid on T^" +
                                  std::to_string(n));
    if (static_cast<int>(coeffs_.size()) != binomial(n, degree_))
      throw std::invalid_argument("form: expected C(n,k) = " + std::to_string(binomial(n, degree_)) +
                                  " coefficients, got " + std::to_string(coeffs_.size()));
    for (const auto& c : coeffs_) require_same_grid(grid_, c.grid(), "form coefficients");
  }

  static DifferentialForm zero(const Grid& grid, int degree) {
    std::vector<ScalarField> c(binomial(grid.dimension(), degree), ScalarField::constant(grid, 0.0));
    return DifferentialForm(degree, std::move(c));
  }

  /// Form with constant coefficients, listed in multi-index order.
  static DifferentialForm constant(const Grid& grid, int degree, const std::vector<double>& values) {
    std::vector<ScalarField> c;
    for (double v : values) c.push_back(ScalarField::constant(grid, v));
    return DifferentialForm(degree, std::move(c));
  }

  static DifferentialForm function(const ScalarField& f) { return DifferentialForm(0, {f}); }

  /// density * dx^1 ^ ... ^ dx^n
  static DifferentialForm volume(const ScalarField& density) { return DifferentialForm(density.grid().dimension(), {density}); }

  int degree() const { return degree_; }
  int dimension() const { return grid_.dimension(); }
  const Grid& grid() const { return grid_; }
  const std::vector<ScalarField>& coefficients() const { return coeffs_; }
  const ScalarField& operator[](std::size_t p) const { return coeffs_[p]; }
  const ScalarField& coefficient(const MultiIndex& idx) const {
    return coeffs_[position_of(dimension(), idx)];
  }
  std::vector<MultiIndex> indices() const { return multi_indices(dimension(), degree_); }

  ResidualReport norm() const { return residual_of(coeffs_, grid_); }

  /// Qualifies as a volume form: top degree with everywhere-positive coefficient.
  bool is_volume_form() const { return degree_ == dimension() && coeffs_.front().min() > 0.0; }

  friend DifferentialForm operator+(const DifferentialForm& a, const DifferentialForm& b) {
    a.require_compatible(b);
    std::vector<ScalarField> c;
    for (std::size_t p = 0; p < a.coeffs_.size(); ++p) c.push_back(a.coeffs_[p] + b.coeffs_[p]);
    return DifferentialForm(a.degree_, std::move(c));
  }
  friend DifferentialForm operator-(const DifferentialForm& a, const DifferentialForm& b) {
    a.require_compatible(b);
    std::vector<ScalarField> c;
    for (std::size_t p = 0; p < a.coeffs_.size(); ++p) c.push_back(a.coeffs_[p] - b.coeffs_[p]);
    return DifferentialForm(a.degree_, std::move(c));
  }
  friend DifferentialForm operator*(double s, const DifferentialForm& a) {
    std::vector<ScalarField> c;
    for (const auto& f : a.coeffs_) c.push_back(s * f);
    return DifferentialForm(a.degree_, std::move(c));
  }
  friend DifferentialForm operator*(const ScalarField& s, const DifferentialForm& a) {
    std::vector<ScalarField> c;
    for (const auto& f : a.coeffs_) c.push_back(s * f);
    return DifferentialForm(a.degree_, std::move(c));
  }

private:
  void require_compatible(const DifferentialForm& b) const {
    require_same_grid(grid_, b.grid_, "form arithmetic");
    if (degree_ != b.degree_) throw std::invalid_argument("form arithmetic: degree mismatch");
  }

  int degree_ = 0;
  Grid grid_;
  std::vector<ScalarField> coeffs_;
};

class VectorField {
public:
  VectorField() = default;
  explicit VectorField(std::vector<ScalarField> components) : comps_(std::move(components)) {
    if (comps_.empty()) throw std::invalid_argument("vector field: no components");
    grid_ = comps_.front().grid();
    if (static_cast<int>(comps_.size()) != grid_.dimension())
      throw std::invalid_argument("vector field: component count must equal dimension");
    for (const auto& c : comps_) require_same_grid(grid_, c.grid(), "vector field components");
  }

  static VectorField constant(const Grid& grid, const std::vector<double>& v) {
    std::vector<ScalarField> c;
    for (double x : v) c.push_back(ScalarField::constant(grid, x));
    return VectorField(std::move(c));
  }

  static VectorField sample(const Grid& grid, const std::function<Vec(const Vec&)>& fn) {
    int n = grid.dimension();
    std::vector<std::vector<double>> v(n, std::vector<double>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      Vec y = fn(grid.point(i));
      for (int a = 0; a < n; ++a) v[a][i] = y[a];
    }
    std::vector<ScalarField> c;
    for (auto& comp : v) c.emplace_back(grid, std::move(comp));
    return VectorField(std::move(c));
  }

  int dimension() const { return grid_.dimension(); }
  const Grid& grid() const { return grid_; }
  const ScalarField& operator[](int a) const { return comps_[a]; }
  const std::vector<ScalarField>& components() const { return comps_; }

  Vec at(std::size_t idx) const {
    Vec v{0.0, 0.0, 0.0};
    for (int a = 0; a < dimension(); ++a) v[a] = comps_[a][idx];
    return v;
  }

  /// min over the grid of the Euclidean length; > 0 certifies non-singular samples.
  double min_norm() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      Vec v = at(i);
      m = std::min(m, std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
    }
    return m;
  }

  double max_norm() const {
    double m = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      Vec v = at(i);
      m = std::max(m, std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
    }
    return m;
  }

  friend VectorField operator*(const ScalarField& s, const VectorField& x) {
    std::vector<ScalarField> c;
    for (const auto& f : x.comps_) c.push_back(s * f);
    return VectorField(std::move(c));
  }
  friend VectorField operator*(double s, const VectorField& x) {
    std::vector<ScalarField> c;
    for (const auto& f : x.comps_) c.push_back(s * f);
    return VectorField(std::move(c));
  }

private:
  Grid grid_;
  std::vector<ScalarField> comps_;
};

/// Small dense matrix used pointwise by metric algebra (n <= 3).
struct SmallMatrix {
  int n = 0;
  std::array<double, 9> a{};

  double& operator()(int i, int j) { return a[i * 3 + j]; }
  double operator()(int i, int j) const { return a[i * 3 + j]; }

  static SmallMatrix identity(int n) {
    SmallMatrix m{n, {}};
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double determinant() const {
    const auto& m = *this;
    switch (n) {
      case 1: return m(0, 0);
      case 2: return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
      case 3:
        return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
               m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
               m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
      default: return 1.0;
    }
  }

  SmallMatrix inverse() const {
    const auto& m = *this;
    SmallMatrix r{n, {}};
    double det = determinant();
    if (n == 1) {
      r(0, 0) = 1.0 / m(0, 0);
    } else if (n == 2) {
      r(0, 0) = m(1, 1) / det;
      r(0, 1) = -m(0, 1) / det;
      r(1, 0) = -m(1, 0) / det;
      r(1, 1) = m(0, 0) / det;
    } else if (n == 3) {
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          int i1 = (j + 1) % 3, i2 = (j + 2) % 3, j1 = (i + 1) % 3, j2 = (i + 2) % 3;
          r(i, j) = (m(i1, j1) * m(i2, j2) - m(i1, j2) * m(i2, j1)) / det;
        }
    }
    return r;
  }

  /// Determinant of the submatrix with the given (increasing) rows and columns.
  double minor(const MultiIndex& rows, const MultiIndex& cols) const {
    SmallMatrix s{static_cast<int>(rows.size()), {}};
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < cols.size(); ++j) s(static_cast<int>(i), static_cast<int>(j)) = (*this)(rows[i], cols[j]);
    return s.n == 0 ? 1.0 : s.determinant();
  }

  /// Positive definiteness by leading principal minors (Sylvester).
  bool positive_definite() const {
    for (int k = 1; k <= n; ++k) {
      SmallMatrix s{k, {}};
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) s(i, j) = (*this)(i, j);
      if (!(s.determinant() > 0.0)) return false;
    }
    return true;
  }
};

/// Pointwise symmetric matrix field g_ij(x), stored as the upper triangle
/// (0,0),(0,1),..,(0,n-1),(1,1),... .
class MetricField {
public:
  MetricField() = default;
  explicit MetricField(std::vector<ScalarField> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw std::invalid_argument("metric: no entries");
    grid_ = entries_.front().grid();
    int n = grid_.dimension();
    if (static_cast<int>(entries_.size()) != n * (n + 1) / 2)
      throw std::invalid_argument("metric: expected n(n+1)/2 entries");
    for (const auto& e : entries_) require_same_grid(grid_, e.grid(), "metric entries");
  }

  static MetricField euclidean(const Grid& grid) {
    return sample(grid, [n = grid.dimension()](const Vec&) { return SmallMatrix::identity(n); });
  }

  static MetricField sample(const Grid& grid, const std::function<SmallMatrix(const Vec&)>& fn) {
    int n = grid.dimension();
    std::vector<std::vector<double>> v(n * (n + 1) / 2, std::vector<double>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      SmallMatrix m = fn(grid.point(i));
      int p = 0;
      for (int r = 0; r < n; ++r)
        for (int c = r; c < n; ++c) v[p++][i] = m(r, c);
    }
    std::vector<ScalarField> e;
    for (auto& x : v) e.emplace_back(grid, std::move(x));
    return MetricField(std::move(e));
  }

  int dimension() const { return grid_.dimension(); }
  const Grid& grid() const { return grid_; }
  const std::vector<ScalarField>& entries() const { return entries_; }

  static int entry_position(int n, int r, int c) {
    if (r > c) std::swap(r, c);
    return r * n - r * (r - 1) / 2 + (c - r);
  }
  const ScalarField& entry(int r, int c) const { return entries_[entry_position(dimension(), r, c)]; }

  SmallMatrix at(std::size_t idx) const {
    int n = dimension();
    SmallMatrix m{n, {}};
    int p = 0;
    for (int r = 0; r < n; ++r)
      for (int c = r; c < n; ++c) {
        m(r, c) = entries_[p][idx];
        m(c, r) = entries_[p][idx];
        ++p;
      }
    return m;
  }

  /// Throws naming the first grid index where g is not positive definite.
  void require_spd() const {
    for (std::size_t i = 0; i < grid_.size(); ++i)
      if (!at(i).positive_definite())
        throw std::invalid_argument("metric is not positive definite at grid index " +
                                    std::to_string(i));
  }

  /// sqrt(det g) at each grid point; the density of the Riemannian volume form.
  ScalarField volume_density() const {
    std::vector<double> v(grid_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sqrt(at(i).determinant());
    return ScalarField(grid_, std::move(v));
  }

private:
  Grid grid_;
  std::vector<ScalarField> entries_;
};

// ---------------------------------------------------------------------------
// Metric-free calculus

inline DifferentialForm exterior_derivative(const DifferentialForm& alpha) {
  int n = alpha.dimension();
  int k = alpha.degree();
  if (k >= n) throw std::invalid_argument("exterior derivative of a top-degree form");
  std::vector<ScalarField> out;
  for (const auto& K : multi_indices(n, k + 1)) {
    ScalarField acc = ScalarField::constant(alpha.grid(), 0.0);
    for (std::size_t p = 0; p < K.size(); ++p) {
      MultiIndex I = K;
      I.erase(I.begin() + static_cast<long>(p));
      ScalarField dI = spectral::derivative(alpha.coefficient(I), K[p]);
      acc = (p % 2 == 0) ? acc + dI : acc - dI;
    }
    out.push_back(std::move(acc));
  }
  return DifferentialForm(k + 1, std::move(out));
}

inline DifferentialForm interior_product(const VectorField& X, const DifferentialForm& alpha) {
  require_same_grid(X.grid(), alpha.grid(), "interior product");
  int n = alpha.dimension();
  int k = alpha.degree();
  if (k == 0) throw std::invalid_argument("interior product of a 0-form");
  std::vector<ScalarField> out;
  for (const auto& J : multi_indices(n, k - 1)) {
    ScalarField acc = ScalarField::constant(alpha.grid(), 0.0);
    for (int i = 0; i < n; ++i) {
      if (std::find(J.begin(), J.end(), i) != J.end()) continue;
      int sign = merge_sign({i}, J);
      ScalarField term = X[i] * alpha.coefficient(merged({i}, J));
      acc = sign > 0 ? acc + term : acc - term;
    }
    out.push_back(std::move(acc));
  }
  return DifferentialForm(k - 1, std::move(out));
}

inline DifferentialForm wedge(const DifferentialForm& alpha, const DifferentialForm& beta) {
  require_same_grid(alpha.grid(), beta.grid(), "wedge");
  int n = alpha.dimension();
  int k = alpha.degree(), l = beta.degree();
  if (k + l > n) throw std::invalid_argument("wedge: degree overflow");
  std::vector<ScalarField> out;
  for (const auto& K : multi_indices(n, k + l)) {
    ScalarField acc = ScalarField::constant(alpha.grid(), 0.0);
    for (const auto& I : multi_indices(n, k)) {
      if (!std::includes(K.begin(), K.end(), I.begin(), I.end())) continue;
      MultiIndex J;
      std::set_difference(K.begin(), K.end(), I.begin(), I.end(), std::back_inserter(J));
      ScalarField term = alpha.coefficient(I) * beta.coefficient(J);
      acc = merge_sign(I, J) > 0 ? acc + term : acc - term;
    }
    out.push_back(std::move(acc));
  }
  return DifferentialForm(k + l, std::move(out));
}

/// X^flat = g(X, .)
inline DifferentialForm flat(const MetricField& g, const VectorField& X) {
  require_same_grid(g.grid(), X.grid(), "flat");
  int n = g.dimension();
  std::vector<ScalarField> out;
  for (int i = 0; i < n; ++i) {
    ScalarField acc = ScalarField::constant(g.grid(), 0.0);
    for (int j = 0; j < n; ++j) acc = acc + g.entry(i, j) * X[j];
    out.push_back(std::move(acc));
  }
  return DifferentialForm(1, std::move(out));
}

/// Evaluates a 1-form on a vector field pointwise.
inline ScalarField pair(const DifferentialForm& omega, const VectorField& X) {
  if (omega.degree() != 1) throw std::invalid_argument("pair: expected a 1-form");
  require_same_grid(omega.grid(), X.grid(), "pair");
  ScalarField acc = ScalarField::constant(X.grid(), 0.0);
  for (int i = 0; i < X.dimension(); ++i) acc = acc + omega[i] * X[i];
  return acc;
}

/// d(i_X Omega), which by Cartan's formula is L_X Omega for a top-degree Omega.
inline DifferentialForm lie_derivative_volume(const VectorField& X, const DifferentialForm& Omega) {
  if (Omega.degree() != Omega.dimension())
    throw std::invalid_argument("lie_derivative_volume: Omega must have top degree");
  return exterior_derivative(interior_product(X, Omega));
}

/// Coordinate-gradient of a periodic function as a 1-form.
inline DifferentialForm gradient_form(const ScalarField& f) {
  return exterior_derivative(DifferentialForm::function(f));
}

inline void write_csv(std::ostream& os, const DifferentialForm& alpha) {
  std::vector<std::string> names;
  std::vector<const ScalarField*> fields;
  auto idx = alpha.indices();
  for (std::size_t p = 0; p < idx.size(); ++p) {
    names.push_back(basis_name(idx[p]));
    fields.push_back(&alpha[p]);
  }
  write_csv(os, alpha.grid(), names, fields);
}

inline void write_csv(std::ostream& os, const VectorField& X) {
  std::vector<std::string> names;
  std::vector<const ScalarField*> fields;
  for (int a = 0; a < X.dimension(); ++a) {
    names.push_back(std::string("X") + axis_name(a));
    fields.push_back(&X[a]);
  }
  write_csv(os, X.grid(), names, fields);
}

inline void write_csv(std::ostream& os, const MetricField& g) {
  std::vector<std::string> names;
  std::vector<const ScalarField*> fields;
  int n = g.dimension();
  for (int r = 0; r < n; ++r)
    for (int c = r; c < n; ++c) {
      names.push_back(std::string("g_") + axis_name(r) + axis_name(c));
      fields.push_back(&g.entry(r, c));
    }
  write_csv(os, g.grid(), names, fields);
}

}  // namespace tsec
