#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsec {

/// Point or tangent vector on T^n, n <= 3. Unused trailing entries stay zero.
using Vec = std::array<double, 3>;

/// Raised when an operation refuses its input for a mathematical reason
/// (non-transverse form, non-invariant volume, non-closed form, ...).
/// Distinct from std::invalid_argument, which flags malformed data.
class Rejected : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Uniform periodic grid over [0,1)^n with N samples per axis.
/// Linear index runs fastest along axis 0.
class Grid {
public:
  Grid() = default;
  Grid(int dimension, int resolution) : dim_(dimension), n_(resolution) {
    if (dimension < 1 || dimension > 3)
      throw std::invalid_argument("grid dimension must be 1, 2 or 3");
    if (resolution < 8 || resolution % 2 != 0)
      throw std::invalid_argument("grid resolution must be even and >= 8, got " +
                                  std::to_string(resolution));
    size_ = 1;
    for (int a = 0; a < dim_; ++a) size_ *= static_cast<std::size_t>(n_);
  }

  int dimension() const { return dim_; }
  int resolution() const { return n_; }
  std::size_t size() const { return size_; }
  double spacing() const { return 1.0 / n_; }

  std::array<int, 3> multi_index(std::size_t idx) const {
    std::array<int, 3> j{0, 0, 0};
    for (int a = 0; a < dim_; ++a) {
      j[a] = static_cast<int>(idx % n_);
      idx /= n_;
    }
    return j;
  }

  std::size_t linear_index(const std::array<int, 3>& j) const {
    std::size_t idx = 0;
    for (int a = dim_ - 1; a >= 0; --a) {
      int w = ((j[a] % n_) + n_) % n_;
      idx = idx * n_ + static_cast<std::size_t>(w);
    }
    return idx;
  }

  Vec point(std::size_t idx) const {
    auto j = multi_index(idx);
    Vec x{0.0, 0.0, 0.0};
    for (int a = 0; a < dim_; ++a) x[a] = static_cast<double>(j[a]) / n_;
    return x;
  }

  bool operator==(const Grid& o) const { return dim_ == o.dim_ && n_ == o.n_; }
  bool operator!=(const Grid& o) const { return !(*this == o); }

private:
  int dim_ = 0;
  int n_ = 0;
  std::size_t size_ = 0;
};

inline std::string describe(const Grid& g) {
  return "T^" + std::to_string(g.dimension()) + " @ N=" + std::to_string(g.resolution());
}

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (a != b)
    throw std::invalid_argument(std::string(what) + ": grid mismatch (" + describe(a) +
                                " vs " + describe(b) + ")");
}

/// Periodic real function sampled at the grid points j/N.
class ScalarField {
public:
  ScalarField() = default;
  ScalarField(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
      throw std::invalid_argument("scalar field: expected " + std::to_string(grid_.size()) +
                                  " samples, got " + std::to_string(values_.size()));
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (!std::isfinite(values_[i]))
        throw std::invalid_argument("scalar field: non-finite sample at grid index " +
                                    std::to_string(i));
  }

  static ScalarField constant(const Grid& grid, double v) {
    return ScalarField(grid, std::vector<double>(grid.size(), v));
  }

  static ScalarField sample(const Grid& grid, const std::function<double(const Vec&)>& fn) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid.point(i));
    return ScalarField(grid, std::move(v));
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  double min() const { return *std::min_element(values_.begin(), values_.end()); }
  double max() const { return *std::max_element(values_.begin(), values_.end()); }
  double mean() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s / static_cast<double>(values_.size());
  }
  double sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  template <class Op>
  ScalarField map(Op op) const {
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(values_[i]);
    return ScalarField(grid_, std::move(out));
  }

  template <class Op>
  ScalarField zip(const ScalarField& o, Op op) const {
    require_same_grid(grid_, o.grid_, "scalar field arithmetic");
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(values_[i], o.values_[i]);
    return ScalarField(grid_, std::move(out));
  }

  friend ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    return a.zip(b, [](double x, double y) { return x + y; });
  }
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    return a.zip(b, [](double x, double y) { return x - y; });
  }
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b) {
    return a.zip(b, [](double x, double y) { return x * y; });
  }
  friend ScalarField operator/(const ScalarField& a, const ScalarField& b) {
    return a.zip(b, [](double x, double y) { return x / y; });
  }
  friend ScalarField operator*(double s, const ScalarField& a) {
    return a.map([s](double x) { return s * x; });
  }
  friend ScalarField operator-(const ScalarField& a) {
    return a.map([](double x) { return -x; });
  }

private:
  Grid grid_;
  std::vector<double> values_;
};

/// Discrete L2 (cell weight 1/N^n) and sup norms of a collection of
/// component fields, e.g. the coefficients of a form.
struct ResidualReport {
  double l2 = 0.0;
  double sup = 0.0;
  int resolution = 0;
};

inline ResidualReport residual_of(const std::vector<ScalarField>& components, const Grid& grid) {
  ResidualReport r;
  r.resolution = grid.resolution();
  double acc = 0.0;
  for (const auto& f : components) {
    for (double v : f.values()) {
      acc += v * v;
      r.sup = std::max(r.sup, std::abs(v));
    }
  }
  r.l2 = std::sqrt(acc / static_cast<double>(grid.size()));
  return r;
}

inline ResidualReport residual_of(const ScalarField& f) { return residual_of({f}, f.grid()); }

inline const char* axis_name(int a) {
  static constexpr const char* names[] = {"x", "y", "z"};
  return names[a];
}

/// One row per grid point: index, coordinates, then one column per field.
inline void write_csv(std::ostream& os, const Grid& grid, const std::vector<std::string>& names,
                      const std::vector<const ScalarField*>& fields) {
  os << "index";
  for (int a = 0; a < grid.dimension(); ++a) os << ',' << axis_name(a);
  for (const auto& n : names) os << ',' << n;
  os << '\n';
  os << std::setprecision(17);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    os << i;
    Vec x = grid.point(i);
    for (int a = 0; a < grid.dimension(); ++a) os << ',' << x[a];
    for (const auto* f : fields) os << ',' << (*f)[i];
    os << '\n';
  }
}

inline double wrap_unit(double v) {
  double w = v - std::floor(v);
  return w >= 1.0 ? 0.0 : w;
}

/// Distance between a and b on the circle R/Z.
inline double circle_distance(double a, double b) {
  double d = std::abs(wrap_unit(a - b));
  return std::min(d, 1.0 - d);
}

}  // namespace tsec
