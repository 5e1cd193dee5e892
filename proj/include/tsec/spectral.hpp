#pragma once

#include <complex>
#include <memory>
#include <mutex>

#include <fftw3.h>

#include "tsec/grid.hpp"

namespace tsec::spectral {

using Complex = std::complex<double>;

namespace detail {

// fftw planner calls are not thread safe; execution on distinct arrays is.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};

class Buffer {
public:
  explicit Buffer(std::size_t n)
      : n_(n), data_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (!data_) throw std::bad_alloc();
  }
  fftw_complex* get() { return data_.get(); }
  Complex* as_complex() { return reinterpret_cast<Complex*>(data_.get()); }
  const Complex* as_complex() const { return reinterpret_cast<const Complex*>(data_.get()); }
  std::size_t size() const { return n_; }

private:
  std::size_t n_;
  std::unique_ptr<fftw_complex, FftwFree> data_;
};

// In-place n-dimensional complex transform on a Buffer laid out like Grid.
inline void transform(Buffer& buf, const Grid& grid, int sign) {
  int dims[3];
  int rank = grid.dimension();
  for (int a = 0; a < rank; ++a) dims[a] = grid.resolution();
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft(rank, dims, buf.get(), buf.get(), sign, FFTW_ESTIMATE);
  }
  if (!plan) throw std::runtime_error("fftw: plan creation failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
}

}  // namespace detail

/// Signed wavenumber of DFT index j on N points; the Nyquist index N/2 maps to +N/2.
inline int wavenumber(int j, int n) { return j <= n / 2 ? j : j - n; }

/// Unnormalized forward DFT of a real field; entry order matches Grid linear indexing
/// (fftw row-major with axis 0 fastest is the same layout with reversed axis labels,
/// and the transform is symmetric in axis labels).
class Spectrum {
public:
  explicit Spectrum(const ScalarField& f) : grid_(f.grid()), buf_(f.size()) {
    Complex* c = buf_.as_complex();
    for (std::size_t i = 0; i < f.size(); ++i) c[i] = Complex(f[i], 0.0);
    detail::transform(buf_, grid_, FFTW_FORWARD);
  }

  const Grid& grid() const { return grid_; }
  Complex coefficient(std::size_t idx) const {
    return buf_.as_complex()[idx];
  }

  /// Applies a per-mode multiplier and transforms back; result is the real part / N^n.
  template <class Multiplier>
  ScalarField synthesize(Multiplier mult) const {
    detail::Buffer out(buf_.size());
    Complex* dst = out.as_complex();
    const Complex* src = buf_.as_complex();
    int n = grid_.resolution();
    for (std::size_t i = 0; i < buf_.size(); ++i) {
      auto j = grid_.multi_index(i);
      std::array<int, 3> k{0, 0, 0};
      bool nyquist[3] = {false, false, false};
      for (int a = 0; a < grid_.dimension(); ++a) {
        k[a] = wavenumber(j[a], n);
        nyquist[a] = (j[a] == n / 2);
      }
      dst[i] = src[i] * mult(k, nyquist);
    }
    detail::transform(out, grid_, FFTW_BACKWARD);
    double scale = 1.0 / static_cast<double>(buf_.size());
    std::vector<double> v(buf_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = dst[i].real() * scale;
    return ScalarField(grid_, std::move(v));
  }

private:
  Grid grid_;
  detail::Buffer buf_;
};

/// Spectral partial derivative along `axis`. The Nyquist mode's derivative is zero.
inline ScalarField derivative(const ScalarField& f, int axis) {
  if (axis < 0 || axis >= f.grid().dimension())
    throw std::invalid_argument("derivative: axis out of range");
  Spectrum s(f);
  const double two_pi = 2.0 * M_PI;
  return s.synthesize([&](const std::array<int, 3>& k, const bool* nyq) {
    if (nyq[axis]) return Complex(0.0, 0.0);
    return Complex(0.0, two_pi * k[axis]);
  });
}

/// Trigonometric interpolation of f onto a finer grid (zero padding). Nyquist
/// modes are split evenly between +N/2 and -N/2.
inline ScalarField resample(const ScalarField& f, int resolution) {
  const Grid& g = f.grid();
  if (resolution == g.resolution()) return f;
  if (resolution < g.resolution())
    throw std::invalid_argument("resample: only refinement is supported");
  Grid fine(g.dimension(), resolution);
  Spectrum s(f);
  detail::Buffer out(fine.size());
  Complex* dst = out.as_complex();
  std::fill(dst, dst + fine.size(), Complex(0.0, 0.0));
  int n = g.resolution();
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto j = g.multi_index(i);
    Complex c = s.coefficient(i);
    // Enumerate the 2^(#nyquist axes) images of this coefficient.
    int nyq_mask = 0;
    for (int a = 0; a < g.dimension(); ++a)
      if (j[a] == n / 2) nyq_mask |= 1 << a;
    int count = 1 << __builtin_popcount(nyq_mask);
    Complex share = c / static_cast<double>(count);
    for (int sub = 0; sub < (1 << g.dimension()); ++sub) {
      if ((sub & ~nyq_mask) != 0) continue;
      std::array<int, 3> jf{0, 0, 0};
      for (int a = 0; a < g.dimension(); ++a) {
        int k = wavenumber(j[a], n);
        if ((nyq_mask >> a) & 1) k = ((sub >> a) & 1) ? -n / 2 : n / 2;
        jf[a] = ((k % resolution) + resolution) % resolution;
      }
      dst[fine.linear_index(jf)] += share;
    }
  }
  detail::transform(out, fine, FFTW_BACKWARD);
  double scale = 1.0 / static_cast<double>(g.size());
  std::vector<double> v(fine.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = dst[i].real() * scale;
  return ScalarField(fine, std::move(v));
}

/// Off-grid evaluation by trigonometric interpolation. Only modes with
/// amplitude above 1e-15 * max(1, peak amplitude) are retained, so
/// trigonometric polynomials with few terms (and roundoff-level fields)
/// evaluate cheaply.
class Interpolant {
public:
  Interpolant() = default;
  explicit Interpolant(const ScalarField& f) : dim_(f.grid().dimension()) {
    Spectrum s(f);
    const Grid& g = f.grid();
    double scale = 1.0 / static_cast<double>(g.size());
    double peak = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) peak = std::max(peak, std::abs(s.coefficient(i)));
    double cutoff = std::max(peak, static_cast<double>(g.size())) * 1e-15;
    int n = g.resolution();
    for (std::size_t i = 0; i < g.size(); ++i) {
      Complex c = s.coefficient(i);
      if (std::abs(c) <= cutoff) continue;
      auto j = g.multi_index(i);
      Mode m;
      for (int a = 0; a < dim_; ++a) m.k[a] = wavenumber(j[a], n);
      m.c = c * scale;
      modes_.push_back(m);
    }
  }

  std::size_t mode_count() const { return modes_.size(); }

  double operator()(const Vec& x) const {
    const double two_pi = 2.0 * M_PI;
    double acc = 0.0;
    for (const auto& m : modes_) {
      double phase = two_pi * (m.k[0] * x[0] + m.k[1] * x[1] + m.k[2] * x[2]);
      acc += m.c.real() * std::cos(phase) - m.c.imag() * std::sin(phase);
    }
    return acc;
  }

  Vec gradient(const Vec& x) const {
    const double two_pi = 2.0 * M_PI;
    Vec g{0.0, 0.0, 0.0};
    for (const auto& m : modes_) {
      double phase = two_pi * (m.k[0] * x[0] + m.k[1] * x[1] + m.k[2] * x[2]);
      // d/dx_a Re(c e^{i phase}) = Re(c * i 2 pi k_a e^{i phase})
      double s = -(m.c.real() * std::sin(phase) + m.c.imag() * std::cos(phase));
      for (int a = 0; a < dim_; ++a) g[a] += two_pi * m.k[a] * s;
    }
    return g;
  }

private:
  struct Mode {
    std::array<int, 3> k{0, 0, 0};
    Complex c;
  };
  int dim_ = 0;
  std::vector<Mode> modes_;
};

/// Periodic multilinear interpolation; the cheap fallback to Interpolant.
class LinearInterpolant {
public:
  LinearInterpolant() = default;
  explicit LinearInterpolant(ScalarField f) : f_(std::move(f)) {}

  double operator()(const Vec& x) const {
    const Grid& g = f_.grid();
    int n = g.resolution();
    int dim = g.dimension();
    std::array<int, 3> base{0, 0, 0};
    std::array<double, 3> w{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) {
      double u = wrap_unit(x[a]) * n;
      double fl = std::floor(u);
      base[a] = static_cast<int>(fl);
      w[a] = u - fl;
    }
    double acc = 0.0;
    for (int corner = 0; corner < (1 << dim); ++corner) {
      double weight = 1.0;
      std::array<int, 3> j = base;
      for (int a = 0; a < dim; ++a) {
        bool hi = (corner >> a) & 1;
        weight *= hi ? w[a] : 1.0 - w[a];
        j[a] += hi ? 1 : 0;
      }
      acc += weight * f_[g.linear_index(j)];
    }
    return acc;
  }

private:
  ScalarField f_;
};

}  // namespace tsec::spectral
