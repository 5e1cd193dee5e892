#pragma once

#include <memory>

#include "tsec/forms.hpp"

namespace tsec::flow {

enum class Interpolation { trigonometric, linear };

inline const char* to_string(Interpolation k) {
  return k == Interpolation::trigonometric ? "trigonometric" : "linear";
}

/// Off-grid evaluation of a sampled vector field.
class FieldSampler {
public:
  explicit FieldSampler(const VectorField& X, Interpolation kind = Interpolation::trigonometric)
      : dim_(X.dimension()), kind_(kind) {
    for (int a = 0; a < dim_; ++a) {
      if (kind == Interpolation::trigonometric)
        trig_.emplace_back(X[a]);
      else
        linear_.emplace_back(X[a]);
    }
  }

  Vec operator()(const Vec& x) const {
    Vec v{0.0, 0.0, 0.0};
    for (int a = 0; a < dim_; ++a)
      v[a] = kind_ == Interpolation::trigonometric ? trig_[a](x) : linear_[a](x);
    return v;
  }

  int dimension() const { return dim_; }
  Interpolation kind() const { return kind_; }

private:
  int dim_;
  Interpolation kind_;
  std::vector<spectral::Interpolant> trig_;
  std::vector<spectral::LinearInterpolant> linear_;
};

inline Vec axpy(double s, const Vec& x, const Vec& y) {
  return {y[0] + s * x[0], y[1] + s * x[1], y[2] + s * x[2]};
}

/// One classical Runge-Kutta step in lifted (R^n) coordinates.
inline Vec rk4_step(const FieldSampler& X, const Vec& x, double h) {
  Vec k1 = X(x);
  Vec k2 = X(axpy(0.5 * h, k1, x));
  Vec k3 = X(axpy(0.5 * h, k2, x));
  Vec k4 = X(axpy(h, k3, x));
  Vec out = x;
  for (int a = 0; a < 3; ++a) out[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
  return out;
}

inline bool finite(const Vec& x) {
  return std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(x[2]);
}

inline Vec wrap(const Vec& x, int dim) {
  Vec w{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) w[a] = wrap_unit(x[a]);
  return w;
}

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> points;  // wrapped into [0,1)^n
};

/// phi_{k dt}(x0) mod 1 for k = 0..ceil(T/dt); the final step is shortened to land on T.
inline Trajectory integrate_orbit(const FieldSampler& X, const Vec& x0, double duration, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_orbit: dt must be positive");
  if (duration < 0.0) throw std::invalid_argument("integrate_orbit: negative duration");
  int dim = X.dimension();
  Trajectory tr;
  Vec x = x0;
  double t = 0.0;
  tr.times.push_back(t);
  tr.points.push_back(wrap(x, dim));
  while (t < duration) {
    double h = std::min(dt, duration - t);
    if (duration - (t + h) < 1e-14 * std::max(1.0, duration)) h = duration - t;
    Vec next = rk4_step(X, x, h);
    if (!finite(next))
      throw std::runtime_error("integrate_orbit: non-finite state after t = " + std::to_string(t));
    x = next;
    t += h;
    tr.times.push_back(t);
    tr.points.push_back(wrap(x, dim));
  }
  return tr;
}

inline Trajectory integrate_orbit(const VectorField& X, const Vec& x0, double duration, double dt) {
  return integrate_orbit(FieldSampler(X), x0, duration, dt);
}

/// Circle-valued map F(x) = c.x + h(x); dF is closed by construction.
/// Values are lifted (real-valued) when x is given in lifted coordinates.
class AngleFunction {
public:
  AngleFunction() = default;
  AngleFunction(std::vector<double> periods, ScalarField h)
      : c_(std::move(periods)), h_(std::move(h)),
        interp_(std::make_shared<const spectral::Interpolant>(h_)) {
    if (static_cast<int>(c_.size()) != h_.grid().dimension())
      throw std::invalid_argument("angle function: period vector length must equal dimension");
  }

  static AngleFunction linear(const Grid& grid, std::vector<double> periods) {
    return AngleFunction(std::move(periods), ScalarField::constant(grid, 0.0));
  }

  /// Splits a closed 1-form into periods c and a periodic primitive h with
  /// omega = c.dx + dh (least-squares inversion of the gradient in Fourier space).
  static AngleFunction from_closed_form(const DifferentialForm& omega) {
    if (omega.degree() != 1) throw std::invalid_argument("from_closed_form: expected a 1-form");
    const Grid& grid = omega.grid();
    int n = grid.dimension();
    std::vector<double> c;
    for (int a = 0; a < n; ++a) c.push_back(omega[a].mean());
    std::vector<spectral::Spectrum> parts;
    for (int a = 0; a < n; ++a) parts.emplace_back(omega[a]);
    std::vector<spectral::Complex> hhat(grid.size());
    int N = grid.resolution();
    const double two_pi = 2.0 * M_PI;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      auto j = grid.multi_index(i);
      spectral::Complex num(0.0, 0.0);
      double den = 0.0;
      bool nyq = false;
      for (int a = 0; a < n; ++a) {
        if (j[a] == N / 2) nyq = true;
        double k = two_pi * spectral::wavenumber(j[a], N);
        num += std::conj(spectral::Complex(0.0, k)) * parts[a].coefficient(i);
        den += k * k;
      }
      hhat[i] = (den == 0.0 || nyq) ? spectral::Complex(0.0, 0.0) : num / den;
    }
    ScalarField h = synthesize_from(grid, hhat);
    return AngleFunction(std::move(c), std::move(h));
  }

  int dimension() const { return static_cast<int>(c_.size()); }
  const std::vector<double>& periods() const { return c_; }
  const ScalarField& primitive() const { return h_; }
  const Grid& grid() const { return h_.grid(); }

  double value(const Vec& x) const {
    double v = (*interp_)(x);
    for (int a = 0; a < dimension(); ++a) v += c_[a] * x[a];
    return v;
  }

  Vec gradient(const Vec& x) const {
    Vec g = interp_->gradient(x);
    for (int a = 0; a < dimension(); ++a) g[a] += c_[a];
    return g;
  }

  /// dF = sum c_i dx_i + dh on the grid.
  DifferentialForm differential() const {
    DifferentialForm dh = gradient_form(h_);
    std::vector<ScalarField> out;
    for (int a = 0; a < dimension(); ++a) out.push_back(dh[a].map([ca = c_[a]](double v) { return v + ca; }));
    return DifferentialForm(1, std::move(out));
  }

  /// min over the grid of dF(X); positive means X is transverse to ker dF.
  double margin(const VectorField& X) const { return pair(differential(), X).min(); }

  /// Period vector is integral, so F descends to a map T^n -> R/Z.
  bool circle_valued(double tol = 1e-12) const {
    for (double v : c_)
      if (std::abs(v - std::round(v)) > tol) return false;
    return true;
  }

  AngleFunction scaled(double s) const {
    std::vector<double> c = c_;
    for (double& v : c) v *= s;
    return AngleFunction(std::move(c), s * h_);
  }

private:
  static ScalarField synthesize_from(const Grid& grid, const std::vector<spectral::Complex>& coeffs) {
    spectral::detail::Buffer buf(grid.size());
    std::copy(coeffs.begin(), coeffs.end(), buf.as_complex());
    spectral::detail::transform(buf, grid, FFTW_BACKWARD);
    std::vector<double> v(grid.size());
    double scale = 1.0 / static_cast<double>(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = buf.as_complex()[i].real() * scale;
    return ScalarField(grid, std::move(v));
  }

  std::vector<double> c_;
  ScalarField h_;
  std::shared_ptr<const spectral::Interpolant> interp_;
};

/// X~ = u X with u = 1/dF(X): the reparametrized field whose return time
/// through the level sets of F is the period of F.
struct Reparametrization {
  VectorField field;
  ScalarField factor;
};

inline Reparametrization reparametrize_unit_return(const VectorField& X, const AngleFunction& F) {
  ScalarField rate = pair(F.differential(), X);
  if (!(rate.min() > 0.0))
    throw Rejected("reparametrize: dF(X) is not positive (margin " + std::to_string(rate.min()) + ")");
  ScalarField u = rate.map([](double v) { return 1.0 / v; });
  return {u * X, u};
}

}  // namespace tsec::flow
