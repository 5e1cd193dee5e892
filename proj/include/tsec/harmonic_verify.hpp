#pragma once

#include "tsec/hodge.hpp"
#include "tsec/level_set.hpp"

namespace tsec::harmonic {

using flow::AngleFunction;
using flow::CrossSection;

inline constexpr double default_tolerance = 1e-8;

struct AdaptedMetricResult {
  MetricField metric;
  DifferentialForm flat_form;          // X~^flat, equal to dF
  ResidualReport flat_closedness;      // ||d X~^flat||
  ResidualReport volume_match;         // ||vol_g - Omega~||
  ScalarField conformal_scale;         // lambda > 0
  VectorField reparametrized_field;    // X~ = X / dF(X)
  DifferentialForm reparametrized_volume;  // Omega~ = dF(X) Omega
  double margin = 0.0;                 // min dF(X)
};

/// Metric for which X~ is a unit normal to ker dF and whose volume form is Omega~:
///   g = dF (x) dF + lambda P^T P,   P = I - X~ dF^T,
/// with lambda solving sqrt(det g) = Omega~ pointwise (det g scales as lambda^{n-1}).
inline AdaptedMetricResult adapted_metric(const VectorField& X, const AngleFunction& F,
                                          const DifferentialForm& Omega,
                                          double tol = default_tolerance) {
  if (!Omega.is_volume_form()) throw std::invalid_argument("adapted metric: Omega is not a volume form");
  require_same_grid(X.grid(), Omega.grid(), "adapted metric");
  int n = X.dimension();
  const Grid& grid = X.grid();
  DifferentialForm dF = F.differential();
  ScalarField rate = pair(dF, X);
  AdaptedMetricResult res;
  res.margin = rate.min();
  if (!(res.margin > 0.0))
    throw Rejected("adapted metric: not a transverse foliation (min dF(X) = " + std::to_string(res.margin) + ")");
  double lie = lie_derivative_volume(X, Omega).norm().sup;
  if (!(lie < tol))
    throw Rejected("adapted metric: the flow does not preserve Omega (||L_X Omega|| = " + std::to_string(lie) + ")");

  ScalarField u = rate.map([](double v) { return 1.0 / v; });
  res.reparametrized_field = u * X;
  res.reparametrized_volume = rate * Omega;

  std::vector<std::vector<double>> entries(n * (n + 1) / 2, std::vector<double>(grid.size()));
  std::vector<double> lambda(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Vec w{0.0, 0.0, 0.0}, xt{0.0, 0.0, 0.0};
    for (int a = 0; a < n; ++a) {
      w[a] = dF[a][i];
      xt[a] = res.reparametrized_field[a][i];
    }
    SmallMatrix P = SmallMatrix::identity(n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) P(r, c) -= xt[r] * w[c];
    SmallMatrix ptp{n, {}}, g1{n, {}};
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += P(k, r) * P(k, c);
        ptp(r, c) = s;
        g1(r, c) = w[r] * w[c] + s;
      }
    double density = res.reparametrized_volume[0][i];
    double lam = std::pow(density * density / g1.determinant(), 1.0 / (n - 1));
    if (!(lam > 0.0) || !std::isfinite(lam))
      throw std::logic_error("adapted metric: conformal factor lost positivity at grid index " + std::to_string(i));
    lambda[i] = lam;
    int p = 0;
    for (int r = 0; r < n; ++r)
      for (int c = r; c < n; ++c) entries[p++][i] = w[r] * w[c] + lam * ptp(r, c);
  }
  std::vector<ScalarField> e;
  for (auto& v : entries) e.emplace_back(grid, std::move(v));
  res.metric = MetricField(std::move(e));
  res.conformal_scale = ScalarField(grid, std::move(lambda));
  res.flat_form = flat(res.metric, res.reparametrized_field);
  res.flat_closedness = exterior_derivative(res.flat_form).norm();
  res.volume_match = residual_of(res.metric.volume_density() - res.reparametrized_volume[0]);
  return res;
}

struct ForwardReport {
  double margin = 0.0;
  double d_theta = 0.0;         // ||d i_X Omega||
  double d_star_theta = 0.0;    // ||d *_g i_X Omega||
  double flat_closedness = 0.0;
  double volume_match = 0.0;
  double star_identity = 0.0;
  int measured_sign = 0;
  double tolerance = default_tolerance;
  bool success = false;
  AdaptedMetricResult adapted;
};

/// Builds the adapted metric from the foliation by level sets of F and checks
/// that i_X Omega is harmonic for it. All residuals are sup norms.
inline ForwardReport verify_main_theorem_forward(const VectorField& X, const AngleFunction& F,
                                                 const DifferentialForm& Omega,
                                                 double tol = default_tolerance) {
  ForwardReport rep;
  rep.tolerance = tol;
  rep.adapted = adapted_metric(X, F, Omega, tol);
  const auto& am = rep.adapted;
  rep.margin = am.margin;
  DifferentialForm theta = interior_product(X, Omega);
  HarmonicResiduals hr = harmonic_residuals(am.metric, theta);
  rep.d_theta = hr.closed.sup;
  rep.d_star_theta = hr.coclosed.sup;
  rep.flat_closedness = am.flat_closedness.sup;
  rep.volume_match = am.volume_match.sup;
  StarIdentityReport sr = star_identity_check(am.metric, am.reparametrized_field, am.reparametrized_volume,
                                              std::max(1e-9, 10.0 * am.volume_match.sup));
  rep.star_identity = sr.residual.sup;
  rep.measured_sign = sr.sign;
  rep.success = hr.harmonic(tol);
  return rep;
}

/// ||omega ^ d omega||; identically zero on T^2.
inline ResidualReport frobenius_residual(const DifferentialForm& omega) {
  if (omega.degree() != 1) throw std::invalid_argument("frobenius residual: expected a 1-form");
  if (omega.dimension() < 3) {
    ResidualReport r;
    r.resolution = omega.grid().resolution();
    return r;
  }
  return wedge(omega, exterior_derivative(omega)).norm();
}

/// Integral of a closed (n-1)-form over the oriented section, by the
/// periodic trapezoid rule on each sheet of the graph parameterization.
inline double section_pairing(const CrossSection& section, const DifferentialForm& theta,
                              double tol = default_tolerance) {
  int n = theta.dimension();
  if (theta.degree() != n - 1) throw std::invalid_argument("section pairing: expected an (n-1)-form");
  if (section.dimension() != n) throw std::invalid_argument("section pairing: dimension mismatch");
  double closed = exterior_derivative(theta).norm().sup;
  if (closed > tol)
    throw Rejected("section pairing: form is not closed (d-residual " + std::to_string(closed) + ")");
  std::vector<spectral::Interpolant> coeffs;
  for (const auto& c : theta.coefficients()) coeffs.emplace_back(c);
  auto idx = theta.indices();
  double sum = 0.0;
  for (const auto& x : section.mesh) {
    auto t = section.level_set.tangents(x);
    double v = 0.0;
    if (n == 2) {
      for (int a = 0; a < 2; ++a) v += coeffs[a](x) * t[0][a];
    } else {
      // theta(t1, t2) = sum_{i<j} a_ij (t1_i t2_j - t1_j t2_i)
      for (std::size_t p = 0; p < idx.size(); ++p) {
        int i = idx[p][0], j = idx[p][1];
        v += coeffs[p](x) * (t[0][i] * t[1][j] - t[0][j] * t[1][i]);
      }
    }
    sum += v;
  }
  double cell = std::pow(1.0 / section.resolution, n - 1);
  return section.orientation * sum * cell;
}

/// ||d(X^flat)||: vanishes exactly when nabla^g X is a symmetric (1,1)-tensor.
inline ResidualReport nabla_symmetry_residual(const MetricField& g, const VectorField& X) {
  return exterior_derivative(flat(g, X)).norm();
}

}  // namespace tsec::harmonic
