#pragma once

#include "tsec/forms.hpp"

namespace tsec {

/// Hodge star for the metric field g with orientation dx^1 ^ ... ^ dx^n:
///   (*a)_J = sqrt(det g) * eps(I, J) * sum_L det(g^{-1}[I, L]) a_L,   I = complement of J.
/// The minor sum is the k-th compound of g^{-1} acting on increasing indices.
inline DifferentialForm hodge_star(const MetricField& g, const DifferentialForm& alpha) {
  require_same_grid(g.grid(), alpha.grid(), "hodge star");
  g.require_spd();
  int n = alpha.dimension();
  int k = alpha.degree();
  const Grid& grid = alpha.grid();
  auto in_idx = multi_indices(n, k);
  auto out_idx = multi_indices(n, n - k);
  std::vector<std::vector<double>> out(out_idx.size(), std::vector<double>(grid.size()));
  std::vector<MultiIndex> comp(out_idx.size());
  std::vector<int> eps(out_idx.size());
  for (std::size_t q = 0; q < out_idx.size(); ++q) {
    comp[q] = complement(n, out_idx[q]);
    eps[q] = merge_sign(comp[q], out_idx[q]);
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    SmallMatrix gm = g.at(i);
    SmallMatrix ginv = gm.inverse();
    double vol = std::sqrt(gm.determinant());
    for (std::size_t q = 0; q < out_idx.size(); ++q) {
      double raised = 0.0;
      for (std::size_t p = 0; p < in_idx.size(); ++p) raised += ginv.minor(comp[q], in_idx[p]) * alpha[p][i];
      out[q][i] = vol * eps[q] * raised;
    }
  }
  std::vector<ScalarField> coeffs;
  for (auto& v : out) coeffs.emplace_back(grid, std::move(v));
  return DifferentialForm(n - k, std::move(coeffs));
}

/// delta_g = (-1)^{n(k+1)+1} * d * on k-forms.
inline DifferentialForm codifferential(const MetricField& g, const DifferentialForm& alpha) {
  int n = alpha.dimension();
  int k = alpha.degree();
  if (k == 0) throw std::invalid_argument("codifferential of a 0-form");
  int e = n * (k + 1) + 1;
  double sign = (e % 2 == 0) ? 1.0 : -1.0;
  return sign * hodge_star(g, exterior_derivative(hodge_star(g, alpha)));
}

inline DifferentialForm laplacian(const MetricField& g, const DifferentialForm& alpha) {
  int n = alpha.dimension();
  int k = alpha.degree();
  if (k == 0) return codifferential(g, exterior_derivative(alpha));
  if (k == n) return exterior_derivative(codifferential(g, alpha));
  return exterior_derivative(codifferential(g, alpha)) + codifferential(g, exterior_derivative(alpha));
}

struct HarmonicResiduals {
  ResidualReport closed;     // ||d alpha||
  ResidualReport coclosed;   // ||d * alpha||

  bool harmonic(double tol) const { return closed.sup < tol && coclosed.sup < tol; }
};

inline HarmonicResiduals harmonic_residuals(const MetricField& g, const DifferentialForm& alpha) {
  HarmonicResiduals r;
  int n = alpha.dimension();
  r.closed.resolution = r.coclosed.resolution = alpha.grid().resolution();
  if (alpha.degree() < n) r.closed = exterior_derivative(alpha).norm();
  if (alpha.degree() > 0) r.coclosed = exterior_derivative(hodge_star(g, alpha)).norm();
  return r;
}

struct StarIdentityReport {
  ResidualReport residual;  // || *(i_X Omega) - s X^flat ||
  int sign = 1;
  double volume_mismatch = 0.0;
};

/// Checks *_g(i_X Omega) = s g(X, .) where Omega must be the Riemannian volume
/// form of g. The sign s is measured from the data (it depends only on the
/// dimension and the star convention).
inline StarIdentityReport star_identity_check(const MetricField& g, const VectorField& X,
                                              const DifferentialForm& Omega,
                                              double volume_tol = 1e-9) {
  if (Omega.degree() != Omega.dimension())
    throw std::invalid_argument("star identity: Omega must have top degree");
  StarIdentityReport rep;
  rep.volume_mismatch = (Omega[0] - g.volume_density()).sup_norm();
  if (rep.volume_mismatch > volume_tol)
    throw Rejected("star identity: Omega is not the Riemannian volume form of g (mismatch " +
                   std::to_string(rep.volume_mismatch) + ")");
  DifferentialForm lhs = hodge_star(g, interior_product(X, Omega));
  DifferentialForm xflat = flat(g, X);
  double dot = 0.0;
  for (int a = 0; a < X.dimension(); ++a)
    for (std::size_t i = 0; i < X.grid().size(); ++i) dot += lhs[a][i] * xflat[a][i];
  if (dot == 0.0) {
    // X vanishes identically; read the sign off the unit coordinate field.
    Grid grid = X.grid();
    std::vector<double> e(X.dimension(), 0.0);
    e[0] = 1.0;
    auto probe = hodge_star(MetricField::euclidean(grid),
                            interior_product(VectorField::constant(grid, e),
                                             DifferentialForm::volume(ScalarField::constant(grid, 1.0))));
    dot = probe[0][0];
  }
  rep.sign = dot >= 0.0 ? 1 : -1;
  rep.residual = (lhs - static_cast<double>(rep.sign) * xflat).norm();
  return rep;
}

/// Integrals of a closed 1- or (n-1)-form over the coordinate circles or
/// coordinate subtori, in multi-index order. On T^n these are the grid means
/// of the coefficients.
inline std::vector<double> cohomology_periods(const DifferentialForm& alpha, double tol = 1e-8) {
  int n = alpha.dimension();
  int k = alpha.degree();
  if (k != 1 && k != n - 1)
    throw std::invalid_argument("cohomology periods: degree must be 1 or n-1");
  double residual = exterior_derivative(alpha).norm().sup;
  if (residual > tol)
    throw Rejected("cohomology periods: form is not closed (d-residual " + std::to_string(residual) + ")");
  std::vector<double> out;
  for (const auto& c : alpha.coefficients()) out.push_back(c.mean());
  return out;
}

}  // namespace tsec
