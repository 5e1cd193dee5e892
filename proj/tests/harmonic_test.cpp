#include <gtest/gtest.h>

#include "tsec/harmonic_verify.hpp"

using namespace tsec;
using flow::AngleFunction;

namespace {

const double gamma_ = 0.5 * (std::sqrt(5.0) - 1.0);

struct Case {
  std::string name;
  VectorField X;
  AngleFunction F;
};

std::vector<Case> corpus(int N) {
  std::vector<Case> out;
  Grid g2(2, N);
  out.push_back({"linear", VectorField::constant(g2, {1.0, gamma_}), AngleFunction::linear(g2, {1.0, 0.0})});
  for (double eps : {0.3, 0.5, 0.9})
    out.push_back({"stream " + std::to_string(eps),
                   VectorField::sample(g2, [eps](const Vec& x) { return Vec{1.0 + eps * std::sin(2.0 * M_PI * x[1]), 0.0, 0.0}; }),
                   AngleFunction::linear(g2, {1.0, 0.0})});
  Grid g3(3, N / 2);
  out.push_back({"torus",
                 VectorField::sample(g3, [](const Vec& x) {
                   return Vec{1.0 + 0.3 * std::sin(2.0 * M_PI * x[2]), gamma_, 1.0 + 0.4 * std::sin(2.0 * M_PI * x[0])};
                 }),
                 AngleFunction::linear(g3, {1.0, 0.0, 0.0})});
  return out;
}

DifferentialForm unit_volume(const Grid& g) { return DifferentialForm::volume(ScalarField::constant(g, 1.0)); }

}  // namespace

TEST(Forward, CorpusIsHarmonicForAdaptedMetric) {
  for (const auto& c : corpus(64)) {
    auto rep = harmonic::verify_main_theorem_forward(c.X, c.F, unit_volume(c.X.grid()));
    EXPECT_TRUE(rep.success) << c.name;
    EXPECT_LT(rep.d_theta, 1e-8) << c.name;
    EXPECT_LT(rep.d_star_theta, 1e-8) << c.name;
    EXPECT_LT(rep.flat_closedness, 1e-8) << c.name;
    EXPECT_LT(rep.volume_match, 1e-8) << c.name;
    EXPECT_LT(rep.star_identity, 1e-8) << c.name;
    EXPECT_EQ(rep.measured_sign, c.X.dimension() == 2 ? -1 : 1) << c.name;
  }
}

TEST(Forward, NonUniformDensity) {
  // X = (1/rho, 0) with rho = 2 + cos(2 pi y) preserves rho dx ^ dy.
  Grid g(2, 64);
  auto rho = ScalarField::sample(g, [](const Vec& x) { return 2.0 + std::cos(2.0 * M_PI * x[1]); });
  auto X = VectorField(std::vector<ScalarField>{rho.map([](double v) { return 1.0 / v; }), ScalarField::constant(g, 0.0)});
  auto rep = harmonic::verify_main_theorem_forward(X, AngleFunction::linear(g, {1.0, 0.0}), DifferentialForm::volume(rho));
  EXPECT_TRUE(rep.success);
}

TEST(AdaptedMetric, UnitNormalAndVolume) {
  Grid g(2, 64);
  auto X = VectorField::sample(g, [](const Vec& x) { return Vec{1.0 + 0.5 * std::sin(2.0 * M_PI * x[1]), 0.2, 0.0}; });
  auto F = AngleFunction::linear(g, {1.0, 0.0});
  auto am = harmonic::adapted_metric(X, F, unit_volume(g));
  // g(X~, X~) = 1 and X~^flat = dF
  auto gxx = pair(am.flat_form, am.reparametrized_field);
  EXPECT_LT(gxx.map([](double v) { return v - 1.0; }).sup_norm(), 1e-12);
  EXPECT_LT((am.flat_form - F.differential()).norm().sup, 1e-12);
  EXPECT_LT(am.volume_match.sup, 1e-12);
  EXPECT_GT(am.conformal_scale.min(), 0.0);
  am.metric.require_spd();
}

TEST(AdaptedMetric, RejectsNonTransverseAndCompressible) {
  Grid g(2, 32);
  auto X = VectorField::constant(g, {0.0, 1.0});
  EXPECT_THROW(harmonic::adapted_metric(X, AngleFunction::linear(g, {1.0, 0.0}), unit_volume(g)), Rejected);
  auto Y = VectorField::sample(g, [](const Vec& x) { return Vec{1.0 + 0.5 * std::sin(2.0 * M_PI * x[0]), 0.0, 0.0}; });
  EXPECT_THROW(harmonic::adapted_metric(Y, AngleFunction::linear(g, {1.0, 0.0}), unit_volume(g)), Rejected);
}

TEST(SectionPairing, ClassOfThetaIsDetected) {
  for (const auto& c : corpus(64)) {
    const Grid& g = c.X.grid();
    auto theta = interior_product(c.X, unit_volume(g));
    auto periods = cohomology_periods(theta);
    double pn = 0.0;
    for (double p : periods) pn = std::max(pn, std::abs(p));
    EXPECT_GT(pn, 0.0) << c.name;
    auto cs = flow::make_cross_section(c.X, c.F, 1, 0.0, c.X.dimension() == 2 ? 64 : 32);
    // The flux of X through {x = 0} is the mean of X^1.
    double pairing = harmonic::section_pairing(cs, theta);
    EXPECT_GT(std::abs(pairing), 0.1) << c.name;
    EXPECT_NEAR(pairing, c.X[0].mean(), 1e-10) << c.name;
  }
}

TEST(SectionPairing, ExactFormsPairToZero) {
  Grid g(3, 32);
  auto X = VectorField::sample(g, [](const Vec& x) {
    return Vec{1.0 + 0.3 * std::sin(2.0 * M_PI * x[2]), gamma_, 1.0 + 0.4 * std::sin(2.0 * M_PI * x[0])};
  });
  auto h = ScalarField::sample(g, [](const Vec& x) { return 0.05 * std::cos(2.0 * M_PI * (x[1] - x[2])); });
  AngleFunction F({1.0, 0.0, 0.0}, h);
  auto cs = flow::make_cross_section(X, F, 1, 0.0, 32);
  auto beta = DifferentialForm(1, {ScalarField::sample(g, [](const Vec& x) { return std::sin(2.0 * M_PI * (x[0] + x[2])); }),
                                   ScalarField::sample(g, [](const Vec& x) { return std::cos(2.0 * M_PI * x[1]); }),
                                   ScalarField::constant(g, 0.0)});
  EXPECT_LT(std::abs(harmonic::section_pairing(cs, exterior_derivative(beta))), 1e-8);
  Grid g2(2, 64);
  auto Y = VectorField::constant(g2, {1.0, gamma_});
  auto cs2 = flow::make_cross_section(Y, AngleFunction::linear(g2, {2.0, 1.0}), 1, 0.0, 64);
  auto f = ScalarField::sample(g2, [](const Vec& x) { return std::sin(2.0 * M_PI * (x[0] + 3.0 * x[1])); });
  EXPECT_LT(std::abs(harmonic::section_pairing(cs2, gradient_form(f))), 1e-8);
}

TEST(Frobenius, ClosedFormsAreIntegrable) {
  Grid g(3, 16);
  auto h = ScalarField::sample(g, [](const Vec& x) { return std::sin(2.0 * M_PI * (x[0] + x[2])); });
  auto omega = DifferentialForm::constant(g, 1, {1.0, 0.5, 0.0}) + gradient_form(h);
  EXPECT_LT(harmonic::frobenius_residual(omega).sup, 1e-10);
  auto contact = DifferentialForm(1, {ScalarField::constant(g, 0.0),
                                      ScalarField::sample(g, [](const Vec& x) { return std::cos(2.0 * M_PI * x[0]); }),
                                      ScalarField::sample(g, [](const Vec& x) { return std::sin(2.0 * M_PI * x[0]); })});
  EXPECT_GT(harmonic::frobenius_residual(contact).sup, 1.0);
}

TEST(NablaSymmetry, AdaptedFieldIsGradientLike) {
  Grid g(2, 64);
  auto X = VectorField::sample(g, [](const Vec& x) { return Vec{1.0 + 0.3 * std::sin(2.0 * M_PI * x[1]), 0.0, 0.0}; });
  auto am = harmonic::adapted_metric(X, AngleFunction::linear(g, {1.0, 0.0}), unit_volume(g));
  EXPECT_LT(harmonic::nabla_symmetry_residual(am.metric, am.reparametrized_field).sup, 1e-10);
  EXPECT_GT(harmonic::nabla_symmetry_residual(MetricField::euclidean(g), X).sup, 1.0);
}
