#include <gtest/gtest.h>

#include "tsec/poincare.hpp"

using namespace tsec;
using flow::AngleFunction;

namespace {

const double gamma_ = 0.5 * (std::sqrt(5.0) - 1.0);

VectorField stream(const Grid& g, double eps) {
  return VectorField::sample(g, [eps](const Vec& x) { return Vec{1.0 + eps * std::sin(2.0 * M_PI * x[1]), 0.0, 0.0}; });
}

}  // namespace

TEST(Rk4, LinearFlowIsExact) {
  Grid g(2, 16);
  auto X = VectorField::constant(g, {1.0, gamma_});
  auto tr = flow::integrate_orbit(X, {0.1, 0.2, 0.0}, 3.0, 1e-2);
  Vec end = tr.points.back();
  EXPECT_NEAR(circle_distance(end[0], 0.1), 0.0, 1e-12);
  EXPECT_NEAR(circle_distance(end[1], 0.2 + 3.0 * gamma_), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(tr.times.back(), 3.0);
}

TEST(Rk4, FourthOrderConvergence) {
  Grid g(2, 32);
  auto X = VectorField::sample(g, [](const Vec& x) {
    return Vec{1.0 + 0.3 * std::sin(2.0 * M_PI * x[1]), 1.0 + 0.3 * std::sin(2.0 * M_PI * x[0]), 0.0};
  });
  auto ref = flow::integrate_orbit(X, {0.1, 0.3, 0.0}, 1.0, 1e-4).points.back();
  double e1 = 0.0, e2 = 0.0;
  auto a = flow::integrate_orbit(X, {0.1, 0.3, 0.0}, 1.0, 0.04).points.back();
  auto b = flow::integrate_orbit(X, {0.1, 0.3, 0.0}, 1.0, 0.02).points.back();
  for (int i = 0; i < 2; ++i) {
    e1 = std::max(e1, circle_distance(a[i], ref[i]));
    e2 = std::max(e2, circle_distance(b[i], ref[i]));
  }
  EXPECT_GT(e1 / e2, 12.0);
}

TEST(AngleFunction, LinearValueAndMargin) {
  Grid g(2, 16);
  auto F = AngleFunction::linear(g, {1.0, 2.0});
  EXPECT_DOUBLE_EQ(F.value({0.25, 0.5, 0.0}), 1.25);
  EXPECT_TRUE(F.circle_valued());
  EXPECT_NEAR(F.margin(VectorField::constant(g, {1.0, gamma_})), 1.0 + 2.0 * gamma_, 1e-14);
  EXPECT_FALSE(AngleFunction::linear(g, {1.0, gamma_}).circle_valued());
}

TEST(AngleFunction, FromClosedFormSplitsPeriodsAndPrimitive) {
  Grid g(2, 32);
  auto h = ScalarField::sample(g, [](const Vec& x) { return 0.2 * std::sin(2.0 * M_PI * (x[0] + x[1])); });
  auto omega = DifferentialForm::constant(g, 1, {1.0, -0.5}) + gradient_form(h);
  auto F = AngleFunction::from_closed_form(omega);
  EXPECT_NEAR(F.periods()[0], 1.0, 1e-14);
  EXPECT_NEAR(F.periods()[1], -0.5, 1e-14);
  EXPECT_LT((F.primitive() - h).sup_norm(), 1e-13);
  EXPECT_LT((F.differential() - omega).norm().sup, 1e-12);
}

TEST(Reparametrize, UnitReturnRate) {
  for (double eps : {0.3, 0.5, 0.9}) {
    Grid g(2, 64);
    auto X = stream(g, eps);
    auto F = AngleFunction::linear(g, {1.0, 0.0});
    auto rp = flow::reparametrize_unit_return(X, F);
    auto rate = pair(F.differential(), rp.field);
    EXPECT_LT(rate.map([](double v) { return v - 1.0; }).sup_norm(), 1e-12);
  }
}

TEST(Reparametrize, RejectsNonTransverse) {
  Grid g(2, 16);
  auto X = VectorField::constant(g, {0.0, 1.0});
  EXPECT_THROW(flow::reparametrize_unit_return(X, AngleFunction::linear(g, {1.0, 0.0})), Rejected);
}

TEST(LevelSet, SolvesGraphAndCountsSheets) {
  Grid g(2, 32);
  auto h = ScalarField::sample(g, [](const Vec& x) { return 0.05 * std::sin(2.0 * M_PI * x[1]); });
  flow::LevelSet ls(AngleFunction({2.0, 1.0}, h), 0.3);
  EXPECT_EQ(ls.sheets(), 2);
  EXPECT_EQ(ls.axis(), 0);
  for (int m = 0; m < 2; ++m) {
    Vec x = ls.solve({0.37, 0.0, 0.0}, m);
    double v = ls.function().value(x) - 0.3;
    EXPECT_NEAR(v - std::round(v), 0.0, 1e-13);
    EXPECT_DOUBLE_EQ(x[1], 0.37);
  }
  EXPECT_THROW(flow::LevelSet(AngleFunction::linear(g, {1.0, gamma_}), 0.0), std::invalid_argument);
}

TEST(CrossSection, CoordinateCircle) {
  Grid g(2, 16);
  auto X = VectorField::constant(g, {1.0, gamma_});
  auto cs = flow::make_cross_section(X, AngleFunction::linear(g, {1.0, 0.0}), 1, 0.0, 16);
  EXPECT_EQ(cs.sheets(), 1);
  EXPECT_EQ(cs.mesh.size(), 16u);
  for (const auto& x : cs.mesh) EXPECT_NEAR(circle_distance(x[0], 0.0), 0.0, 1e-15);
  EXPECT_EQ(cs.orientation, 1);
}

TEST(CrossSection, IntegerClassTwoOne) {
  Grid g(2, 16);
  auto X = VectorField::constant(g, {1.0, gamma_});
  auto cs = flow::make_cross_section(X, AngleFunction::linear(g, {2.0, 1.0}), 1, 0.0, 32);
  EXPECT_EQ(cs.period_gcd, 1);
  EXPECT_EQ(cs.sheets(), 2);
  for (const auto& x : cs.mesh) {
    double v = 2.0 * x[0] + x[1];
    EXPECT_NEAR(v - std::round(v), 0.0, 1e-12);
  }
}

TEST(CrossSection, RejectsNonTransverse) {
  Grid g(2, 16);
  auto X = VectorField::constant(g, {0.0, 1.0});
  EXPECT_THROW(flow::make_cross_section(X, AngleFunction::linear(g, {1.0, 0.0}), 1, 0.0, 8), Rejected);
}

TEST(Poincare, LinearFlowRotation) {
  Grid g(2, 64);
  auto X = VectorField::constant(g, {1.0, gamma_});
  auto pd = flow::poincare_map(X, AngleFunction::linear(g, {1.0, 0.0}), 0.0, 64, 1e-3);
  EXPECT_EQ(pd.failures(), 0u);
  double e = 0.0, et = 0.0;
  for (std::size_t i = 0; i < pd.params.size(); ++i) {
    e = std::max(e, circle_distance(pd.return_params[i][0], pd.params[i][0] + gamma_));
    et = std::max(et, std::abs(pd.times[i] - 1.0));
  }
  EXPECT_LT(e, 1e-8);
  EXPECT_LT(et, 1e-8);
}

TEST(Poincare, StreamReturnTime) {
  for (double eps : {0.3, 0.5, 0.9}) {
    Grid g(2, 64);
    auto pd = flow::poincare_map(stream(g, eps), AngleFunction::linear(g, {1.0, 0.0}), 0.0, 64, 1e-3);
    double e = 0.0;
    for (std::size_t i = 0; i < pd.params.size(); ++i) {
      double y = pd.params[i][0];
      e = std::max(e, std::abs(pd.times[i] - 1.0 / (1.0 + eps * std::sin(2.0 * M_PI * y))));
      EXPECT_NEAR(circle_distance(pd.return_params[i][0], y), 0.0, 1e-12);
    }
    EXPECT_LT(e, 1e-6) << "eps=" << eps;
  }
}

TEST(Poincare, RequiresIntegerPeriods) {
  Grid g(2, 16);
  auto X = VectorField::constant(g, {1.0, gamma_});
  EXPECT_THROW(flow::poincare_map(X, AngleFunction::linear(g, {1.0, gamma_}), 0.0, 8), std::invalid_argument);
}

TEST(Suspension, SpecialFlowHitsMatchFlow) {
  Grid g(2, 64);
  auto X = stream(g, 0.5);
  auto F = AngleFunction::linear(g, {1.0, 0.0});
  auto pd = flow::poincare_map(X, F, 0.0, 64, 1e-3);
  auto model = flow::SuspensionModel::from_poincare(pd);
  auto r = flow::orbit_equivalence_check(X, F, model, 100, 4);
  EXPECT_LT(r.sup, 1e-8);
}

TEST(Suspension, DetectsShiftedBaseMap) {
  Grid g(2, 32);
  auto X = VectorField::constant(g, {1.0, gamma_});
  auto F = AngleFunction::linear(g, {1.0, 0.0});
  auto model = flow::SuspensionModel::from_poincare(flow::poincare_map(X, F, 0.0, 32, 1e-3));
  EXPECT_LT(flow::orbit_equivalence_check(X, F, model, 20, 2).sup, 1e-8);
  EXPECT_GT(flow::orbit_equivalence_check(X, F, model.shifted(1e-3), 20, 2).sup, 1e-4);
}

TEST(Suspension, AdvanceWrapsAtRoof) {
  Grid g(2, 16);
  auto X = VectorField::constant(g, {2.0, 2.0 * gamma_});
  auto F = AngleFunction::linear(g, {1.0, 0.0});
  flow::SpecialFlow sf(flow::SuspensionModel::from_poincare(flow::poincare_map(X, F, 0.0, 16, 1e-3)));
  auto st = sf.advance({{0.1, 0.0, 0.0}, 0.0}, 1.25);  // roof is 1/2
  EXPECT_NEAR(st.height, 0.25, 1e-9);
  EXPECT_NEAR(circle_distance(st.base[0], 0.1 + 2.0 * gamma_), 0.0, 1e-9);
}

TEST(Suspension, RejectsMultiSheetData) {
  Grid g(2, 16);
  auto X = VectorField::constant(g, {1.0, gamma_});
  auto pd = flow::poincare_map(X, AngleFunction::linear(g, {2.0, 1.0}), 0.0, 8, 1e-3);
  EXPECT_EQ(pd.sheets, 2);
  EXPECT_THROW(flow::SuspensionModel::from_poincare(pd), std::invalid_argument);
}

TEST(Suspension, TorusFlow) {
  Grid g(3, 32);
  auto X = VectorField::sample(g, [](const Vec& x) {
    return Vec{1.0 + 0.3 * std::sin(2.0 * M_PI * x[2]), gamma_, 1.0 + 0.4 * std::sin(2.0 * M_PI * x[0])};
  });
  auto F = AngleFunction::linear(g, {1.0, 0.0, 0.0});
  auto pd = flow::poincare_map(X, F, 0.0, 32, 1e-3);
  auto model = flow::SuspensionModel::from_poincare(pd);
  EXPECT_LT(flow::orbit_equivalence_check(X, F, model, 100, 2).sup, 1e-8);
}
