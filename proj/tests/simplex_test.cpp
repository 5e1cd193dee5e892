#include <gtest/gtest.h>

#include <random>

#include "tsec/simplex.hpp"

using namespace tsec;

TEST(Simplex, TextbookProblem) {
  // max 3x + 5y  s.t.  x <= 4, 2y <= 12, 3x + 2y <= 18  ->  (2, 6), 36
  lp::Problem p(3, 2);
  p.a(0, 0) = 1.0;
  p.a(1, 1) = 2.0;
  p.a(2, 0) = 3.0;
  p.a(2, 1) = 2.0;
  p.b = {4.0, 12.0, 18.0};
  p.obj = {3.0, 5.0};
  auto r = lp::solve(p);
  ASSERT_EQ(r.status, lp::Status::optimal);
  EXPECT_NEAR(r.x[0], 2.0, 1e-12);
  EXPECT_NEAR(r.x[1], 6.0, 1e-12);
  EXPECT_NEAR(r.objective, 36.0, 1e-12);
}

TEST(Simplex, Unbounded) {
  lp::Problem p(1, 2);
  p.a(0, 0) = 1.0;
  p.a(0, 1) = -1.0;
  p.b = {1.0};
  p.obj = {0.0, 1.0};
  EXPECT_EQ(lp::solve(p).status, lp::Status::unbounded);
}

TEST(Simplex, RejectsNegativeRightHandSide) {
  lp::Problem p(1, 1);
  p.b = {-1.0};
  EXPECT_THROW(lp::solve(p), std::invalid_argument);
}

TEST(Simplex, HighlyDegenerateVertex) {
  // Many constraints tight at the optimum x = y = 1/2 of max x + y.
  int m = 200;
  lp::Problem p(m + 2, 2);
  for (int i = 0; i < m; ++i) {
    double t = (i + 0.5) / m;
    p.a(i, 0) = t;
    p.a(i, 1) = 1.0 - t;
    p.b[i] = 0.5;
  }
  p.a(m, 0) = 1.0;
  p.b[m] = 0.5;
  p.a(m + 1, 1) = 1.0;
  p.b[m + 1] = 0.5;
  p.obj = {1.0, 1.0};
  auto r = lp::solve(p);
  ASSERT_EQ(r.status, lp::Status::optimal);
  EXPECT_NEAR(r.objective, 1.0, 1e-12);
}

TEST(Simplex, FeasibleAndOptimalOnRandomProblems) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    int m = 15, n = 6;
    lp::Problem p(m, n);
    for (auto& v : p.A) v = u(rng);
    for (auto& v : p.b) v = 1.0 + u(rng);
    for (auto& v : p.obj) v = u(rng);
    auto r = lp::solve(p);
    ASSERT_EQ(r.status, lp::Status::optimal);
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += p.a(i, j) * r.x[j];
      EXPECT_LE(s, p.b[i] + 1e-10);
    }
    // No single coordinate direction can improve a vertex optimum by much.
    for (int j = 0; j < n; ++j) {
      double slack = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += p.a(i, k) * r.x[k];
        slack = std::min(slack, (p.b[i] - s) / p.a(i, j));
      }
      EXPECT_LT(slack * p.obj[j], 1e-9);
    }
  }
}
