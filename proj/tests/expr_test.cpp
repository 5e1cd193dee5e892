#include <gtest/gtest.h>

#include <filesystem>

#include "tsec/config.hpp"

using namespace tsec;
using namespace tsec::expr;

TEST(Expr, EvaluatesShear) {
  Node n = parse_field_expression("1 + 0.5*sin(2*pi*y)", 2);
  EXPECT_NEAR(evaluate(n, {0.3, 0.25, 0.0}), 1.5, 1e-15);
}

TEST(Expr, PeriodicityCheck) {
  EXPECT_NO_THROW(parse_field_expression("cos(2*pi*x)", 2));
  EXPECT_NO_THROW(parse_field_expression("sin(2*pi*(3*x - y)) * exp(cos(4*pi*y))", 2));
  EXPECT_THROW(parse_field_expression("sin(x)", 2), PeriodicityError);
  EXPECT_THROW(parse_field_expression("x + 1", 2), PeriodicityError);
  EXPECT_THROW(parse_field_expression("exp(2*pi*x)", 2), PeriodicityError);
  EXPECT_THROW(parse_field_expression("sin(pi*x)", 2), PeriodicityError);
  // A variable beyond the dimension is rejected.
  EXPECT_ANY_THROW(parse_field_expression("cos(2*pi*z)", 2));
}

TEST(Expr, Precedence) {
  Vec o{0.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(evaluate(parse_syntax("1 + 2*3"), o), 7.0);
  EXPECT_DOUBLE_EQ(evaluate(parse_syntax("(1 + 2)*3"), o), 9.0);
  EXPECT_DOUBLE_EQ(evaluate(parse_syntax("-2^2"), o), -4.0);
  EXPECT_DOUBLE_EQ(evaluate(parse_syntax("8/4/2"), o), 1.0);
  EXPECT_DOUBLE_EQ(evaluate(parse_syntax("2 - 3 - 4"), o), -5.0);
  EXPECT_NEAR(evaluate(parse_syntax("golden"), o), 0.5 * (std::sqrt(5.0) - 1.0), 1e-16);
}

TEST(Expr, VectorComponents) {
  Node n = parse_field_expression("[1 + 0.3*sin(2*pi*z), golden, 1 + 0.4*sin(2*pi*x)]", 3);
  auto c = components(n);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_NEAR(evaluate(c[2], {0.25, 0.0, 0.0}), 1.4, 1e-15);
  EXPECT_THROW(evaluate(n, {0.0, 0.0, 0.0}), std::invalid_argument);
  EXPECT_EQ(components(parse_syntax("3")).size(), 1u);
}

TEST(Expr, ParseErrorPosition) {
  try {
    parse_syntax("1 + \n  2 * )");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.column(), 7);
  }
  EXPECT_THROW(parse_syntax("sin(2*pi*x"), ParseError);
  EXPECT_THROW(parse_syntax("tan(x)"), ParseError);
  EXPECT_THROW(parse_syntax("1 $ 2"), ParseError);
}

TEST(Expr, PrintParseRoundTripOnCorpus) {
  std::vector<std::string> texts = {"1 + 0.5*sin(2*pi*y)", "-(1 - 2)*cos(2*pi*(x + y))^2", "2/(3 + cos(2*pi*x))",
                                    "[[4, 1], [1, 1 + 0.5*sin(2*pi*x)^2]]", "-2^2", "1 - (2 - 3)"};
  for (const auto& e : std::filesystem::directory_iterator(std::string(TSEC_SOURCE_DIR) + "/configs")) {
    auto cfg = cli::load_config(e.path().string());
    texts.push_back(to_string(cfg.field));
    texts.push_back(to_string(cfg.density));
  }
  for (const auto& t : texts) {
    Node n = parse_syntax(t);
    EXPECT_EQ(parse_syntax(to_string(n)), n) << t << " -> " << to_string(n);
  }
}
