#include <gtest/gtest.h>

#include <sstream>

#include "tsec/config.hpp"

using namespace tsec;
using namespace tsec::cli;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

const std::string base = "[experiment]\nname = t\ndimension = 2\nresolution = 16\n[flow]\nfield = \"[1, golden]\"\n";

}  // namespace

TEST(Config, DefaultsAndOverrides) {
  auto cfg = parse(base);
  EXPECT_EQ(cfg.name, "t");
  EXPECT_EQ(cfg.resolution, 16);
  EXPECT_EQ(cfg.options.truncation, 8);
  EXPECT_EQ(cfg.options.denominator, 64);
  EXPECT_FALSE(cfg.metric);
  EXPECT_FALSE(cfg.periods);
  Grid g(2, cfg.resolution);
  EXPECT_DOUBLE_EQ(sample_volume(cfg, g)[0][0], 1.0);
  auto cfg2 = parse(base + "[options]\ntruncation = 3\ndt = 5e-4\n[angle]\nperiods = \"[1, 0]\"\n");
  EXPECT_EQ(cfg2.options.truncation, 3);
  EXPECT_DOUBLE_EQ(cfg2.options.dt, 5e-4);
  ASSERT_TRUE(cfg2.periods);
  ASSERT_TRUE(cfg2.primitive);
}

TEST(Config, RejectsMalformedInput) {
  auto bad = [](const std::string& t) { EXPECT_THROW(parse(t), std::invalid_argument) << t; };
  bad("[experiment]\nresolution = 15\n[flow]\nfield = \"[1, 0]\"\n");
  bad("[experiment]\nresolution = 4\n[flow]\nfield = \"[1, 0]\"\n");
  bad("[experiment]\ndimension = 4\n[flow]\nfield = \"[1, 0, 0, 0]\"\n");
  bad("[experiment]\nname = x\n");
  bad("[flow]\nfield = \"[1, 0, 0]\"\n");
  bad("[flow]\nfield = \"[1, sin(y)]\"\n");
  bad("[flow]\nfield = \"[1, 0]\"\ndensity = \"[1, 1]\"\n");
  bad(base + "[options]\ntruncation = three\n");
  bad(base + "[options]\ndt = 1e-3x\n");
  bad(base + "[metric]\ng = \"[1, 0]\"\n");
  bad(base + "[angle]\nperiods = \"[1]\"\n");
  bad("not an ini = [\n[[");
}

TEST(Config, SamplingRejectsBadDensityAndMetric) {
  Grid g(2, 16);
  EXPECT_THROW(sample_volume(parse(base + "density = \"cos(2*pi*x)\"\n"), g), std::invalid_argument);
  EXPECT_THROW(sample_metric(parse(base + "[metric]\ng = \"[[1, 0.5], [0, 1]]\"\n"), g), std::invalid_argument);
  EXPECT_THROW(sample_metric(parse(base + "[metric]\ng = \"[[1, 2], [2, 1]]\"\n"), g), std::invalid_argument);
  auto m = sample_metric(parse(base + "[metric]\ng = \"[[4, 1], [1, 1]]\"\n"), g);
  EXPECT_DOUBLE_EQ(m.at(3)(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(m.at(3)(0, 0), 4.0);
}

TEST(Config, SampleFieldMatchesExpression) {
  auto cfg = parse("[experiment]\ndimension = 2\nresolution = 16\n[flow]\nfield = \"[1 + 0.5*sin(2*pi*y), 0]\"\n");
  Grid g(2, 16);
  auto X = sample_field(cfg, g);
  std::size_t i = g.linear_index({0, 4, 0});
  EXPECT_NEAR(X[0][i], 1.5, 1e-15);
  EXPECT_DOUBLE_EQ(X[1][i], 0.0);
}
