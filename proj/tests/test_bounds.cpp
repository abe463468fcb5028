#include <gtest/gtest.h>

#include "discrepancy/bounds.hpp"

using namespace discrepancy;
using namespace discrepancy::bounds;

TEST(RothConstant, SmallCases) {
  EXPECT_DOUBLE_EQ(roth_constant(2, 1), 1.0 / 32.0);
  EXPECT_DOUBLE_EQ(roth_constant(2, 2), 1.0 / 128.0);
  EXPECT_DOUBLE_EQ(roth_constant(3, 1), 2.0 / 243.0);
  EXPECT_THROW(roth_constant(1, 2), Error);
}

TEST(Eta, KnownValues) {
  const double want = (1.0 / 9.0) * std::pow(1.0 - std::cos(kPi / 9.0), 2.0);
  EXPECT_NEAR(eta(2, 1.0 / 18.0), want, 1e-17);
  EXPECT_NEAR(eta(1, 1.0 / 8.0), 0.0, 1e-17);
  EXPECT_NEAR(eta(3, 1.0 / 24.0), 0.0, 1e-17);
}

TEST(Halasz, ConstantChain) {
  // d = 1: conventions make the log and e factors 1.
  const double c1 = eta(1, 1.0 / 9.0) / (std::pow(2.0, 7.0) * kPi * kPi);
  EXPECT_NEAR(halasz_constant_squared(1), c1, 1e-18);
  EXPECT_DOUBLE_EQ(halasz_rhs_squared(1, 40), halasz_constant_squared(1));
  // d = 2, N = 10.
  const double c2 = eta(2, 1.0 / 18.0) / (std::pow(2.0, 10.0) * std::pow(kPi, 4.0)) * std::exp(1.0) * std::log(20.0);
  EXPECT_NEAR(halasz_rhs_squared(2, 10), c2, 1e-20);
}

TEST(KappaOpt, MaximizesObjective) {
  for (std::uint64_t b : {2u, 3u, 5u}) {
    const double k = kappa_opt(b);
    const double f = linf_objective(b, k);
    EXPECT_GT(f, 0.0);
    for (double t = 0.001; t < std::min(1.0, b - 1.0); t += 0.001) EXPECT_LE(linf_objective(b, t), f + 1e-15);
  }
  EXPECT_LT(kappa_opt(2), 0.2);
}

TEST(Registry, SelfCheck) {
  EXPECT_TRUE(registry_self_check());
  auto reg = registry(2, 2);
  EXPECT_FALSE(reg.empty());
  for (const auto& e : reg) EXPECT_FALSE(e.symbol.empty());
}

TEST(BoundReport, JsonRoundTrip) {
  BoundReport rep;
  rep.theorem = "3";
  rep.lhs = 0.123456789012345678;
  rep.rhs = 1e-300;
  rep.lhs_squared = rep.lhs * rep.lhs;
  rep.rhs_squared = 0.0;
  rep.lhs_squared_exact = "7/3";
  rep.constants = {{"c", 0.5, ConstantSource::calibrated}, {"C", 8, ConstantSource::convention}};
  rep.input = {32, 2, 128, std::nullopt, 0.2, 7, "random"};
  rep.extra["slope"] = 0.25;
  finalize(rep);
  EXPECT_TRUE(rep.verdict);
  const std::string text = to_json(rep).dump();
  EXPECT_EQ(report_from_json(nlohmann::json::parse(text)), rep);
}

TEST(BoundReport, InfiniteMarginSurvivesRoundTrip) {
  BoundReport rep;
  rep.theorem = "1";
  rep.lhs = 1.0;
  rep.rhs = 0.0;
  finalize(rep);
  EXPECT_TRUE(std::isinf(rep.margin));
  EXPECT_EQ(report_from_json(nlohmann::json::parse(to_json(rep).dump())), rep);
}

TEST(BoundReport, VerdictIsLhsAtLeastRhs) {
  BoundReport rep;
  rep.lhs = 1.0;
  rep.rhs = 1.0;
  finalize(rep);
  EXPECT_TRUE(rep.verdict);
  rep.lhs = std::nextafter(1.0, 0.0);
  finalize(rep);
  EXPECT_FALSE(rep.verdict);
}
