#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "mlrisk/core_types.hpp"
#include "mlrisk/rng.hpp"

using namespace mlrisk;

namespace {

const ModelParams base{0.1, 2.3, 3.0, 0.2};

ErrorCode code_of(const ModelParams& p, const DividendStrategy& s) {
  try {
    validate_model(p, s);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(ValidateModel, AcceptsTableScenario) {
  const auto m = validate_model(base, {{5}, {0.05, 0.1}});
  EXPECT_EQ(m.layers(), 2u);
  EXPECT_TRUE(m.exponential_jumps());
  EXPECT_DOUBLE_EQ(m.claims().mean(), 3.0);
  EXPECT_DOUBLE_EQ(m.premiums().mean(), 0.2);
}

TEST(ValidateModel, RejectsBadInputs) {
  EXPECT_EQ(code_of({0.0, 2.3, 3, 0.2}, {{5}, {0.05, 0.1}}), ErrorCode::NonPositiveParameter);
  EXPECT_EQ(code_of(base, {{5, 3}, {0.05, 0.1, 0.1}}), ErrorCode::UnorderedThresholds);
  EXPECT_EQ(code_of(base, {{}, {}}), ErrorCode::EmptyRates);
  EXPECT_EQ(code_of(base, {{5}, {0.05}}), ErrorCode::RateCountMismatch);
  EXPECT_EQ(code_of(base, {{5}, {0.05, -0.1}}), ErrorCode::NonPositiveParameter);
  EXPECT_EQ(code_of({0.1, 2.3, std::nan(""), 0.2}, {{5}, {0.05, 0.1}}), ErrorCode::NonPositiveParameter);
}

TEST(ValidateModel, ListsEveryViolation) {
  try {
    validate_model({0.0, -1.0, 3.0, 0.2}, {{5, 3}, {0.05, 0.1, 0.1}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.violations().size(), 3u);
    EXPECT_TRUE(e.has(ErrorCode::NonPositiveParameter));
    EXPECT_TRUE(e.has(ErrorCode::UnorderedThresholds));
  }
}

TEST(ValidateModel, DistributionMeanMustMatch) {
  EXPECT_NO_THROW(validate_model(base, {{5}, {0.05, 0.1}}, JumpDistribution::gamma(2.0, 1.5)));
  try {
    validate_model(base, {{5}, {0.05, 0.1}}, JumpDistribution::gamma(2.0, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DistributionMismatch);
  }
}

TEST(NetProfit, MarginAndStrictness) {
  const auto ok = check_net_profit(base, {{5}, {0.05, 0.1}});
  EXPECT_TRUE(ok.holds);
  EXPECT_NEAR(ok.margin, 0.06, 1e-12);
  EXPECT_FALSE(check_net_profit(base, {{}, {0.2}}).holds);
  const auto edge = check_net_profit(base, {{}, {0.16}});
  EXPECT_FALSE(edge.holds);
  EXPECT_NEAR(edge.margin, 0.0, 1e-15);
}

TEST(NetProfit, OnlyMaximumRateMatters) {
  std::vector<double> rates{0.03, 0.12, 0.05, 0.08};
  const auto first = check_net_profit(base, {{1, 2, 3}, rates});
  std::sort(rates.begin(), rates.end());
  do {
    const auto r = check_net_profit(base, {{1, 2, 3}, rates});
    EXPECT_EQ(r.holds, first.holds);
    EXPECT_EQ(r.margin, first.margin);
  } while (std::next_permutation(rates.begin(), rates.end()));
}

TEST(LayerIndex, HalfOpenLayers) {
  EXPECT_EQ(layer_index({{5}, {0.05, 0.1}}, 2.0), 1u);
  EXPECT_EQ(layer_index({{5}, {0.05, 0.1}}, 5.0), 2u);
  EXPECT_EQ(layer_index({{3, 7}, {1, 1, 1}}, 7.5), 3u);
  EXPECT_EQ(layer_index({{3, 7}, {1, 1, 1}}, 0.0), 1u);
  EXPECT_EQ(layer_index({{}, {1}}, 1e9), 1u);
  EXPECT_THROW(layer_index({{5}, {0.05, 0.1}}, -1e-12), Error);
}

TEST(LayerIndex, MonotoneAndRightContinuous) {
  const DividendStrategy s{{1, 2.5, 4}, {1, 1, 1, 1}};
  std::size_t prev = 1;
  for (double x = 0; x < 6; x += 0.01) {
    const auto j = layer_index(s, x);
    EXPECT_GE(j, prev);
    prev = j;
  }
  for (double b : s.thresholds) EXPECT_EQ(layer_index(s, b), layer_index(s, b + 1e-9));
}

TEST(NoDividendRuin, TableValues) {
  EXPECT_NEAR(no_dividend_ruin(base, 0), 0.666667, 1e-6);
  EXPECT_NEAR(no_dividend_ruin(base, 10), 0.219462, 1e-6);
  EXPECT_NEAR(no_dividend_ruin(base, 50), 0.002577, 1e-6);
  const auto [coefficient, decay] = no_dividend_ruin_form(base);
  EXPECT_NEAR(coefficient, 0.666667, 1e-6);
  EXPECT_NEAR(decay, 0.111111, 1e-6);
}

TEST(NoDividendRuin, DecreasingProbability) {
  double prev = 1.0;
  for (double x = 0; x < 100; x += 0.5) {
    const double v = no_dividend_ruin(base, x);
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 1.0);
    if (x > 0) EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_THROW(no_dividend_ruin({0.1, 1.0, 3.0, 0.2}, 1.0), Error);
  EXPECT_THROW(no_dividend_ruin(base, -1.0), Error);
}

TEST(JumpDistribution, SampleMeansAndSums) {
  RngStream rng(11, 0);
  for (const auto& law : {JumpDistribution::exponential(3.0), JumpDistribution::gamma(0.5, 6.0),
                          JumpDistribution::gamma(4.0, 0.75), JumpDistribution::deterministic(3.0)}) {
    EXPECT_DOUBLE_EQ(law.mean(), 3.0);
    double sum = 0.0, sum_of_sums = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double v = law.sample(rng);
      ASSERT_GE(v, 0.0);
      sum += v;
      sum_of_sums += law.sample_sum(7, rng);
    }
    EXPECT_NEAR(sum / n, 3.0, 0.05);
    EXPECT_NEAR(sum_of_sums / n, 21.0, 0.2);
  }
  EXPECT_EQ(JumpDistribution::exponential(1.0).sample_sum(0, rng), 0.0);
}

TEST(JumpDistribution, GammaVarianceMatches) {
  RngStream rng(5, 1);
  const auto law = JumpDistribution::gamma(2.5, 2.0);
  double s = 0, s2 = 0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    const double v = law.sample(rng);
    s += v;
    s2 += v * v;
  }
  const double mean = s / n;
  EXPECT_NEAR(s2 / n - mean * mean, 2.5 * 4.0, 0.15);
}

TEST(PenaltyFunction, BuiltIns) {
  EXPECT_EQ(PenaltyFunction::constant_one()(3.0, 4.0), 1.0);
  EXPECT_EQ(PenaltyFunction::deficit_indicator(1.0)(0.0, 1.0), 0.0);
  EXPECT_EQ(PenaltyFunction::deficit_indicator(1.0)(0.0, 1.5), 1.0);
  EXPECT_DOUBLE_EQ(PenaltyFunction::deficit_power(2.0)(0.0, 3.0), 9.0);
  EXPECT_EQ(PenaltyFunction::deficit_power(0.0)(0.0, 0.0), 1.0);
  EXPECT_EQ(PenaltyFunction::custom([](double a, double b) { return a + b; })(1.0, 2.0), 3.0);
}

TEST(RngStream, DependsOnlyOnSeedAndStream) {
  RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  for (int i = 0; i < 100; ++i) {
    const auto va = a();
    EXPECT_EQ(va, b());
    EXPECT_NE(va, c());
    EXPECT_NE(va, d());
  }
  RngStream u(1, 0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
}
