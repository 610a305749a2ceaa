#include <cmath>

#include "market/analytics.hpp"
#include "support.hpp"

using namespace market;
using namespace market::testing;

namespace {

TEST(ExpStats, ClosedForms) {
  for (double lambda : {0.001, 0.02, 1.0, 7.5}) {
    const auto s = exp_stats(lambda);
    EXPECT_NEAR(s.mean * lambda, 1.0, 1e-12);
    EXPECT_NEAR(s.median * lambda, 0.6931471805599453, 1e-12);
    EXPECT_NEAR(s.frac_below_mean, 1 - 1 / M_E, 1e-12);
    // The median sits below the mean.
    EXPECT_LT(s.median, s.mean);
  }
  EXPECT_CODE(exp_stats(0), ErrorCode::NonpositiveRate);
  EXPECT_CODE(exp_stats(-1), ErrorCode::NonpositiveRate);
}

TEST(ExpStats, MonteCarloAgrees) {
  const double lambda = 0.05;
  const auto xs = sample_values(ExpModel{lambda}, 200000, 3);
  double sum = 0;
  std::size_t below = 0;
  for (double x : xs) {
    sum += x;
    if (x < 1 / lambda) ++below;
  }
  EXPECT_NEAR(sum / xs.size() * lambda, 1.0, 0.01);
  EXPECT_NEAR(static_cast<double>(below) / xs.size(), 1 - 1 / M_E, 0.005);
  const double d = ks_statistic(xs, [&](double x) { return model_cdf(ExpModel{lambda}, x); });
  EXPECT_LT(d, ks_critical_1pct(xs.size()));
  EXPECT_EQ(xs, sample_values(ExpModel{lambda}, 200000, 3));
}

TEST(Pareto, StatsAndSampling) {
  const ParetoModel m{3.0, 10.0};
  const auto s = pareto_stats(m);
  EXPECT_NEAR(s.median, 10 * std::pow(2.0, 1.0 / 3), 1e-12);
  EXPECT_NEAR(*s.mean, 15.0, 1e-12);
  EXPECT_FALSE(pareto_stats(ParetoModel{1.0, 1.0}).mean);
  const auto xs = sample_values(m, 50000, 9);
  for (double x : xs) ASSERT_GE(x, 10.0);
  EXPECT_LT(ks_statistic(xs, [&](double x) { return model_cdf(m, x); }), ks_critical_1pct(xs.size()));
}

TEST(Ks, DetectsWrongModel) {
  const auto xs = sample_values(ExpModel{1.0}, 5000, 1);
  EXPECT_GT(ks_statistic(xs, [](double x) { return model_cdf(ExpModel{2.0}, x); }), ks_critical_1pct(xs.size()));
  EXPECT_CODE(ks_statistic({}, [](double) { return 0.0; }), ErrorCode::EmptyInput);
}

TEST(Threshold, CountsAndCostsMatchRecount) {
  const std::vector<double> v{5, 10, 20, 20, 50, 80, 200};
  CostModel c;
  const auto r = threshold_report(v, 20, c);
  EXPECT_EQ(r.count_below, 4u);  // inclusive
  EXPECT_NEAR(r.fraction_below, 4.0 / 7, 1e-12);
  double internal = 0;
  for (double x : {5.0, 10.0, 20.0, 20.0}) internal += c.internal_fixed + c.internal_liability * x;
  const double expect = c.dispute_probability * (internal + 3 * c.external_fee) / 7;
  EXPECT_NEAR(r.expected_cost, expect, 1e-12);
  EXPECT_NEAR(expected_cost({5, 10, 20, 20, 50, 80, 200}, 20, c), expect, 1e-12);
  EXPECT_LE(r.recommended_cost, r.expected_cost + 1e-12);
  EXPECT_CODE(threshold_report({}, 1, c), ErrorCode::EmptyInput);
}

TEST(Threshold, RecommendedMatchesBruteForce) {
  const auto xs = sample_values(ExpModel{0.02}, 5000, 4);
  CostModel c;
  const auto r = threshold_report(xs, 50, c);
  auto sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  double best = 1e300;
  for (double t = 0; t <= r.recommended_threshold + 200; t += 1) best = std::min(best, expected_cost(sorted, t, c));
  EXPECT_NEAR(r.recommended_cost, best, 1e-9);
  // With fixed $2 + 5% vs $3 external, internal wins up to $20.
  EXPECT_NEAR(r.recommended_threshold, 20, 1.0);
}

TEST(CostModelJson, RoundTripAndValidation) {
  CostModel c;
  c.external_fee = 9;
  EXPECT_EQ(CostModel::from_json(c.to_json()).to_json(), c.to_json());
  EXPECT_CODE(CostModel::from_json(json::parse(R"({"external_fee":-1})")), ErrorCode::ValidationError);
}

}  // namespace
