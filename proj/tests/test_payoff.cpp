#include "market/payoff.hpp"
#include "market/rng.hpp"
#include "support.hpp"

using namespace market;
using namespace market::testing;

namespace {

const Profile kHonest{Play::honest, Play::honest};

TEST(Payoff, DefaultMatrixHasUniqueStrictHonestEquilibrium) {
  const PayoffParams p;
  const auto m = build_payoff_matrix(p);
  const auto ne = find_nash_equilibria(m);
  ASSERT_EQ(ne.size(), 1u);
  EXPECT_EQ(ne[0].profile, kHonest);
  EXPECT_TRUE(ne[0].strict);
  EXPECT_TRUE(is_social_optimum(kHonest, m));
  EXPECT_TRUE(is_pareto_undominated(kHonest, m));
  EXPECT_EQ(label(kHonest), "(s1,s1)");
  EXPECT_EQ(label({Play::dishonest, Play::honest}), "(s2,s1)");
}

TEST(Payoff, MarginsMatchClosedForm) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    PayoffParams p{1 + 99 * rng.unit(), 1 + 9 * rng.unit(), 5 * rng.unit(), 1 + 20 * rng.unit(),
                   1 + 20 * rng.unit(), 1 + 5 * rng.unit(), rng.chance(0.5)};
    const auto d = honest_margins(build_payoff_matrix(p), p);
    const double rho = p.include_reputation ? p.rho : 0;
    EXPECT_NEAR(d.buyer, 2 * p.V + p.r + 2 * rho, 1e-9);
    EXPECT_NEAR(d.seller, 2 * p.V + p.r + p.s_keep + p.s_lose + 2 * rho, 1e-9);
  }
}

TEST(Payoff, BestResponseOracleOverRandomParams) {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    PayoffParams p{1 + 99 * rng.unit(), 0.1 + 9 * rng.unit(), 5 * rng.unit(), 0.1 + 20 * rng.unit(),
                   0.1 + 20 * rng.unit(), 0.1 + 5 * rng.unit(), true};
    ASSERT_TRUE(p.strictly_valid());
    const auto m = build_payoff_matrix(p);
    // Hand-rolled: a profile is NE iff neither player gains by switching.
    int count = 0;
    for (int b = 0; b < 2; ++b) {
      for (int s = 0; s < 2; ++s) {
        const auto& c = m.cells[b][s];
        if (c.u1() >= m.cells[1 - b][s].u1() && c.u2() >= m.cells[b][1 - s].u2()) {
          ++count;
          EXPECT_EQ(b, 0);
          EXPECT_EQ(s, 0);
        }
      }
    }
    EXPECT_EQ(count, 1);
    EXPECT_EQ(find_nash_equilibria(m).size(), 1u);
    EXPECT_TRUE(is_social_optimum(kHonest, m));
  }
}

TEST(Payoff, ScaleInvariance) {
  const PayoffParams p;
  for (double k : {0.5, 3.0, 1000.0}) {
    const auto ne = find_nash_equilibria(build_payoff_matrix(p.scaled(k)));
    ASSERT_EQ(ne.size(), 1u);
    EXPECT_EQ(ne[0].profile, kHonest);
  }
}

TEST(Payoff, InvalidParamsRejected) {
  PayoffParams p;
  p.V = -1;
  EXPECT_CODE(build_payoff_matrix(p), ErrorCode::InvalidParams);
  p.V = std::nan("");
  EXPECT_CODE(build_payoff_matrix(p), ErrorCode::InvalidParams);
  EXPECT_CODE(PayoffParams::from_json(json::parse(R"({"W":1})")), ErrorCode::InvalidParams);
  EXPECT_EQ(PayoffParams::from_json(PayoffParams{}.to_json()).to_json(), PayoffParams{}.to_json());
}

TEST(Payoff, AnalyzerReport) {
  const auto j = analyze_game(PayoffParams{});
  EXPECT_EQ(j.at("schema"), "market.equilibrium/1");
  EXPECT_TRUE(j.at("honest_is_unique_strict_ne").get<bool>());
  EXPECT_EQ(j.at("matrix").size(), 4u);
  EXPECT_FALSE(render_game_text(j).empty());
}

}  // namespace
