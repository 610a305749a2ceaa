#include "support.hpp"

using namespace market;
using namespace market::testing;

namespace {

// Independent statement of the schedule: total LZSP per party.
std::pair<Amount, Amount> oracle(const RewardClaim& c, const RewardSchedule& s) {
  Amount buyer = 0, seller = 0;
  const auto k = c.outcome.kind;
  if (k == OutcomeKind::resolved_mutually) return {s.resolution_reward, s.resolution_reward};
  if (k != OutcomeKind::success_confirmed && k != OutcomeKind::success_by_default) return {0, 0};
  const bool satisfied = c.outcome.satisfaction.value_or(false);
  if (c.qr_included && c.scanned_on_time && satisfied) buyer = s.buyer_reward;
  if (!c.qr_included && c.buyer_confirmed) buyer = s.default_grant;
  if (c.qr_included && c.dropoff_on_time) seller = s.seller_reward;
  return {buyer, seller};
}

TEST(Rewards, ExhaustiveAgainstOracle) {
  const RewardSchedule sched;
  const OutcomeKind kinds[] = {OutcomeKind::success_confirmed, OutcomeKind::success_by_default,
                               OutcomeKind::cancelled, OutcomeKind::resolved_mutually, OutcomeKind::arbitrated};
  const std::optional<bool> sats[] = {std::nullopt, true, false};
  int cases = 0;
  for (auto k : kinds) {
    for (auto sat : sats) {
      for (int bits = 0; bits < 16; ++bits) {
        RewardClaim c;
        c.buyer = AccountId{1};
        c.seller = AccountId{2};
        c.outcome.kind = k;
        c.outcome.satisfaction = sat;
        c.buyer_confirmed = bits & 1;
        c.scanned_on_time = bits & 2;
        c.qr_included = bits & 4;
        c.dropoff_on_time = bits & 8;
        Amount b = 0, s = 0;
        for (const auto& m : compute_rewards(c, sched)) {
          EXPECT_GT(m.amount, 0);
          (m.account == c.buyer ? b : s) += m.amount;
        }
        const auto [eb, es] = oracle(c, sched);
        EXPECT_EQ(b, eb) << to_string(k) << " bits=" << bits;
        EXPECT_EQ(s, es) << to_string(k) << " bits=" << bits;
        ++cases;
      }
    }
  }
  EXPECT_EQ(cases, 5 * 3 * 16);
}

TEST(Rewards, GrantedOncePerSession) {
  EngineConfig cfg;
  Trace trace;
  Ledger ledger(trace, cfg);
  RewardEngine engine(ledger, trace, cfg);
  const auto b = ledger.create_account(AccountKind::buyer);
  const auto s = ledger.create_account(AccountKind::seller);
  RewardClaim c{SessionId{1}, b, s, Outcome{OutcomeKind::resolved_mutually, {}, {}, {}}};
  engine.grant_rewards(c);
  EXPECT_CODE(engine.grant_rewards(c), ErrorCode::AlreadyGranted);
  EXPECT_EQ(engine.total_minted(), 2 * cfg.rewards.resolution_reward);
  EXPECT_EQ(ledger.supply(TokenKind::LZSP), engine.total_minted());
}

}  // namespace
