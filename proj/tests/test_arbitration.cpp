#include <cmath>
#include <map>

#include "market/rng.hpp"
#include "support.hpp"

using namespace market;
using namespace market::testing;

namespace {

Salt salt_of(std::uint8_t b) {
  Salt s{};
  s.fill(b);
  return s;
}

TEST(Commitment, LayoutIsVoteSaltJuror) {
  const Salt salt = salt_of(0xab);
  std::string bytes(1, '\x01');
  bytes.append(salt.begin(), salt.end());
  const char id[8] = {0, 0, 0, 0, 0, 0, 0x01, 0x02};
  bytes.append(id, 8);
  EXPECT_EQ(commitment(Vote::for_claimant, salt, AccountId{0x0102}), sha256(bytes));
  EXPECT_NE(commitment(Vote::for_respondent, salt, AccountId{0x0102}), sha256(bytes));
  EXPECT_NE(commitment(Vote::for_claimant, salt, AccountId{0x0103}), sha256(bytes));
}

TEST(Sortition, RoundSizesDoublePlusOne) {
  const std::int64_t expected[] = {3, 7, 15, 31, 63};
  for (int k = 0; k < 5; ++k) EXPECT_EQ(jurors_for_round(3, k), expected[k]);
  for (std::int64_t n0 : {1, 3, 5}) {
    for (int k = 0; k <= 10; ++k) EXPECT_EQ(jurors_for_round(n0, k), (n0 + 1) * (std::int64_t{1} << k) - 1);
  }
}

TEST(Sortition, DrawIsPureDistinctAndSkipsZeroStake) {
  std::vector<Candidate> pool;
  for (std::uint64_t i = 1; i <= 10; ++i) pool.push_back({AccountId{i}, static_cast<Amount>(i % 4) * 10});
  const auto a = draw_jurors(pool, 5, 42);
  EXPECT_EQ(a, draw_jurors(pool, 5, 42));
  std::reverse(pool.begin(), pool.end());
  EXPECT_EQ(a, draw_jurors(pool, 5, 42)) << "input order must not matter";
  std::set<AccountId> seen(a.begin(), a.end());
  EXPECT_EQ(seen.size(), 5u);
  for (auto id : a) EXPECT_NE(raw(id) % 4, 0u);
  EXPECT_CODE(draw_jurors(pool, 9, 1), ErrorCode::InsufficientJurors);  // 8 staked
}

TEST(Sortition, SingleSeatFrequenciesFollowStake) {
  const std::vector<Candidate> pool{{AccountId{1}, 10}, {AccountId{2}, 5}, {AccountId{3}, 0}, {AccountId{4}, 1}};
  std::map<AccountId, int> hits;
  const int n = 40000;
  for (int i = 0; i < n; ++i) hits[draw_jurors(pool, 1, static_cast<std::uint64_t>(i) * 7919 + 1)[0]]++;
  EXPECT_EQ(hits[AccountId{3}], 0);
  const double total = 16;
  for (auto [id, w] : {std::pair{AccountId{1}, 10.0}, {AccountId{2}, 5.0}, {AccountId{4}, 1.0}}) {
    const double p = w / total;
    const double sigma = std::sqrt(n * p * (1 - p));
    EXPECT_NEAR(hits[id], n * p, 4 * sigma);
  }
}

TEST(RuleTable, DefaultRows) {
  const auto& t = default_rule_table();
  auto winner = [&](bool ti, bool ds, bool rr, bool dm) {
    const auto* row = evaluate_rules(t, EvidenceFlags{ti, ds, rr, dm});
    return row ? row->winner : Party::buyer;
  };
  EXPECT_EQ(winner(false, false, true, false), Party::buyer);
  EXPECT_EQ(winner(true, true, false, true), Party::buyer);
  EXPECT_EQ(winner(false, true, false, false), Party::seller);
  EXPECT_EQ(winner(true, false, false, false), Party::seller);
  EXPECT_EQ(winner(false, false, false, false), Party::buyer);
  // Every flag combination reaches some row.
  for (int bits = 0; bits < 16; ++bits) {
    EXPECT_NE(evaluate_rules(t, EvidenceFlags{bool(bits & 1), bool(bits & 2), bool(bits & 4), bool(bits & 8)}),
              nullptr);
  }
}

TEST(RuleTable, JsonRoundTripAndValidation) {
  const auto j = rule_table_to_json(default_rule_table());
  const auto back = rule_table_from_json(j);
  EXPECT_EQ(rule_table_to_json(back), j);
  EXPECT_CODE(rule_table_from_json(json::parse(R"([{"winner":"judge"}])")), ErrorCode::ValidationError);
  EXPECT_CODE(rule_table_from_json(json::parse(R"([{"winner":"buyer","colour":true}])")), ErrorCode::ValidationError);
}

struct Court : ::testing::Test {
  World w;
  std::vector<AccountId> jurors;
  Arbitration& arb() { return w.engine.arbitration; }

  void SetUp() override {
    for (int i = 0; i < 20; ++i) {
      const auto j = w.engine.ledger.create_account(AccountKind::neutral, "j" + std::to_string(i));
      w.engine.reputation.init(j);
      w.engine.ledger.mint(Caller::genesis, j, TokenKind::LZS, tokens(200), "genesis");
      arb().join_pool(j, tokens(100));
      jurors.push_back(j);
    }
  }

  void vote_all(CaseId id, Vote v, bool skip_first = false) {
    const auto& r = arb().dispute(id).rounds.back();
    const auto js = r.jurors;
    for (std::size_t i = skip_first ? 1 : 0; i < js.size(); ++i) {
      arb().commit_vote(id, js[i], commitment(v, salt_of(static_cast<std::uint8_t>(i)), js[i]));
    }
    w.day(r.commit_deadline + 1);
    for (std::size_t i = skip_first ? 1 : 0; i < js.size(); ++i) {
      arb().reveal_vote(id, js[i], v, salt_of(static_cast<std::uint8_t>(i)));
    }
  }
};

TEST_F(Court, SmallDisputeResolvesInternallyNextDay) {
  const auto s = w.delivered(tokens(30));
  const auto id = arb().file_claim(w.buyer, s, DisputeReason::wrong_item_or_empty);
  EXPECT_EQ(arb().dispute(id).tier, Tier::internal);
  EXPECT_EQ(arb().dispute(id).route_basis, "at-or-below-threshold");
  w.next();
  // Delivered, not returned, no attested mismatch: the seller wins.
  EXPECT_EQ(arb().dispute(id).status, CaseStatus::closed);
  EXPECT_EQ(*arb().dispute(id).winner, Party::seller);
  EXPECT_EQ(w.state(s), ExchangeState::Settled);
}

TEST_F(Court, BuyerWinSlashesStakeToBuyer) {
  const auto s = w.delivered(tokens(30));
  const Amount before = w.lzs(w.buyer);
  const auto id = arb().file_claim(w.buyer, s, DisputeReason::wrong_description, false, true);
  w.next();
  EXPECT_EQ(*arb().dispute(id).winner, Party::buyer);
  EXPECT_EQ(w.lzs(w.buyer), before + tokens(30) + w.engine.config.ledger.seller_min_stake);
  EXPECT_FALSE(w.engine.ledger.seller_active(w.seller));
  EXPECT_NO_THROW(w.engine.ledger.check_conservation());
}

TEST_F(Court, ExternalCaseFullFlowWithAppeal) {
  const auto s = w.delivered(tokens(100));
  const auto id = arb().file_claim(w.buyer, s, DisputeReason::defective);
  EXPECT_EQ(arb().dispute(id).tier, Tier::external);
  EXPECT_CODE(arb().resolve_internal(id), ErrorCode::WrongTier);
  EXPECT_CODE(arb().open_external_case(id, tokens(1)), ErrorCode::InsufficientFee);
  arb().open_external_case(id, tokens(3));
  arb().submit_evidence(id, w.buyer, "h1");
  EXPECT_CODE(arb().submit_evidence(id, jurors[0], "h2"), ErrorCode::WrongParty);
  w.day(w.engine.config.arbitration.evidence_days + 1);
  ASSERT_EQ(arb().dispute(id).rounds.size(), 1u);
  EXPECT_EQ(arb().dispute(id).rounds[0].jurors.size(), 3u);
  EXPECT_EQ(arb().dispute(id).rounds[0].fee_pool, tokens(3));
  EXPECT_CODE(arb().tally_and_rule(id), ErrorCode::RoundNotClosed);

  // Round 0: everyone votes for the seller.
  const auto j0 = arb().dispute(id).rounds[0].jurors.front();
  EXPECT_CODE(arb().reveal_vote(id, j0, Vote::for_claimant, salt_of(1)), ErrorCode::CommitmentMismatch);
  vote_all(id, Vote::for_respondent);
  EXPECT_CODE(arb().reveal_vote(id, j0, Vote::for_respondent, salt_of(0)), ErrorCode::AlreadyVotedInRound);
  w.day(arb().dispute(id).rounds[0].reveal_deadline + 1);
  EXPECT_EQ(arb().dispute(id).status, CaseStatus::appeal_window);
  EXPECT_CODE(arb().appeal(id, w.seller, tokens(7)), ErrorCode::WrongParty);
  EXPECT_CODE(arb().appeal(id, w.buyer, tokens(3)), ErrorCode::InsufficientFee);
  arb().appeal(id, w.buyer, tokens(7));
  ASSERT_EQ(arb().dispute(id).rounds.size(), 2u);
  EXPECT_EQ(arb().dispute(id).rounds[1].jurors.size(), 7u);

  // Round 1: the buyer wins; one juror never shows up.
  vote_all(id, Vote::for_claimant, true);
  const auto absent = arb().dispute(id).rounds[1].jurors.front();
  w.day(arb().dispute(id).rounds[1].reveal_deadline + 1);
  EXPECT_TRUE(arb().dispute(id).rounds[1].ballots.at(absent).absent);
  w.day(arb().dispute(id).rounds[1].appeal_deadline + 1);
  const auto& c = arb().dispute(id);
  EXPECT_EQ(c.status, CaseStatus::closed);
  EXPECT_EQ(*c.winner, Party::buyer);
  EXPECT_EQ(c.closed_by, "court");
  EXPECT_EQ(w.engine.ledger.escrow(s)->status, EscrowStatus::refunded_to_buyer);
  EXPECT_NO_THROW(w.engine.ledger.check_conservation());
}

TEST_F(Court, UnpaidFeeRulesForRespondent) {
  const auto s = w.delivered(tokens(100));
  const auto id = arb().file_claim(w.buyer, s, DisputeReason::defective);
  w.day(w.engine.config.arbitration.evidence_days + 1);
  EXPECT_EQ(arb().dispute(id).closed_by, "fee-unpaid");
  EXPECT_EQ(*arb().dispute(id).winner, Party::seller);
}

TEST_F(Court, TooFewJurorsFallsBackToInternal) {
  for (std::size_t i = 2; i < jurors.size(); ++i) arb().leave_pool(jurors[i]);
  const auto s = w.delivered(tokens(100));
  const Amount before = w.lzs(w.buyer);
  const auto id = arb().file_claim(w.buyer, s, DisputeReason::defective);
  arb().open_external_case(id, tokens(3));
  w.day(w.engine.config.arbitration.evidence_days + 1);
  const auto& c = arb().dispute(id);
  EXPECT_EQ(c.status, CaseStatus::closed);
  EXPECT_EQ(c.closed_by, "internal");
  EXPECT_EQ(arb().stats().fallbacks, 1);
  EXPECT_EQ(w.lzs(w.buyer), before);  // fee refunded
}

TEST_F(Court, UnknownCaseAndNonJuror) {
  EXPECT_CODE(arb().dispute(CaseId{77}), ErrorCode::UnknownCase);
  const auto s = w.delivered(tokens(100));
  const auto id = arb().file_claim(w.buyer, s, DisputeReason::defective);
  EXPECT_CODE(arb().commit_vote(id, jurors[0], Digest{}), ErrorCode::NotAJuror);
  EXPECT_CODE(arb().leave_pool(w.buyer), ErrorCode::NotAJuror);
}

}  // namespace
