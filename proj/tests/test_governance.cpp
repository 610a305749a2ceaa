#include "market/rng.hpp"
#include "support.hpp"

using namespace market;
using namespace market::testing;

namespace {

// Independent oracle: 80% participation of five, at least half in favour.
bool oracle(const std::array<Signature, 5>& sigs) {
  int cast = 0, yes = 0;
  for (auto s : sigs) {
    if (s != Signature::absent) ++cast;
    if (s == Signature::yes) ++yes;
  }
  return cast * 10 >= 5 * 8 && yes * 2 >= cast;
}

TEST(Committee, AllAssignmentsMatchOracle) {
  int approvals = 0;
  for (int code = 0; code < 243; ++code) {
    std::array<Signature, 5> sigs{};
    int c = code;
    std::size_t cast = 0, yes = 0;
    for (auto& s : sigs) {
      s = static_cast<Signature>(c % 3);
      c /= 3;
      if (s != Signature::absent) ++cast;
      if (s == Signature::yes) ++yes;
    }
    EXPECT_EQ(committee_approves(cast, yes, false), oracle(sigs)) << code;
    approvals += oracle(sigs);
  }
  // cast=5: yes>=3 -> 16; cast=4 (5 ways to pick the absentee): yes>=2 -> 11 each.
  EXPECT_EQ(approvals, 16 + 5 * 11);
  EXPECT_FALSE(committee_approves(4, 2, true));
  EXPECT_TRUE(committee_approves(4, 3, true));
}

TEST(Payload, EncodingAndValidation) {
  EXPECT_EQ(encode_int64(1), "0000000000000001");
  EXPECT_EQ(encode_int64(-1), "ffffffffffffffff");
  const auto p = ProposalPayload::set_key("deadlines.B", 12, "longer");
  EXPECT_TRUE(payload_problems(p).empty());
  std::vector<std::string> errs;
  EXPECT_EQ(apply_payload(EngineConfig{}, p, errs).deadlines.B, 12);
  EXPECT_TRUE(errs.empty());
  EXPECT_FALSE(payload_problems(ProposalPayload::set_key("deadlines.Z", 1, "test")).empty());
  auto bad = p;
  bad.calldata = {"zz"};
  EXPECT_FALSE(payload_problems(bad).empty());
  // B' must stay below B.
  apply_payload(EngineConfig{}, ProposalPayload::set_key("deadlines.B", 2, "test"), errs);
  EXPECT_FALSE(errs.empty());
  const auto cat = ProposalPayload::category(true, "vinyl", "test");
  errs.clear();
  const auto cfg = apply_payload(EngineConfig{}, cat, errs);
  EXPECT_NE(std::find(cfg.categories.begin(), cfg.categories.end(), "vinyl"), cfg.categories.end());
  EXPECT_EQ(ProposalPayload::from_json(p.to_json()).to_json(), p.to_json());
  EXPECT_CODE(ProposalPayload::from_json(json::parse(R"({"targets":[],"bogus":1})")), ErrorCode::MalformedPayload);
}

struct Dao : ::testing::Test {
  Engine e{EngineConfig{}, 1};
  std::vector<AccountId> members;
  AccountId basic{};
  Governance& gov() { return e.governance; }

  AccountId make(const std::string& label, Amount lzsp) {
    const auto a = e.ledger.create_account(AccountKind::neutral, label);
    e.reputation.init(a);
    if (lzsp > 0) e.ledger.mint(Caller::genesis, a, TokenKind::LZSP, lzsp, "genesis");
    return a;
  }

  void SetUp() override {
    for (int i = 0; i < 6; ++i) {
      members.push_back(make("m" + std::to_string(i), tokens(200)));
      gov().found_member(members.back());
    }
    basic = make("basic", tokens(10));
    gov().set_committee({members[0], members[1], members[2], members[3], members[4]});
    gov().set_auto_advance(false);
  }

  std::map<AccountId, Signature> sigs(int yes, int no) {
    std::map<AccountId, Signature> out;
    for (int i = 0; i < 5; ++i) out[members[i]] = i < yes ? Signature::yes : i < yes + no ? Signature::no : Signature::absent;
    return out;
  }
};

TEST_F(Dao, LayersAndVoteCap) {
  EXPECT_EQ(gov().layer(members[0]), Layer::member);
  EXPECT_EQ(gov().layer(basic), Layer::basic);
  e.ledger.mint(Caller::genesis, members[5], TokenKind::LZSP, tokens(5000), "genesis");
  EXPECT_EQ(gov().vote_weight(members[5]), e.config.governance.vote_cap);
  EXPECT_EQ(gov().quorum_weight(), e.ledger.supply(TokenKind::LZSP) / 10);
}

TEST_F(Dao, LowMediumLifecycleExecutes) {
  const auto id = gov().submit_proposal(basic, ProposalLevel::low_medium,
                                        ProposalPayload::set_key("market.listing_floor_usd", 5 * kMicro, "cheaper"));
  EXPECT_EQ(gov().proposal(id).closes, 7);
  EXPECT_EQ(e.ledger.balance(basic, TokenKind::LZSP), tokens(9));  // fee burned
  EXPECT_CODE(gov().vote(basic, id, Direction::up), ErrorCode::NotAMember);
  for (int i = 0; i < 3; ++i) gov().vote(members[i], id, Direction::up);
  EXPECT_CODE(gov().vote(members[0], id, Direction::up), ErrorCode::AlreadyVoted);
  EXPECT_CODE(gov().finalize(id), ErrorCode::StillActive);
  e.begin_day(6);
  gov().vote(members[3], id, Direction::down);
  e.begin_day(7);
  EXPECT_CODE(gov().vote(members[4], id, Direction::down), ErrorCode::NotActive);
  EXPECT_EQ(gov().finalize(id), ProposalState::approved);
  EXPECT_EQ(*gov().proposal(id).veto_deadline, 10);
  EXPECT_CODE(gov().queue(id), ErrorCode::StillActive);
  e.begin_day(11);
  gov().queue(id);
  EXPECT_EQ(gov().execute(id), ProposalState::executed);
  EXPECT_EQ(e.config.market.listing_floor_usd, 5 * kMicro);
  EXPECT_CODE(gov().execute(id), ErrorCode::NotQueued);
}

TEST_F(Dao, HighLevelNeedsMembershipAndRatification) {
  const auto payload = ProposalPayload::set_key("deadlines.F", 40, "longer returns");
  EXPECT_CODE(gov().submit_proposal(basic, ProposalLevel::high, payload), ErrorCode::NotAMember);
  const auto id = gov().submit_proposal(members[5], ProposalLevel::high, payload);
  EXPECT_EQ(gov().proposal(id).closes, 30);
  for (int i = 0; i < 4; ++i) gov().vote(members[i], id, Direction::up);
  e.begin_day(30);
  gov().finalize(id);
  EXPECT_CODE(gov().queue(id), ErrorCode::NotApproved);
  EXPECT_CODE(gov().committee_decide(DecisionKind::ratify, id, std::map<AccountId, Signature>{{basic, Signature::yes}}),
              ErrorCode::NotCommitteeMember);
  EXPECT_TRUE(gov().committee_decide(DecisionKind::ratify, id, sigs(3, 1)));
  e.begin_day(34);
  gov().queue(id);
  gov().execute(id);
  EXPECT_EQ(e.config.deadlines.F, 40);
}

TEST_F(Dao, VetoAndRefusedRatification) {
  const auto a = gov().submit_proposal(members[5], ProposalLevel::low_medium,
                                       ProposalPayload::set_key("arbitration.fee_per_juror", 2 * kMicro, "test"));
  gov().vote(members[0], a, Direction::up);
  e.begin_day(7);
  gov().finalize(a);
  EXPECT_FALSE(gov().committee_decide(DecisionKind::veto, a, sigs(2, 1)));  // only 3 cast
  EXPECT_TRUE(gov().committee_decide(DecisionKind::veto, a, sigs(4, 0)));
  EXPECT_EQ(gov().proposal(a).state, ProposalState::vetoed);
  EXPECT_CODE(gov().queue(a), ErrorCode::Vetoed);

  const auto b = gov().submit_proposal(members[5], ProposalLevel::high, ProposalPayload::set_key("deadlines.E", 15, "test"));
  gov().vote(members[0], b, Direction::up);
  e.begin_day(37);
  gov().finalize(b);
  EXPECT_FALSE(gov().committee_decide(DecisionKind::ratify, b, sigs(1, 4)));
  EXPECT_EQ(gov().proposal(b).state, ProposalState::rejected);
}

TEST_F(Dao, QuorumAndMajority) {
  const auto id = gov().submit_proposal(members[5], ProposalLevel::low_medium, ProposalPayload::set_key("deadlines.C", 8, "test"));
  gov().vote(members[0], id, Direction::up);
  gov().vote(members[1], id, Direction::down);
  e.begin_day(7);
  EXPECT_EQ(gov().finalize(id), ProposalState::rejected);  // tie
}

TEST_F(Dao, MiscategorizationEscalatesToBlacklist) {
  for (int round = 1; round <= 2; ++round) {
    const auto id = gov().submit_proposal(basic, ProposalLevel::low_medium, ProposalPayload::set_key("deadlines.A", 6, "test"));
    EXPECT_TRUE(gov().committee_decide(DecisionKind::miscategorized, id, sigs(5, 0)));
    EXPECT_EQ(gov().proposal(id).state, ProposalState::rejected);
  }
  EXPECT_TRUE(gov().blacklisted(basic));
  EXPECT_CODE(gov().submit_proposal(basic, ProposalLevel::low_medium, ProposalPayload::set_key("deadlines.A", 6, "test")),
              ErrorCode::Blacklisted);
  e.begin_day(8);
  EXPECT_FALSE(gov().blacklisted(basic));
}

TEST_F(Dao, DelegationMovesWeight) {
  EXPECT_CODE(gov().delegate(members[0], members[0]), ErrorCode::SelfDelegation);
  EXPECT_CODE(gov().delegate(members[0], basic), ErrorCode::NotAMember);
  const Amount w1 = gov().vote_weight(members[1]);
  gov().delegate(members[0], members[1]);
  EXPECT_EQ(gov().layer(members[0]), Layer::delegate);
  EXPECT_EQ(gov().vote_weight(members[0]), 0);
  EXPECT_EQ(gov().vote_weight(members[1]), w1 + tokens(200));
  const auto id = gov().submit_proposal(members[5], ProposalLevel::low_medium, ProposalPayload::set_key("deadlines.C", 8, "test"));
  EXPECT_CODE(gov().vote(members[0], id, Direction::up), ErrorCode::NotAMember);
  gov().undelegate(members[0]);
  EXPECT_EQ(gov().layer(members[0]), Layer::member);
  EXPECT_EQ(e.ledger.balance(members[0], TokenKind::LZSP), tokens(200));
  EXPECT_CODE(gov().undelegate(members[0]), ErrorCode::NotAMember);
  EXPECT_NO_THROW(e.ledger.check_conservation());
}

TEST_F(Dao, FailedExecutionLeavesConfigUntouched) {
  const auto before = e.config.to_json();
  const auto id = gov().submit_proposal(members[5], ProposalLevel::low_medium,
                                        ProposalPayload::set_key("deadlines.B_prime", 50, "longer than B"));
  gov().vote(members[0], id, Direction::up);
  e.begin_day(7);
  gov().finalize(id);
  e.begin_day(11);
  gov().queue(id);
  EXPECT_EQ(gov().execute(id), ProposalState::failed);
  EXPECT_EQ(e.config.to_json(), before);
}

}  // namespace
