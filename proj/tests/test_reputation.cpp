#include "market/rng.hpp"
#include "support.hpp"

using namespace market;
using namespace market::testing;

namespace {

struct RepFixture : ::testing::Test {
  EngineConfig cfg;
  Trace trace;
  ReputationBook book{trace, cfg};
  AccountId b{1}, s{2}, x{3};
  SessionParties done{b, s, true};
};

TEST_F(RepFixture, FreshAccountsStartAtInitial) {
  book.init(b);
  EXPECT_EQ(book.score(b), 50);
  EXPECT_CODE(book.init(b), ErrorCode::AlreadyInitialized);
  EXPECT_CODE(book.score(x), ErrorCode::UnknownAccount);
}

TEST_F(RepFixture, FeedbackRules) {
  book.init(b);
  book.init(s);
  const Feedback good{b, s, Polarity::good, "fast", SessionId{1}};
  EXPECT_CODE(book.apply_feedback(good, SessionParties{b, s, false}), ErrorCode::NotTerminal);
  EXPECT_EQ(book.apply_feedback(good, done), 52);
  EXPECT_CODE(book.apply_feedback(good, done), ErrorCode::DuplicateFeedback);
  EXPECT_CODE(book.apply_feedback(Feedback{x, s, Polarity::bad, {}, SessionId{1}}, done), ErrorCode::NotParticipant);
  EXPECT_CODE(book.apply_feedback(Feedback{s, s, Polarity::bad, {}, SessionId{1}}, done), ErrorCode::NotParticipant);
  EXPECT_EQ(book.apply_feedback(Feedback{s, b, Polarity::bad, {}, SessionId{1}}, done), 45);
  EXPECT_EQ(*book.record(s).history.back().comment, "fast");
}

TEST_F(RepFixture, PenaltiesOnlyFromProtocolModules) {
  book.init(s);
  EXPECT_CODE(book.penalize(Caller::external, s, "x", 5), ErrorCode::UnauthorizedCaller);
  EXPECT_CODE(book.penalize(Caller::governance, s, "x", 5), ErrorCode::UnauthorizedCaller);
  EXPECT_EQ(book.penalize(Caller::arbitration, s, "x", 5), 45);
  EXPECT_EQ(book.penalize(Caller::exchange, s, "x", -7), 45);  // never a gain
}

TEST_F(RepFixture, ClampsAtBothEnds) {
  book.init(s);
  for (int i = 0; i < 40; ++i) book.penalize(Caller::exchange, s, "x", 5);
  EXPECT_EQ(book.score(s), 0);
  for (int i = 0; i < 60; ++i) {
    book.apply_feedback(Feedback{b, s, Polarity::good, {}, SessionId{100u + i}}, SessionParties{b, s, true});
  }
  EXPECT_EQ(book.score(s), 100);
  EXPECT_EQ(book.replay(s), 100);
}

// The score equals a clamp-fold over the history, computed independently.
TEST(ReputationProperty, FuzzStaysInRangeAndReplays) {
  EngineConfig cfg;
  Trace trace;
  ReputationBook book(trace, cfg);
  std::vector<AccountId> ids;
  for (std::uint64_t i = 1; i <= 8; ++i) {
    ids.push_back(AccountId{i});
    book.init(ids.back());
  }
  std::map<AccountId, std::int64_t> model;
  for (auto id : ids) model[id] = 50;
  Rng rng(99);
  for (std::uint64_t step = 0; step < 20000; ++step) {
    const auto a = ids[rng.below(4)];
    const auto c = ids[4 + rng.below(4)];
    if (rng.chance(0.3)) {
      const auto amt = static_cast<std::int64_t>(rng.below(30));
      book.penalize(Caller::arbitration, a, "fuzz", amt);
      model[a] = std::clamp<std::int64_t>(model[a] - amt, 0, 100);
    } else {
      const bool good = rng.chance(0.6);
      book.apply_feedback(Feedback{c, a, good ? Polarity::good : Polarity::bad, {}, SessionId{step}},
                          SessionParties{a, c, true});
      model[a] = std::clamp<std::int64_t>(model[a] + (good ? 2 : -5), 0, 100);
    }
    ASSERT_EQ(book.score(a), model[a]);
  }
  for (auto id : ids) {
    EXPECT_GE(book.score(id), 0);
    EXPECT_LE(book.score(id), 100);
    EXPECT_EQ(book.replay(id), book.score(id));
  }
}

}  // namespace
