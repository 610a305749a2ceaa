#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "market/engine.hpp"

namespace market {
inline void PrintTo(ErrorCode c, std::ostream* os) { *os << to_string(c); }
inline void PrintTo(ExchangeState s, std::ostream* os) { *os << to_string(s); }
}  // namespace market

namespace market::testing {

#define EXPECT_CODE(stmt, expected)                                           \
  do {                                                                        \
    try {                                                                     \
      stmt;                                                                   \
      ADD_FAILURE() << "expected " << to_string(expected) << ", no error";    \
    } catch (const ::market::ProtocolError& e_) {                             \
      EXPECT_EQ(e_.code(), expected) << e_.what();                            \
    }                                                                         \
  } while (0)

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline std::filesystem::path source_dir() { return MARKET_SOURCE_DIR; }

/// An engine with a funded seller, buyer and helper to walk sessions.
struct World {
  explicit World(EngineConfig cfg = {}, std::uint64_t seed = 7) : engine(std::move(cfg), seed) {
    seller = engine.ledger.create_account(AccountKind::seller, "seller");
    buyer = engine.ledger.create_account(AccountKind::buyer, "buyer");
    for (auto a : {seller, buyer}) engine.reputation.init(a);
    engine.ledger.mint(Caller::genesis, seller, TokenKind::LZS, tokens(2000), "genesis");
    engine.ledger.mint(Caller::genesis, buyer, TokenKind::LZS, tokens(5000), "genesis");
    engine.ledger.stake_deposit(seller, engine.config.ledger.seller_min_stake, engine.config.ledger.stake_duration);
  }

  Engine engine;
  AccountId seller{};
  AccountId buyer{};

  ExchangeBook& ex() { return engine.exchange; }
  Day today() const { return engine.today(); }
  void day(Day d) { engine.begin_day(d); }
  void next() { engine.begin_day(engine.today() + 1); }

  SessionId open(Amount price = tokens(100)) {
    const auto& l = ex().list_item(seller, "item", price, TokenKind::LZS, engine.config.categories.front());
    return ex().request_purchase(buyer, l.id);
  }
  SessionId funded(Amount price = tokens(100)) {
    const auto s = open(price);
    ex().validate_sale(seller, s);
    ex().agree_terms(buyer, s);
    ex().fund_escrow(buyer, s);
    return s;
  }
  SessionId in_transit(Amount price = tokens(100)) {
    const auto s = funded(price);
    ex().issue_qr(seller, s);
    ex().confirm_dropoff(seller, s, true, TrackingReport::informed, "TRK");
    return s;
  }
  SessionId delivered(Amount price = tokens(100)) {
    const auto s = in_transit(price);
    ex().mark_delivered(s);
    return s;
  }
  void scan(SessionId s) { ex().confirm_receipt(buyer, s, Confirmation::scan(*ex().session(s).qr)); }

  ExchangeState state(SessionId s) const { return engine.exchange.session(s).state; }
  Amount lzs(AccountId a) const { return engine.ledger.balance(a, TokenKind::LZS); }
};

}  // namespace market::testing
