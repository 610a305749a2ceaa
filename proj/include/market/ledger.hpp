#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "market/config.hpp"
#include "market/trace.hpp"
#include "market/types.hpp"

namespace market {

enum class AccountKind : std::uint8_t { buyer, seller, neutral, system };

std::string_view to_string(AccountKind kind);

enum class StakeStatus : std::uint8_t { active, withdrawable, slashed, withdrawn };

std::string_view to_string(StakeStatus status);

/// Seller deposit that activates selling rights.
struct StakePosition {
  Amount amount = 0;
  Day start = 0;
  Day duration = 0;
  StakeStatus status = StakeStatus::active;

  /// Still held by the ledger (counts toward staked supply).
  bool held() const { return status == StakeStatus::active || status == StakeStatus::withdrawable; }
};

enum class EscrowStatus : std::uint8_t { locked, released_to_seller, refunded_to_buyer, split };

std::string_view to_string(EscrowStatus status);

struct EscrowAccount {
  SessionId session{};
  AccountId buyer{};
  Amount amount = 0;
  TokenKind token = TokenKind::LZS;
  EscrowStatus status = EscrowStatus::locked;
};

struct Disposition {
  enum class Kind : std::uint8_t { to_seller, to_buyer, split };
  Kind kind = Kind::to_seller;
  std::int64_t seller_bps = 10000;  // split only

  static Disposition to_seller() { return {Kind::to_seller, 10000}; }
  static Disposition to_buyer() { return {Kind::to_buyer, 0}; }
  static Disposition split(std::int64_t seller_bps) { return {Kind::split, seller_bps}; }
};

/// Net balance changes produced by one ledger operation.
struct Receipt {
  struct Line {
    AccountId account{};
    TokenKind token = TokenKind::LZS;
    Amount delta = 0;
  };
  std::vector<Line> lines;

  Amount delta_for(AccountId account, TokenKind token) const;
};

struct AccountRecord {
  AccountId id{};
  std::string label;
  AccountKind kind = AccountKind::neutral;
  std::array<Amount, 3> balances{};
  std::array<Amount, 3> bonded{};  // court stakes, governance delegation
  std::optional<StakePosition> stake;
  std::optional<TokenKind> payout_preference;

  Amount balance(TokenKind token) const { return balances[static_cast<std::size_t>(token)]; }
  Amount bond(TokenKind token) const { return bonded[static_cast<std::size_t>(token)]; }
};

struct TokenTotals {
  Amount balances = 0;
  Amount escrow = 0;
  Amount staked = 0;  // seller deposits plus bonds
  Amount minted = 0;
  Amount burned = 0;

  bool conserved() const { return balances + escrow + staked == minted - burned; }
};

using ConservationReport = std::array<TokenTotals, 3>;

/// Token accounting for LZS, LZSP and LZDC.
///
/// Every unit of supply enters through mint() and leaves through burn();
/// all other operations move value between balances, escrows, stakes and
/// bonds. conservation_report() recomputes the identity from scratch.
class Ledger {
 public:
  Ledger(Trace& trace, const EngineConfig& config);

  AccountId create_account(AccountKind kind, std::string label = {});

  bool exists(AccountId id) const { return accounts_.contains(id); }
  const AccountRecord& account(AccountId id) const;
  const std::map<AccountId, AccountRecord>& accounts() const { return accounts_; }
  Amount balance(AccountId id, TokenKind token) const { return account(id).balance(token); }

  void set_payout_preference(AccountId id, std::optional<TokenKind> token);

  /// LZSP may only be minted by the incentive engine or at genesis.
  void mint(Caller caller, AccountId to, TokenKind token, Amount amount, std::string_view source);
  void burn(AccountId from, TokenKind token, Amount amount, std::string_view reason);

  Receipt transfer(AccountId from, AccountId to, Amount amount, TokenKind token,
                   std::string_view memo = "transfer");

  // Seller deposit.
  const StakePosition& stake_deposit(AccountId seller, Amount amount, Day duration);
  bool seller_active(AccountId seller) const;
  /// active -> withdrawable. The caller vouches for the honest history.
  void mark_stake_withdrawable(Caller caller, AccountId seller);
  /// Returns principal plus configured yield to the spendable balance.
  Amount withdraw_stake(AccountId seller);
  /// Whole stake: to `beneficiary` when given, otherwise burned.
  Amount slash_stake(Caller caller, AccountId seller, std::optional<AccountId> beneficiary);
  /// Partial draw from an active stake, paid to `to`. Returns the amount drawn.
  Amount draw_stake(Caller caller, AccountId seller, Amount amount, AccountId to);

  // Escrow.
  const EscrowAccount& lock_escrow(SessionId session, AccountId buyer, Amount amount, TokenKind token);
  Receipt settle_escrow(Caller caller, SessionId session, Disposition disposition, AccountId seller);
  const EscrowAccount* escrow(SessionId session) const;

  /// Burns `amount` of `from` and mints the converted amount of `to`
  /// (floor rounding). Only LZS <-> LZDC.
  Amount convert(AccountId account, TokenKind from, TokenKind to, Amount amount);
  Amount quote(TokenKind from, TokenKind to, Amount amount) const;

  // Bonds: value locked outside the spendable balance for another module.
  void bond(AccountId account, TokenKind token, Amount amount, std::string_view purpose);
  void unbond(AccountId account, TokenKind token, Amount amount, std::string_view purpose);
  Amount slash_bond(Caller caller, AccountId account, TokenKind token, Amount amount, AccountId to);

  ConservationReport conservation_report() const;
  /// Throws InvariantViolation when the identity fails for any token.
  void check_conservation() const;

  Amount supply(TokenKind token) const;

  json snapshot() const;

 private:
  AccountRecord& mut(AccountId id);
  Amount& bal(AccountId id, TokenKind token) {
    return mut(id).balances[static_cast<std::size_t>(token)];
  }
  void require_positive(Amount amount) const;
  void require_funds(AccountId id, TokenKind token, Amount amount) const;

  Trace& trace_;
  const EngineConfig& config_;
  std::map<AccountId, AccountRecord> accounts_;
  std::map<SessionId, EscrowAccount> escrows_;
  std::array<Amount, 3> minted_{};
  std::array<Amount, 3> burned_{};
  std::uint64_t next_account_ = 1;
};

json account_json(AccountId id);

}  // namespace market
