#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace market {

/// Simulation time in whole days.
using Day = std::int64_t;

/// Token amounts in integer micro-units (1 token = 1'000'000).
using Amount = std::int64_t;

inline constexpr Amount kMicro = 1'000'000;

constexpr Amount tokens(std::int64_t whole) { return whole * kMicro; }

enum class AccountId : std::uint64_t {};
enum class SessionId : std::uint64_t {};
enum class ListingId : std::uint64_t {};
enum class CaseId : std::uint64_t {};
enum class ProposalId : std::uint64_t {};

template <typename Id>
constexpr std::uint64_t raw(Id id) {
  return static_cast<std::uint64_t>(id);
}

enum class TokenKind : std::uint8_t { LZS = 0, LZSP = 1, LZDC = 2 };

inline constexpr std::array<TokenKind, 3> kAllTokens{TokenKind::LZS, TokenKind::LZSP,
                                                     TokenKind::LZDC};

std::string_view to_string(TokenKind kind);
std::optional<TokenKind> parse_token(std::string_view text);

/// Which module is asking. Some ledger and reputation mutations are only
/// legal for protocol modules, never for an external actor.
enum class Caller : std::uint8_t {
  external,
  genesis,
  exchange,
  arbitration,
  incentives,
  governance,
};

enum class Party : std::uint8_t { buyer, seller };

std::string_view to_string(Party party);

enum class ErrorCode {
  // ledger
  InsufficientFunds,
  ZeroAmount,
  AlreadyStaked,
  BelowMinimumStake,
  DuplicateEscrow,
  UnsupportedToken,
  AlreadySettled,
  UnauthorizedCaller,
  UnknownAccount,
  UnknownEscrow,
  NoStake,
  StakeLocked,
  // exchange
  SellerNotActivated,
  BelowMinimumValue,
  ListingUnavailable,
  SelfDealing,
  WrongState,
  WrongParty,
  DeadlineExpired,
  NonceMismatch,
  CancellationWindowClosed,
  ClockRegression,
  UnknownSession,
  // reputation
  AlreadyInitialized,
  NotTerminal,
  DuplicateFeedback,
  NotParticipant,
  // incentives
  AlreadyGranted,
  InvalidParams,
  // arbitration
  NotClaimEligible,
  WrongTier,
  InsufficientFee,
  InsufficientJurors,
  NotAJuror,
  CommitmentMismatch,
  RoundNotClosed,
  AppealWindowClosed,
  UnknownCase,
  AlreadyVotedInRound,
  // governance
  InsufficientLZSP,
  MalformedPayload,
  NotActive,
  NotAMember,
  AlreadyVoted,
  StillActive,
  NotCommitteeMember,
  DuplicateSignature,
  NotApproved,
  NotQueued,
  Vetoed,
  LowReputationDelegatee,
  SelfDelegation,
  Blacklisted,
  UnknownProposal,
  // analytics
  NonpositiveRate,
  EmptyInput,
  // harness
  ParseError,
  ValidationError,
  TamperedTrace,
  InvariantViolation,
};

std::string_view to_string(ErrorCode code);
std::optional<ErrorCode> parse_error_code(std::string_view text);

/// Every rejected protocol operation throws this. The code is what callers
/// and tests branch on; the message is for humans.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& detail = {});

/// Positive rational used for exchange rates. Amount conversions floor.
struct Rate {
  std::int64_t num = 1;
  std::int64_t den = 1;

  bool valid() const { return num > 0 && den > 0; }
  /// floor(amount * num / den)
  Amount apply(Amount amount) const;
  Rate inverse() const { return Rate{den, num}; }
};

}  // namespace market
