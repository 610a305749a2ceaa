#include "market/types.hpp"

namespace market {

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::LZS:
      return "LZS";
    case TokenKind::LZSP:
      return "LZSP";
    case TokenKind::LZDC:
      return "LZDC";
  }
  return "?";
}

std::optional<TokenKind> parse_token(std::string_view text) {
  for (auto kind : kAllTokens) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

std::string_view to_string(Party party) { return party == Party::buyer ? "buyer" : "seller"; }

std::string_view to_string(ErrorCode code) {
  switch (code) {
#define MARKET_ERR(name) \
  case ErrorCode::name:  \
    return #name;
    MARKET_ERR(InsufficientFunds)
    MARKET_ERR(ZeroAmount)
    MARKET_ERR(AlreadyStaked)
    MARKET_ERR(BelowMinimumStake)
    MARKET_ERR(DuplicateEscrow)
    MARKET_ERR(UnsupportedToken)
    MARKET_ERR(AlreadySettled)
    MARKET_ERR(UnauthorizedCaller)
    MARKET_ERR(UnknownAccount)
    MARKET_ERR(UnknownEscrow)
    MARKET_ERR(NoStake)
    MARKET_ERR(StakeLocked)
    MARKET_ERR(SellerNotActivated)
    MARKET_ERR(BelowMinimumValue)
    MARKET_ERR(ListingUnavailable)
    MARKET_ERR(SelfDealing)
    MARKET_ERR(WrongState)
    MARKET_ERR(WrongParty)
    MARKET_ERR(DeadlineExpired)
    MARKET_ERR(NonceMismatch)
    MARKET_ERR(CancellationWindowClosed)
    MARKET_ERR(ClockRegression)
    MARKET_ERR(UnknownSession)
    MARKET_ERR(AlreadyInitialized)
    MARKET_ERR(NotTerminal)
    MARKET_ERR(DuplicateFeedback)
    MARKET_ERR(NotParticipant)
    MARKET_ERR(AlreadyGranted)
    MARKET_ERR(InvalidParams)
    MARKET_ERR(NotClaimEligible)
    MARKET_ERR(WrongTier)
    MARKET_ERR(InsufficientFee)
    MARKET_ERR(InsufficientJurors)
    MARKET_ERR(NotAJuror)
    MARKET_ERR(CommitmentMismatch)
    MARKET_ERR(RoundNotClosed)
    MARKET_ERR(AppealWindowClosed)
    MARKET_ERR(UnknownCase)
    MARKET_ERR(AlreadyVotedInRound)
    MARKET_ERR(InsufficientLZSP)
    MARKET_ERR(MalformedPayload)
    MARKET_ERR(NotActive)
    MARKET_ERR(NotAMember)
    MARKET_ERR(AlreadyVoted)
    MARKET_ERR(StillActive)
    MARKET_ERR(NotCommitteeMember)
    MARKET_ERR(DuplicateSignature)
    MARKET_ERR(NotApproved)
    MARKET_ERR(NotQueued)
    MARKET_ERR(Vetoed)
    MARKET_ERR(LowReputationDelegatee)
    MARKET_ERR(SelfDelegation)
    MARKET_ERR(Blacklisted)
    MARKET_ERR(UnknownProposal)
    MARKET_ERR(NonpositiveRate)
    MARKET_ERR(EmptyInput)
    MARKET_ERR(ParseError)
    MARKET_ERR(ValidationError)
    MARKET_ERR(TamperedTrace)
    MARKET_ERR(InvariantViolation)
#undef MARKET_ERR
  }
  return "?";
}

ProtocolError::ProtocolError(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + (detail.empty() ? "" : ": " + detail)),
      code_(code) {}

std::optional<ErrorCode> parse_error_code(std::string_view text) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::InvariantViolation); ++i) {
    const auto code = static_cast<ErrorCode>(i);
    if (to_string(code) == text) return code;
  }
  return std::nullopt;
}

void fail(ErrorCode code, const std::string& detail) { throw ProtocolError(code, detail); }

Amount Rate::apply(Amount amount) const {
  const __int128 product = static_cast<__int128>(amount) * num;
  __int128 q = product / den;
  if (product % den != 0 && product < 0) --q;
  return static_cast<Amount>(q);
}

}  // namespace market
