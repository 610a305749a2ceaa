#include "market/session.hpp"

namespace market {
namespace {

constexpr std::array<std::string_view, kExchangeStateCount> kStateNames{
    "Listed",        "PurchaseRequested", "SellerValidated",      "TermsAgreed",      "EscrowFunded",
    "QRIssued",      "AwaitingDropoff",   "InTransit",            "TrackingMissing",  "Delivered",
    "AwaitingQR",    "AwaitingSatisfaction", "ResolutionWindow",  "ReturnPending",    "Settled",
    "Cancelled",     "Disputed",
};

constexpr std::array<std::string_view, 6> kReasonNames{
    "wrong-description", "party-withdraws", "no-news", "not-delivered", "wrong-item-or-empty", "defective",
};

}  // namespace

std::string_view to_string(ExchangeState state) { return kStateNames[static_cast<std::size_t>(state)]; }

std::optional<ExchangeState> parse_exchange_state(std::string_view text) {
  for (std::size_t i = 0; i < kStateNames.size(); ++i) {
    if (kStateNames[i] == text) return static_cast<ExchangeState>(i);
  }
  return std::nullopt;
}

std::string_view to_string(CancelCode code) {
  switch (code) {
    case CancelCode::C1:
      return "C1";
    case CancelCode::C2:
      return "C2";
    case CancelCode::C3:
      return "C3";
    case CancelCode::C4:
      return "C4";
    case CancelCode::C5:
      return "C5";
  }
  return "?";
}

std::string_view to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::success_confirmed:
      return "success-confirmed";
    case OutcomeKind::success_by_default:
      return "success-by-default";
    case OutcomeKind::cancelled:
      return "cancelled";
    case OutcomeKind::resolved_mutually:
      return "resolved-mutually";
    case OutcomeKind::arbitrated:
      return "arbitrated";
  }
  return "?";
}

std::string describe(const Outcome& outcome) {
  std::string out(to_string(outcome.kind));
  if (outcome.cancel) out += "(" + std::string(to_string(*outcome.cancel)) + ")";
  if (outcome.winner) out += "(" + std::string(to_string(*outcome.winner)) + ")";
  return out;
}

std::string_view to_string(TrackingStatus status) {
  switch (status) {
    case TrackingStatus::none:
      return "none";
    case TrackingStatus::informed:
      return "informed";
    case TrackingStatus::declared_lost:
      return "declared-lost";
  }
  return "?";
}

std::string_view to_string(DisputeReason reason) { return kReasonNames[static_cast<std::size_t>(reason)]; }

std::optional<DisputeReason> parse_dispute_reason(std::string_view text) {
  for (std::size_t i = 0; i < kReasonNames.size(); ++i) {
    if (kReasonNames[i] == text) return static_cast<DisputeReason>(i);
  }
  return std::nullopt;
}

}  // namespace market
