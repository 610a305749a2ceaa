#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "market/types.hpp"

namespace market {

enum class ExchangeState : std::uint8_t {
  Listed,
  PurchaseRequested,
  SellerValidated,
  TermsAgreed,
  EscrowFunded,
  QRIssued,
  AwaitingDropoff,
  InTransit,
  TrackingMissing,
  Delivered,
  AwaitingQR,
  AwaitingSatisfaction,
  ResolutionWindow,
  ReturnPending,
  Settled,
  Cancelled,
  Disputed,
};

inline constexpr std::size_t kExchangeStateCount = 17;

std::string_view to_string(ExchangeState state);
std::optional<ExchangeState> parse_exchange_state(std::string_view text);

inline bool is_terminal(ExchangeState state) {
  return state == ExchangeState::Settled || state == ExchangeState::Cancelled;
}

enum class CancelCode : std::uint8_t { C1 = 1, C2, C3, C4, C5 };

std::string_view to_string(CancelCode code);

enum class OutcomeKind : std::uint8_t {
  success_confirmed,
  success_by_default,
  cancelled,
  resolved_mutually,
  arbitrated,
};

std::string_view to_string(OutcomeKind kind);

struct Outcome {
  OutcomeKind kind = OutcomeKind::success_confirmed;
  std::optional<CancelCode> cancel;   // kind == cancelled
  std::optional<Party> winner;        // kind == arbitrated
  std::optional<bool> satisfaction;
};

std::string describe(const Outcome& outcome);

enum class TrackingStatus : std::uint8_t { none, informed, declared_lost };

std::string_view to_string(TrackingStatus status);

/// Sources of disputes between a buyer and a seller.
enum class DisputeReason : std::uint8_t {
  wrong_description,
  party_withdraws,
  no_news,
  not_delivered,
  wrong_item_or_empty,
  defective,
};

std::string_view to_string(DisputeReason reason);
std::optional<DisputeReason> parse_dispute_reason(std::string_view text);

using QrNonce = std::array<std::uint8_t, 16>;

}  // namespace market
