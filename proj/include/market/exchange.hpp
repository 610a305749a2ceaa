#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "market/config.hpp"
#include "market/ledger.hpp"
#include "market/reputation.hpp"
#include "market/rewards.hpp"
#include "market/rng.hpp"
#include "market/session.hpp"
#include "market/trace.hpp"

namespace market {

enum class ListingStatus : std::uint8_t { active, in_exchange, closed };

std::string_view to_string(ListingStatus status);

struct Listing {
  ListingId id{};
  AccountId seller{};
  std::string description;
  Amount price = 0;
  TokenKind token = TokenKind::LZS;
  std::string category;
  ListingStatus status = ListingStatus::active;
};

/// Who drives a transition. "engine" is the clock; "carrier" the courier feed.
enum class Actor : std::uint8_t { buyer, seller, either, carrier, engine, arbitration };

std::string_view to_string(Actor actor);

/// One edge of the exchange state machine.
struct TransitionRule {
  ExchangeState from;
  ExchangeState to;
  std::string_view rule;  // operation or timeout name
  std::string_view step;  // flowchart function label: "4", "9'", "C3", ...
  Actor actor;
};

/// The complete edge set. Every state change goes through it; docs ship a
/// copy that a test compares against this table.
const std::vector<TransitionRule>& transition_table();
const TransitionRule* find_transition(ExchangeState from, ExchangeState to, std::string_view rule);

/// Step labels every scenario corpus must cover, in flowchart order.
const std::vector<std::string>& all_step_labels();

enum class TrackingReport : std::uint8_t { informed, declared_lost, silent };

struct Anchors {
  std::optional<Day> T0;        // escrow funded
  std::optional<Day> T1;        // package dropped off
  std::optional<Day> T1_prime;  // buyer asked for a missing QR code
  std::optional<Day> T2;        // receipt confirmed
  std::optional<Day> T3;        // dissatisfaction declared
};

/// Facts a dispute needs about where it came from.
struct DisputeOrigin {
  AccountId claimant{};
  DisputeReason reason = DisputeReason::no_news;
  ExchangeState from = ExchangeState::InTransit;
  std::string rule;
  bool opt_external = false;
  bool docketed = false;  // picked up by arbitration
};

struct ExchangeSession {
  SessionId id{};
  ListingId listing{};
  AccountId buyer{};
  AccountId seller{};
  Amount price = 0;
  TokenKind token = TokenKind::LZS;
  ExchangeState state = ExchangeState::Listed;
  Day opened = 0;
  Day stage_day = 0;  // day of the last pre-escrow step
  Anchors anchors;
  std::optional<QrNonce> qr;
  std::optional<Day> qr_issued;
  bool qr_included = false;
  bool qr_supplied_by_engine = false;
  TrackingStatus tracking = TrackingStatus::none;
  std::string tracking_number;
  bool delivered = false;  // carrier reported delivery
  bool buyer_confirmed = false;
  bool scanned_on_time = false;
  bool dropoff_on_time = false;
  bool return_received = false;
  bool description_mismatch = false;  // attested by the buyer's claim
  bool escrow_released = false;       // seller already paid (Settled, C5 window)
  std::optional<CancelCode> pending_cancel;
  std::optional<Day> return_requested;
  std::optional<DisputeOrigin> dispute;
  Amount unrecovered = 0;  // clawback shortfall left after a refund
  std::optional<Outcome> outcome;
};

/// Buyer's way of confirming receipt.
struct Confirmation {
  enum class Via : std::uint8_t { scan, manual };
  Via via = Via::manual;
  QrNonce nonce{};

  static Confirmation scan(const QrNonce& n) { return {Via::scan, n}; }
  static Confirmation manual() { return {Via::manual, {}}; }
};

struct FiredTransition {
  SessionId session{};
  ExchangeState from;
  ExchangeState to;
  std::string rule;
  Day day = 0;
};

/// Buyer<->seller exchange engine: listings, sessions, deadlines.
///
/// Deadlines are inclusive: an action on day anchor + window succeeds, the
/// timeout fires on the first tick with day > anchor + window. Actions check
/// the deadline before the state, so a late action reports DeadlineExpired.
class ExchangeBook {
 public:
  ExchangeBook(Ledger& ledger, ReputationBook& reputation, RewardEngine& rewards, Trace& trace,
               const EngineConfig& config, std::uint64_t seed);

  Day today() const { return trace_.today(); }

  const Listing& list_item(AccountId seller, std::string description, Amount price, TokenKind token,
                           std::string category);
  SessionId request_purchase(AccountId buyer, ListingId listing);
  void validate_sale(AccountId seller, SessionId session);
  void agree_terms(AccountId party, SessionId session);
  void fund_escrow(AccountId buyer, SessionId session);
  const QrNonce& issue_qr(AccountId seller, SessionId session);
  void prepare_package(AccountId seller, SessionId session, bool qr_included);
  /// Prepares the package first when still in QRIssued.
  void confirm_dropoff(AccountId seller, SessionId session, bool qr_included, TrackingReport tracking,
                       std::string tracking_number = {});
  /// Late tracking news from TrackingMissing: informed or declared lost.
  void report_tracking(AccountId seller, SessionId session, TrackingReport tracking,
                       std::string tracking_number = {});
  void mark_delivered(SessionId session);
  void query_qr(AccountId buyer, SessionId session);
  const QrNonce& answer_qr(AccountId seller, SessionId session);
  void confirm_receipt(AccountId buyer, SessionId session, const Confirmation& how);
  void answer_satisfaction(AccountId buyer, SessionId session, bool satisfied);
  void resolve_mutually(AccountId party, SessionId session);
  CancelCode cancel(AccountId party, SessionId session);
  void return_received(AccountId seller, SessionId session);

  /// Opens a claim: the session moves to Disputed with the escrow frozen.
  void begin_dispute(AccountId claimant, SessionId session, DisputeReason reason, bool opt_external = false,
                     bool description_mismatch = false);
  /// Executes a final ruling against the escrow (or clawback after release).
  void apply_ruling(SessionId session, Party winner);

  bool claim_eligible(SessionId session) const;

  /// Advances the clock one day at a time, firing due timeouts in session-id
  /// order. Re-invoking with the current day fires nothing.
  std::vector<FiredTransition> tick(Day to_day);
  /// Fires what is due on `day` without touching the clock (engine loop).
  std::vector<FiredTransition> fire_day(Day day);

  const ExchangeSession& session(SessionId id) const;
  const Listing& listing(ListingId id) const;
  const std::map<SessionId, ExchangeSession>& sessions() const { return sessions_; }
  const std::map<ListingId, Listing>& listings() const { return listings_; }
  std::vector<SessionId> awaiting_docket() const;
  void mark_docketed(SessionId session);

  /// USD micro-units for `amount` of `token` at the configured rate.
  Amount usd_value(Amount amount, TokenKind token) const;

 private:
  ExchangeSession& mut(SessionId id);
  void move(ExchangeSession& s, ExchangeState to, std::string_view rule, std::string_view actor_label = {});
  void require_state(const ExchangeSession& s, std::initializer_list<ExchangeState> allowed,
                     std::string_view op) const;
  void require_party(const ExchangeSession& s, AccountId who, Party party) const;
  void require_participant(const ExchangeSession& s, AccountId who) const;
  void require_by(Day deadline, std::string_view what) const;

  void settle_success(ExchangeSession& s, std::string_view rule, OutcomeKind kind, std::optional<bool> satisfied);
  void finish_cancel(ExchangeSession& s, std::string_view rule, CancelCode code);
  void escalate(ExchangeSession& s, std::string_view rule, DisputeReason reason);
  /// Takes up to `amount` back from the seller (balance, then stake) for the
  /// buyer. Returns the shortfall.
  Amount claw_back(ExchangeSession& s, Amount amount);
  void grant(ExchangeSession& s);
  void close_listing(const ExchangeSession& s, ListingStatus status);

  bool fire_due(ExchangeSession& s, Day day, std::vector<FiredTransition>& fired);

  Ledger& ledger_;
  ReputationBook& reputation_;
  RewardEngine& rewards_;
  Trace& trace_;
  const EngineConfig& config_;
  Rng qr_rng_;
  std::map<ListingId, Listing> listings_;
  std::map<SessionId, ExchangeSession> sessions_;
  std::uint64_t next_listing_ = 1;
  std::uint64_t next_session_ = 1;
};

std::string qr_hex(const QrNonce& nonce);

}  // namespace market
