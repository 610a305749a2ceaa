#include "market/exchange.hpp"

#include <algorithm>
#include <array>

namespace market {
namespace {

using S = ExchangeState;

constexpr std::array<std::string_view, 3> kListingStatusNames{"active", "in-exchange", "closed"};
constexpr std::array<std::string_view, 6> kActorNames{"buyer", "seller", "either", "carrier", "engine",
                                                      "arbitration"};

std::vector<TransitionRule> build_table() {
  std::vector<TransitionRule> t;
  auto add = [&](std::initializer_list<S> from, S to, std::string_view rule, std::string_view step, Actor a) {
    for (S f : from) t.push_back({f, to, rule, step, a});
  };
  const auto pre_escrow = {S::PurchaseRequested, S::SellerValidated, S::TermsAgreed};
  const auto pre_dropoff = {S::EscrowFunded, S::QRIssued, S::AwaitingDropoff};

  add({S::Listed}, S::PurchaseRequested, "request_purchase", "2,3", Actor::buyer);
  add({S::PurchaseRequested}, S::SellerValidated, "validate_sale", "4", Actor::seller);
  add({S::SellerValidated}, S::TermsAgreed, "agree_terms", "5", Actor::either);
  add({S::TermsAgreed}, S::EscrowFunded, "fund_escrow", "6", Actor::buyer);
  add(pre_escrow, S::Cancelled, "cancel_c1", "C1", Actor::either);
  add(pre_escrow, S::Cancelled, "timeout_pre_escrow", "C1", Actor::engine);

  add({S::EscrowFunded}, S::QRIssued, "issue_qr", "7,8", Actor::seller);
  add({S::QRIssued}, S::AwaitingDropoff, "prepare_package", "9", Actor::seller);
  add(pre_dropoff, S::Cancelled, "cancel_c2", "C2", Actor::either);
  add(pre_dropoff, S::Cancelled, "timeout_dropoff", "7,8", Actor::engine);

  add({S::AwaitingDropoff}, S::InTransit, "dropoff_tracking", "9'", Actor::seller);
  add({S::AwaitingDropoff}, S::TrackingMissing, "dropoff_lost", "9'", Actor::seller);
  add({S::AwaitingDropoff}, S::TrackingMissing, "dropoff_silent", "9'", Actor::seller);
  add({S::TrackingMissing}, S::InTransit, "late_tracking", "10'", Actor::seller);
  add({S::TrackingMissing}, S::TrackingMissing, "late_loss_claim", "10'", Actor::seller);
  add({S::TrackingMissing}, S::Disputed, "timeout_tracking", "10'", Actor::engine);

  add({S::InTransit}, S::Delivered, "deliver", "-", Actor::carrier);
  add({S::Delivered}, S::AwaitingQR, "query_qr", "11", Actor::buyer);
  add({S::AwaitingQR}, S::Delivered, "answer_qr", "11'", Actor::seller);
  add({S::AwaitingQR}, S::Delivered, "timeout_qr", "11'", Actor::engine);
  add({S::Delivered, S::AwaitingQR, S::TrackingMissing}, S::AwaitingSatisfaction, "confirm_scan", "12",
      Actor::buyer);
  add({S::Delivered, S::AwaitingQR, S::TrackingMissing}, S::AwaitingSatisfaction, "confirm_manual", "10",
      Actor::buyer);
  add({S::InTransit, S::Delivered, S::AwaitingQR}, S::Settled, "timeout_confirm", "10", Actor::engine);

  add({S::AwaitingSatisfaction}, S::Settled, "satisfied", "14", Actor::buyer);
  add({S::AwaitingSatisfaction}, S::ResolutionWindow, "unsatisfied", "14", Actor::buyer);
  add({S::AwaitingSatisfaction}, S::Settled, "timeout_satisfaction", "13", Actor::engine);
  add({S::ResolutionWindow}, S::Settled, "resolve_mutually", "15", Actor::either);
  add({S::ResolutionWindow}, S::Disputed, "timeout_resolution", "15", Actor::engine);

  add({S::InTransit, S::TrackingMissing}, S::ReturnPending, "cancel_c3", "C3", Actor::buyer);
  add({S::Delivered, S::AwaitingQR, S::AwaitingSatisfaction, S::ResolutionWindow}, S::ReturnPending,
      "cancel_c4", "C4", Actor::buyer);
  add({S::Settled}, S::ReturnPending, "cancel_c5", "C5", Actor::buyer);
  add({S::ReturnPending}, S::Cancelled, "return_received", "return", Actor::seller);
  add({S::ReturnPending}, S::Disputed, "timeout_return", "return", Actor::engine);
  add({S::ReturnPending}, S::Disputed, "clawback_shortfall", "C5", Actor::engine);

  add({S::InTransit, S::TrackingMissing, S::Delivered, S::AwaitingQR, S::AwaitingSatisfaction,
       S::ResolutionWindow, S::Settled},
      S::Disputed, "claim", "claim", Actor::either);
  add({S::Disputed}, S::Settled, "ruling_for_seller", "ruling", Actor::arbitration);
  add({S::Disputed}, S::Cancelled, "ruling_for_buyer", "ruling", Actor::arbitration);
  return t;
}

std::string id_text(SessionId id) { return "session " + std::to_string(raw(id)); }

}  // namespace

std::string_view to_string(ListingStatus status) { return kListingStatusNames[static_cast<std::size_t>(status)]; }
std::string_view to_string(Actor actor) { return kActorNames[static_cast<std::size_t>(actor)]; }

const std::vector<TransitionRule>& transition_table() {
  static const std::vector<TransitionRule> table = build_table();
  return table;
}

const TransitionRule* find_transition(ExchangeState from, ExchangeState to, std::string_view rule) {
  for (const auto& r : transition_table()) {
    if (r.from == from && r.to == to && r.rule == rule) return &r;
  }
  return nullptr;
}

const std::vector<std::string>& all_step_labels() {
  static const std::vector<std::string> labels{"1",  "2,3", "4",  "5",   "6",   "7,8", "9",  "9'",
                                               "10", "10'", "11", "11'", "12",  "13",  "14", "15",
                                               "C1", "C2",  "C3", "C4",  "C5"};
  return labels;
}

std::string qr_hex(const QrNonce& nonce) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (auto b : nonce) {
    out += kHex[b >> 4];
    out += kHex[b & 15];
  }
  return out;
}

ExchangeBook::ExchangeBook(Ledger& ledger, ReputationBook& reputation, RewardEngine& rewards, Trace& trace,
                           const EngineConfig& config, std::uint64_t seed)
    : ledger_(ledger),
      reputation_(reputation),
      rewards_(rewards),
      trace_(trace),
      config_(config),
      qr_rng_(substream(seed, "qr-nonce")) {}

Amount ExchangeBook::usd_value(Amount amount, TokenKind token) const {
  Amount lzs = amount;
  if (token == TokenKind::LZDC) lzs = config_.ledger.lzs_per_lzdc.apply(amount);
  return config_.market.usd_per_lzs.apply(lzs);
}

ExchangeSession& ExchangeBook::mut(SessionId id) {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) fail(ErrorCode::UnknownSession, id_text(id));
  return it->second;
}

const ExchangeSession& ExchangeBook::session(SessionId id) const {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) fail(ErrorCode::UnknownSession, id_text(id));
  return it->second;
}

const Listing& ExchangeBook::listing(ListingId id) const {
  auto it = listings_.find(id);
  if (it == listings_.end()) fail(ErrorCode::ListingUnavailable, "listing " + std::to_string(raw(id)));
  return it->second;
}

void ExchangeBook::move(ExchangeSession& s, ExchangeState to, std::string_view rule, std::string_view actor_label) {
  const auto* edge = find_transition(s.state, to, rule);
  if (!edge) {
    fail(ErrorCode::InvariantViolation, std::string("no edge ") + std::string(to_string(s.state)) + " -> " +
                                            std::string(to_string(to)) + " via " + std::string(rule));
  }
  const auto from = s.state;
  s.state = to;
  trace_.emit("exchange", "transition",
              {{"session", raw(s.id)},
               {"from", to_string(from)},
               {"to", to_string(to)},
               {"rule", rule},
               {"step", edge->step},
               {"actor", actor_label.empty() ? to_string(edge->actor) : actor_label}});
}

void ExchangeBook::require_state(const ExchangeSession& s, std::initializer_list<ExchangeState> allowed,
                                 std::string_view op) const {
  if (std::find(allowed.begin(), allowed.end(), s.state) == allowed.end()) {
    fail(ErrorCode::WrongState,
         std::string(op) + " not allowed in " + std::string(to_string(s.state)) + " (" + id_text(s.id) + ")");
  }
}

void ExchangeBook::require_party(const ExchangeSession& s, AccountId who, Party party) const {
  const AccountId expected = party == Party::buyer ? s.buyer : s.seller;
  if (who != expected) {
    fail(ErrorCode::WrongParty, "only the " + std::string(to_string(party)) + " may do this (" + id_text(s.id) + ")");
  }
}

void ExchangeBook::require_participant(const ExchangeSession& s, AccountId who) const {
  if (who != s.buyer && who != s.seller) fail(ErrorCode::WrongParty, "not a party to " + id_text(s.id));
}

void ExchangeBook::require_by(Day deadline, std::string_view what) const {
  if (today() > deadline) {
    fail(ErrorCode::DeadlineExpired,
         std::string(what) + " deadline was day " + std::to_string(deadline) + ", today is " + std::to_string(today()));
  }
}

const Listing& ExchangeBook::list_item(AccountId seller, std::string description, Amount price, TokenKind token,
                                       std::string category) {
  if (!ledger_.exists(seller) || !ledger_.seller_active(seller)) {
    fail(ErrorCode::SellerNotActivated, "account " + std::to_string(raw(seller)) + " has no active stake");
  }
  if (token == TokenKind::LZSP) fail(ErrorCode::UnsupportedToken, "listings are priced in LZS or LZDC");
  if (price <= 0 || usd_value(price, token) < config_.market.listing_floor_usd) {
    fail(ErrorCode::BelowMinimumValue, "price below the USD listing floor");
  }
  const ListingId id{next_listing_++};
  auto& l = listings_[id];
  l = Listing{id, seller, std::move(description), price, token, std::move(category), ListingStatus::active};
  trace_.emit("exchange", "listed",
              {{"listing", raw(id)},
               {"seller", raw(seller)},
               {"price", price},
               {"token", to_string(token)},
               {"category", l.category},
               {"step", "1"}});
  return l;
}

SessionId ExchangeBook::request_purchase(AccountId buyer, ListingId listing_id) {
  auto it = listings_.find(listing_id);
  if (it == listings_.end() || it->second.status != ListingStatus::active) {
    fail(ErrorCode::ListingUnavailable, "listing " + std::to_string(raw(listing_id)));
  }
  auto& l = it->second;
  if (buyer == l.seller) fail(ErrorCode::SelfDealing);
  if (!ledger_.exists(buyer)) fail(ErrorCode::UnknownAccount, std::to_string(raw(buyer)));
  if (!ledger_.seller_active(l.seller)) fail(ErrorCode::ListingUnavailable, "seller stake no longer active");

  const SessionId id{next_session_++};
  auto& s = sessions_[id];
  s.id = id;
  s.listing = listing_id;
  s.buyer = buyer;
  s.seller = l.seller;
  s.price = l.price;
  s.token = l.token;
  s.opened = today();
  s.stage_day = today();
  l.status = ListingStatus::in_exchange;
  trace_.emit("exchange", "session_opened",
              {{"session", raw(id)},
               {"listing", raw(listing_id)},
               {"buyer", raw(buyer)},
               {"seller", raw(l.seller)},
               {"price", s.price},
               {"token", to_string(s.token)},
               {"value_usd", usd_value(s.price, s.token)}});
  move(s, S::PurchaseRequested, "request_purchase");
  return id;
}

void ExchangeBook::validate_sale(AccountId seller, SessionId id) {
  auto& s = mut(id);
  require_party(s, seller, Party::seller);
  if (s.state == S::PurchaseRequested) require_by(s.stage_day + config_.deadlines.pre_escrow, "validation");
  require_state(s, {S::PurchaseRequested}, "validate_sale");
  s.stage_day = today();
  move(s, S::SellerValidated, "validate_sale");
}

void ExchangeBook::agree_terms(AccountId party, SessionId id) {
  auto& s = mut(id);
  require_participant(s, party);
  if (s.state == S::SellerValidated) require_by(s.stage_day + config_.deadlines.pre_escrow, "terms");
  require_state(s, {S::SellerValidated}, "agree_terms");
  s.stage_day = today();
  move(s, S::TermsAgreed, "agree_terms");
}

void ExchangeBook::fund_escrow(AccountId buyer, SessionId id) {
  auto& s = mut(id);
  require_party(s, buyer, Party::buyer);
  if (s.state == S::TermsAgreed) require_by(s.stage_day + config_.deadlines.pre_escrow, "funding");
  require_state(s, {S::TermsAgreed}, "fund_escrow");
  ledger_.lock_escrow(s.id, s.buyer, s.price, s.token);
  s.anchors.T0 = today();
  move(s, S::EscrowFunded, "fund_escrow");
}

const QrNonce& ExchangeBook::issue_qr(AccountId seller, SessionId id) {
  auto& s = mut(id);
  require_party(s, seller, Party::seller);
  if (s.anchors.T0) require_by(*s.anchors.T0 + config_.deadlines.A, "dropoff");
  require_state(s, {S::EscrowFunded}, "issue_qr");
  s.qr = qr_rng_.bytes16();
  s.qr_issued = today();
  trace_.emit("exchange", "qr_issued", {{"session", raw(s.id)}, {"nonce", qr_hex(*s.qr)}});
  move(s, S::QRIssued, "issue_qr");
  return *s.qr;
}

void ExchangeBook::prepare_package(AccountId seller, SessionId id, bool qr_included) {
  auto& s = mut(id);
  require_party(s, seller, Party::seller);
  if (s.anchors.T0) require_by(*s.anchors.T0 + config_.deadlines.A, "dropoff");
  require_state(s, {S::QRIssued}, "prepare_package");
  s.qr_included = qr_included;
  trace_.emit("exchange", "package_prepared", {{"session", raw(s.id)}, {"qr_included", qr_included}});
  move(s, S::AwaitingDropoff, "prepare_package");
}

void ExchangeBook::confirm_dropoff(AccountId seller, SessionId id, bool qr_included, TrackingReport tracking,
                                   std::string tracking_number) {
  auto& s = mut(id);
  require_party(s, seller, Party::seller);
  if (s.anchors.T0) require_by(*s.anchors.T0 + config_.deadlines.A, "dropoff");
  require_state(s, {S::QRIssued, S::AwaitingDropoff}, "confirm_dropoff");
  if (s.state == S::QRIssued) prepare_package(seller, id, qr_included);
  s.anchors.T1 = today();
  s.dropoff_on_time = true;
  switch (tracking) {
    case TrackingReport::informed:
      s.tracking = TrackingStatus::informed;
      s.tracking_number = tracking_number;
      trace_.emit("exchange", "tracking", {{"session", raw(s.id)}, {"status", "informed"}, {"number", tracking_number}});
      move(s, S::InTransit, "dropoff_tracking");
      break;
    case TrackingReport::declared_lost:
      s.tracking = TrackingStatus::declared_lost;
      trace_.emit("exchange", "tracking", {{"session", raw(s.id)}, {"status", "declared-lost"}});
      move(s, S::TrackingMissing, "dropoff_lost");
      break;
    case TrackingReport::silent:
      move(s, S::TrackingMissing, "dropoff_silent");
      break;
  }
}

void ExchangeBook::report_tracking(AccountId seller, SessionId id, TrackingReport tracking,
                                   std::string tracking_number) {
  auto& s = mut(id);
  require_party(s, seller, Party::seller);
  if (s.anchors.T1) require_by(*s.anchors.T1 + config_.deadlines.B, "tracking");
  require_state(s, {S::TrackingMissing}, "report_tracking");
  switch (tracking) {
    case TrackingReport::informed:
      s.tracking = TrackingStatus::informed;
      s.tracking_number = tracking_number;
      trace_.emit("exchange", "tracking", {{"session", raw(s.id)}, {"status", "informed"}, {"number", tracking_number}});
      move(s, S::InTransit, "late_tracking");
      break;
    case TrackingReport::declared_lost:
      s.tracking = TrackingStatus::declared_lost;
      trace_.emit("exchange", "tracking", {{"session", raw(s.id)}, {"status", "declared-lost"}});
      move(s, S::TrackingMissing, "late_loss_claim");
      break;
    case TrackingReport::silent:
      fail(ErrorCode::WrongState, "silence is not a report");
  }
}

void ExchangeBook::mark_delivered(SessionId id) {
  auto& s = mut(id);
  require_state(s, {S::InTransit}, "mark_delivered");
  s.delivered = true;
  move(s, S::Delivered, "deliver");
}

void ExchangeBook::query_qr(AccountId buyer, SessionId id) {
  auto& s = mut(id);
  require_party(s, buyer, Party::buyer);
  if (s.anchors.T1) {
    // The seller's answer window must close before the buyer's confirmation window.
    const Day confirm_by = *s.anchors.T1 + config_.deadlines.B;
    if (today() + config_.deadlines.B_prime >= confirm_by) {
      fail(ErrorCode::DeadlineExpired, "too late to ask for the QR code (" + id_text(s.id) + ")");
    }
  }
  require_state(s, {S::Delivered}, "query_qr");
  s.anchors.T1_prime = today();
  move(s, S::AwaitingQR, "query_qr");
}

const QrNonce& ExchangeBook::answer_qr(AccountId seller, SessionId id) {
  auto& s = mut(id);
  require_party(s, seller, Party::seller);
  if (s.state == S::AwaitingQR) require_by(*s.anchors.T1_prime + config_.deadlines.B_prime, "QR answer");
  require_state(s, {S::AwaitingQR}, "answer_qr");
  trace_.emit("exchange", "qr_sent", {{"session", raw(s.id)}, {"by", "seller"}});
  move(s, S::Delivered, "answer_qr");
  return *s.qr;
}

void ExchangeBook::confirm_receipt(AccountId buyer, SessionId id, const Confirmation& how) {
  auto& s = mut(id);
  require_party(s, buyer, Party::buyer);
  if (s.anchors.T1) require_by(*s.anchors.T1 + config_.deadlines.B, "confirmation");
  require_state(s, {S::Delivered, S::AwaitingQR, S::TrackingMissing}, "confirm_receipt");
  if (how.via == Confirmation::Via::scan) {
    if (!s.qr || how.nonce != *s.qr) fail(ErrorCode::NonceMismatch, id_text(s.id));
    s.scanned_on_time = true;
  }
  s.buyer_confirmed = true;
  s.anchors.T2 = today();
  move(s, S::AwaitingSatisfaction, how.via == Confirmation::Via::scan ? "confirm_scan" : "confirm_manual");
}

void ExchangeBook::answer_satisfaction(AccountId buyer, SessionId id, bool satisfied) {
  auto& s = mut(id);
  require_party(s, buyer, Party::buyer);
  if (s.state == S::AwaitingSatisfaction) require_by(*s.anchors.T2 + config_.deadlines.C, "satisfaction");
  require_state(s, {S::AwaitingSatisfaction}, "answer_satisfaction");
  if (satisfied) {
    settle_success(s, "satisfied", OutcomeKind::success_confirmed, true);
  } else {
    s.anchors.T3 = today();
    move(s, S::ResolutionWindow, "unsatisfied");
  }
}

void ExchangeBook::resolve_mutually(AccountId party, SessionId id) {
  auto& s = mut(id);
  require_participant(s, party);
  if (s.state == S::ResolutionWindow) require_by(*s.anchors.T3 + config_.deadlines.D, "resolution");
  require_state(s, {S::ResolutionWindow}, "resolve_mutually");
  reputation_.penalize(Caller::exchange, s.seller, "mutual-resolution", config_.reputation.loss, s.buyer);
  settle_success(s, "resolve_mutually", OutcomeKind::resolved_mutually, false);
}

CancelCode ExchangeBook::cancel(AccountId party, SessionId id) {
  auto& s = mut(id);
  require_participant(s, party);
  switch (s.state) {
    case S::PurchaseRequested:
    case S::SellerValidated:
    case S::TermsAgreed:
      finish_cancel(s, "cancel_c1", CancelCode::C1);
      return CancelCode::C1;
    case S::EscrowFunded:
    case S::QRIssued:
    case S::AwaitingDropoff:
      ledger_.settle_escrow(Caller::exchange, s.id, Disposition::to_buyer(), s.seller);
      finish_cancel(s, "cancel_c2", CancelCode::C2);
      return CancelCode::C2;
    case S::InTransit:
    case S::TrackingMissing:
      require_party(s, party, Party::buyer);
      s.pending_cancel = CancelCode::C3;
      s.return_requested = today();
      move(s, S::ReturnPending, "cancel_c3");
      return CancelCode::C3;
    case S::Delivered:
    case S::AwaitingQR:
    case S::AwaitingSatisfaction:
    case S::ResolutionWindow:
      require_party(s, party, Party::buyer);
      if (today() > *s.anchors.T1 + config_.deadlines.E) {
        fail(ErrorCode::CancellationWindowClosed, "C4 window closed on day " +
                                                      std::to_string(*s.anchors.T1 + config_.deadlines.E));
      }
      s.pending_cancel = CancelCode::C4;
      s.return_requested = today();
      move(s, S::ReturnPending, "cancel_c4");
      return CancelCode::C4;
    case S::Settled:
      require_party(s, party, Party::buyer);
      if (!s.escrow_released || !s.anchors.T1 || (s.outcome && s.outcome->kind == OutcomeKind::arbitrated)) {
        fail(ErrorCode::CancellationWindowClosed, "no post-settlement return for " + id_text(s.id));
      }
      if (today() > *s.anchors.T1 + config_.deadlines.F) {
        fail(ErrorCode::CancellationWindowClosed, "C5 window closed on day " +
                                                      std::to_string(*s.anchors.T1 + config_.deadlines.F));
      }
      s.pending_cancel = CancelCode::C5;
      s.return_requested = today();
      move(s, S::ReturnPending, "cancel_c5");
      return CancelCode::C5;
    default:
      fail(ErrorCode::WrongState, "cancel not allowed in " + std::string(to_string(s.state)));
  }
}

void ExchangeBook::return_received(AccountId seller, SessionId id) {
  auto& s = mut(id);
  require_party(s, seller, Party::seller);
  if (s.state == S::ReturnPending) require_by(*s.return_requested + config_.deadlines.return_window, "return");
  require_state(s, {S::ReturnPending}, "return_received");
  s.return_received = true;
  const CancelCode code = *s.pending_cancel;
  if (!s.escrow_released) {
    ledger_.settle_escrow(Caller::exchange, s.id, Disposition::to_buyer(), s.seller);
    finish_cancel(s, "return_received", code);
    return;
  }
  const Amount shortfall = claw_back(s, s.price);
  if (shortfall > 0) {
    s.unrecovered = shortfall;
    escalate(s, "clawback_shortfall", DisputeReason::party_withdraws);
    return;
  }
  finish_cancel(s, "return_received", code);
}

Amount ExchangeBook::claw_back(ExchangeSession& s, Amount amount) {
  Amount owed = amount;
  auto take_balance = [&](TokenKind token) {
    if (owed <= 0) return;
    const Amount want = token == s.token ? owed : ledger_.quote(s.token, token, owed);
    const Amount have = ledger_.balance(s.seller, token);
    const Amount take = std::min(want, have);
    if (take <= 0) return;
    ledger_.transfer(s.seller, s.buyer, take, token, "clawback");
    owed -= token == s.token ? take : (take == want ? owed : ledger_.quote(token, s.token, take));
  };
  take_balance(s.token);
  take_balance(s.token == TokenKind::LZS ? TokenKind::LZDC : TokenKind::LZS);
  if (owed > 0) {
    const Amount want = s.token == TokenKind::LZS ? owed : ledger_.quote(s.token, TokenKind::LZS, owed);
    const Amount drawn = ledger_.draw_stake(Caller::exchange, s.seller, want, s.buyer);
    owed -= drawn == want ? owed : (s.token == TokenKind::LZS ? drawn : ledger_.quote(TokenKind::LZS, s.token, drawn));
  }
  owed = std::max<Amount>(owed, 0);
  trace_.emit("exchange", "clawback",
              {{"session", raw(s.id)}, {"requested", amount}, {"recovered", amount - owed}, {"shortfall", owed}});
  return owed;
}

bool ExchangeBook::claim_eligible(SessionId id) const {
  const auto& s = session(id);
  switch (s.state) {
    case S::InTransit:
    case S::TrackingMissing:
    case S::Delivered:
    case S::AwaitingQR:
    case S::AwaitingSatisfaction:
    case S::ResolutionWindow:
      return true;
    case S::Settled:
      return s.escrow_released && s.anchors.T1 && today() <= *s.anchors.T1 + config_.deadlines.F &&
             !(s.outcome && s.outcome->kind == OutcomeKind::arbitrated);
    default:
      return false;
  }
}

void ExchangeBook::begin_dispute(AccountId claimant, SessionId id, DisputeReason reason, bool opt_external,
                                 bool description_mismatch) {
  auto& s = mut(id);
  require_participant(s, claimant);
  if (!claim_eligible(id)) {
    fail(ErrorCode::NotClaimEligible, id_text(s.id) + " in " + std::string(to_string(s.state)));
  }
  if (s.state == S::Settled && claimant != s.buyer) {
    fail(ErrorCode::NotClaimEligible, "only the buyer may reopen a settled exchange");
  }
  s.description_mismatch = s.description_mismatch || description_mismatch;
  s.dispute = DisputeOrigin{claimant, reason, s.state, "claim", opt_external, false};
  move(s, S::Disputed, "claim", claimant == s.buyer ? "buyer" : "seller");
}

void ExchangeBook::escalate(ExchangeSession& s, std::string_view rule, DisputeReason reason) {
  s.dispute = DisputeOrigin{s.buyer, reason, s.state, std::string(rule), false, false};
  move(s, S::Disputed, rule);
}

std::vector<SessionId> ExchangeBook::awaiting_docket() const {
  std::vector<SessionId> out;
  for (const auto& [id, s] : sessions_) {
    if (s.state == S::Disputed && s.dispute && !s.dispute->docketed) out.push_back(id);
  }
  return out;
}

void ExchangeBook::mark_docketed(SessionId id) {
  auto& s = mut(id);
  if (s.dispute) s.dispute->docketed = true;
}

void ExchangeBook::apply_ruling(SessionId id, Party winner) {
  auto& s = mut(id);
  require_state(s, {S::Disputed}, "apply_ruling");
  Outcome outcome{OutcomeKind::arbitrated, std::nullopt, winner, std::nullopt};
  const auto* esc = ledger_.escrow(s.id);
  const bool locked = esc && esc->status == EscrowStatus::locked;
  if (winner == Party::seller) {
    if (locked) {
      ledger_.settle_escrow(Caller::arbitration, s.id, Disposition::to_seller(), s.seller);
      s.escrow_released = true;
    }
    s.outcome = outcome;
    move(s, S::Settled, "ruling_for_seller");
    close_listing(s, ListingStatus::closed);
    return;
  }
  if (locked) {
    ledger_.settle_escrow(Caller::arbitration, s.id, Disposition::to_buyer(), s.seller);
  } else if (s.escrow_released) {
    s.unrecovered = claw_back(s, s.unrecovered > 0 ? s.unrecovered : s.price);
  }
  s.outcome = outcome;
  move(s, S::Cancelled, "ruling_for_buyer");
  close_listing(s, ListingStatus::active);
}

void ExchangeBook::settle_success(ExchangeSession& s, std::string_view rule, OutcomeKind kind,
                                  std::optional<bool> satisfied) {
  ledger_.settle_escrow(Caller::exchange, s.id, Disposition::to_seller(), s.seller);
  s.escrow_released = true;
  s.outcome = Outcome{kind, std::nullopt, std::nullopt, satisfied};
  move(s, S::Settled, rule);
  close_listing(s, ListingStatus::closed);
  grant(s);
}

void ExchangeBook::finish_cancel(ExchangeSession& s, std::string_view rule, CancelCode code) {
  s.outcome = Outcome{OutcomeKind::cancelled, code, std::nullopt, std::nullopt};
  move(s, S::Cancelled, rule);
  close_listing(s, ListingStatus::active);
}

void ExchangeBook::grant(ExchangeSession& s) {
  if (rewards_.granted(s.id)) return;
  RewardClaim claim;
  claim.session = s.id;
  claim.buyer = s.buyer;
  claim.seller = s.seller;
  claim.outcome = *s.outcome;
  claim.buyer_confirmed = s.buyer_confirmed;
  claim.scanned_on_time = s.scanned_on_time;
  claim.qr_included = s.qr_included;
  claim.dropoff_on_time = s.dropoff_on_time;
  rewards_.grant_rewards(claim);
}

void ExchangeBook::close_listing(const ExchangeSession& s, ListingStatus status) {
  auto& l = listings_.at(s.listing);
  if (l.status == status) return;
  l.status = status;
  trace_.emit("exchange", "listing_status", {{"listing", raw(l.id)}, {"status", to_string(status)}});
}

bool ExchangeBook::fire_due(ExchangeSession& s, Day day, std::vector<FiredTransition>& fired) {
  const auto& d = config_.deadlines;
  const auto from = s.state;
  auto due = [&](std::optional<Day> anchor, Day window) { return anchor && day > *anchor + window; };
  std::string rule;
  switch (s.state) {
    case S::PurchaseRequested:
    case S::SellerValidated:
    case S::TermsAgreed:
      if (day > s.stage_day + d.pre_escrow) {
        rule = "timeout_pre_escrow";
        finish_cancel(s, rule, CancelCode::C1);
      }
      break;
    case S::EscrowFunded:
    case S::QRIssued:
    case S::AwaitingDropoff:
      if (due(s.anchors.T0, d.A)) {
        rule = "timeout_dropoff";
        ledger_.settle_escrow(Caller::exchange, s.id, Disposition::to_buyer(), s.seller);
        finish_cancel(s, rule, CancelCode::C2);
      }
      break;
    case S::AwaitingQR:
      if (due(s.anchors.T1_prime, d.B_prime)) {
        rule = "timeout_qr";
        reputation_.penalize(Caller::exchange, s.seller, "qr-not-answered", config_.reputation.loss, s.buyer);
        s.qr_supplied_by_engine = true;
        trace_.emit("exchange", "qr_sent", {{"session", raw(s.id)}, {"by", "engine"}});
        move(s, S::Delivered, rule);
        break;
      }
      [[fallthrough]];
    case S::InTransit:
    case S::Delivered:
      if (due(s.anchors.T1, d.B)) {
        rule = "timeout_confirm";
        settle_success(s, rule, OutcomeKind::success_by_default, std::nullopt);
      }
      break;
    case S::TrackingMissing:
      if (due(s.anchors.T1, d.B)) {
        rule = "timeout_tracking";
        escalate(s, rule, DisputeReason::no_news);
      }
      break;
    case S::AwaitingSatisfaction:
      if (due(s.anchors.T2, d.C)) {
        rule = "timeout_satisfaction";
        settle_success(s, rule, OutcomeKind::success_by_default, std::nullopt);
      }
      break;
    case S::ResolutionWindow:
      if (due(s.anchors.T3, d.D)) {
        rule = "timeout_resolution";
        escalate(s, rule, DisputeReason::defective);
      }
      break;
    case S::ReturnPending:
      if (due(s.return_requested, d.return_window)) {
        rule = "timeout_return";
        escalate(s, rule, DisputeReason::party_withdraws);
      }
      break;
    default:
      break;
  }
  if (rule.empty()) return false;
  fired.push_back({s.id, from, s.state, rule, day});
  return true;
}

std::vector<FiredTransition> ExchangeBook::tick(Day to_day) {
  if (to_day < today()) {
    fail(ErrorCode::ClockRegression, "tick to " + std::to_string(to_day) + " from " + std::to_string(today()));
  }
  std::vector<FiredTransition> fired;
  for (Day day = today() + 1; day <= to_day; ++day) {
    trace_.set_day(day);
    auto more = fire_day(day);
    fired.insert(fired.end(), more.begin(), more.end());
  }
  return fired;
}

std::vector<FiredTransition> ExchangeBook::fire_day(Day day) {
  std::vector<FiredTransition> fired;
  for (auto& [id, s] : sessions_) {
    // A session may cascade (QR timeout, then confirmation timeout).
    while (fire_due(s, day, fired)) {
    }
  }
  return fired;
}

}  // namespace market
