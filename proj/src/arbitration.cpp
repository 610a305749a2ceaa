#include "market/arbitration.hpp"

#include <algorithm>

#include "market/rng.hpp"

namespace market {
namespace {

std::string case_text(CaseId id) { return "case " + std::to_string(raw(id)); }

Party other(Party p) { return p == Party::buyer ? Party::seller : Party::buyer; }

std::optional<bool> opt_flag(const json& row, const char* key) {
  if (!row.contains(key) || row.at(key).is_null()) return std::nullopt;
  if (!row.at(key).is_boolean()) fail(ErrorCode::ValidationError, std::string("rule flag ") + key + " must be a boolean");
  return row.at(key).get<bool>();
}

}  // namespace

std::string_view to_string(Tier tier) { return tier == Tier::internal ? "internal" : "external"; }
std::string_view to_string(Ruling ruling) {
  return ruling == Ruling::for_claimant ? "for-claimant" : "for-respondent";
}
std::string_view to_string(Vote vote) { return vote == Vote::for_claimant ? "for-claimant" : "for-respondent"; }

std::string_view to_string(CaseStatus status) {
  switch (status) {
    case CaseStatus::filed:
      return "filed";
    case CaseStatus::evidence:
      return "evidence";
    case CaseStatus::voting:
      return "voting";
    case CaseStatus::appeal_window:
      return "appeal-window";
    case CaseStatus::closed:
      return "closed";
  }
  return "?";
}

Digest commitment(Vote vote, const Salt& salt, AccountId juror) {
  std::array<std::uint8_t, 1 + 16 + 8> buf{};
  buf[0] = static_cast<std::uint8_t>(vote);
  std::copy(salt.begin(), salt.end(), buf.begin() + 1);
  const std::uint64_t id = raw(juror);
  for (int i = 0; i < 8; ++i) buf[17 + i] = static_cast<std::uint8_t>(id >> (8 * (7 - i)));
  return sha256(buf);
}

std::int64_t jurors_for_round(std::int64_t base, int round) {
  std::int64_t n = base;
  for (int k = 0; k < round; ++k) n = 2 * n + 1;
  return n;
}

json EvidenceFlags::to_json() const {
  return {{"tracking_informed", tracking_informed},
          {"delivered_scan", delivered_scan},
          {"return_received", return_received},
          {"description_mismatch", description_mismatch}};
}

bool RuleRow::matches(const EvidenceFlags& f) const {
  auto ok = [](const std::optional<bool>& want, bool have) { return !want || *want == have; };
  return ok(tracking_informed, f.tracking_informed) && ok(delivered_scan, f.delivered_scan) &&
         ok(return_received, f.return_received) && ok(description_mismatch, f.description_mismatch);
}

const RuleTable& default_rule_table() {
  static const RuleTable table{
      // A returned package means the buyer gave the item back.
      {"return-received", std::nullopt, std::nullopt, true, std::nullopt, Party::buyer},
      {"attested-mismatch", std::nullopt, std::nullopt, false, true, Party::buyer},
      {"delivered-scan", std::nullopt, true, false, false, Party::seller},
      {"tracked", true, false, false, false, Party::seller},
      {"no-tracking-no-delivery", false, false, false, false, Party::buyer},
  };
  return table;
}

RuleTable rule_table_from_json(const json& j) {
  if (!j.is_array()) fail(ErrorCode::ValidationError, "rule table must be an array");
  RuleTable out;
  for (const auto& row : j) {
    if (!row.is_object()) fail(ErrorCode::ValidationError, "rule row must be an object");
    for (auto it = row.begin(); it != row.end(); ++it) {
      static const std::vector<std::string> known{"name", "tracking_informed", "delivered_scan",
                                                  "return_received", "description_mismatch", "winner"};
      if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
        fail(ErrorCode::ValidationError, "unknown rule field " + it.key());
      }
    }
    RuleRow r;
    r.name = row.value("name", std::string("row-") + std::to_string(out.size()));
    r.tracking_informed = opt_flag(row, "tracking_informed");
    r.delivered_scan = opt_flag(row, "delivered_scan");
    r.return_received = opt_flag(row, "return_received");
    r.description_mismatch = opt_flag(row, "description_mismatch");
    const auto w = row.value("winner", std::string());
    if (w == "buyer") r.winner = Party::buyer;
    else if (w == "seller") r.winner = Party::seller;
    else fail(ErrorCode::ValidationError, "rule winner must be buyer or seller");
    out.push_back(std::move(r));
  }
  return out;
}

json rule_table_to_json(const RuleTable& table) {
  json out = json::array();
  for (const auto& r : table) {
    json row = {{"name", r.name}, {"winner", to_string(r.winner)}};
    auto put = [&](const char* k, const std::optional<bool>& v) { row[k] = v ? json(*v) : json(nullptr); };
    put("tracking_informed", r.tracking_informed);
    put("delivered_scan", r.delivered_scan);
    put("return_received", r.return_received);
    put("description_mismatch", r.description_mismatch);
    out.push_back(std::move(row));
  }
  return out;
}

const RuleRow* evaluate_rules(const RuleTable& table, const EvidenceFlags& flags) {
  for (const auto& r : table) {
    if (r.matches(flags)) return &r;
  }
  return nullptr;
}

std::vector<AccountId> draw_jurors(const std::vector<Candidate>& pool, std::size_t n, std::uint64_t seed) {
  std::vector<Candidate> live;
  for (const auto& c : pool) {
    if (c.stake > 0) live.push_back(c);
  }
  std::sort(live.begin(), live.end(), [](const Candidate& a, const Candidate& b) { return a.id < b.id; });
  if (live.size() < n) {
    fail(ErrorCode::InsufficientJurors,
         std::to_string(live.size()) + " staked candidates for " + std::to_string(n) + " seats");
  }
  Amount total = 0;
  for (const auto& c : live) total += c.stake;
  Rng rng(seed);
  std::vector<AccountId> out;
  while (out.size() < n) {
    auto r = static_cast<Amount>(rng.below(static_cast<std::uint64_t>(total)));
    std::size_t i = 0;
    while (r >= live[i].stake) {
      r -= live[i].stake;
      ++i;
    }
    out.push_back(live[i].id);
    total -= live[i].stake;
    live.erase(live.begin() + static_cast<std::ptrdiff_t>(i));
  }
  return out;
}

Arbitration::Arbitration(ExchangeBook& exchange, Ledger& ledger, ReputationBook& reputation, Trace& trace,
                         const EngineConfig& config, std::uint64_t seed)
    : exchange_(exchange),
      ledger_(ledger),
      reputation_(reputation),
      trace_(trace),
      config_(config),
      seed_(seed),
      rules_(default_rule_table()) {
  fee_account_ = ledger_.create_account(AccountKind::system, "court-fees");
}

DisputeCase& Arbitration::mut(CaseId id) {
  auto it = cases_.find(id);
  if (it == cases_.end()) fail(ErrorCode::UnknownCase, case_text(id));
  return it->second;
}

const DisputeCase& Arbitration::dispute(CaseId id) const {
  auto it = cases_.find(id);
  if (it == cases_.end()) fail(ErrorCode::UnknownCase, case_text(id));
  return it->second;
}

std::optional<CaseId> Arbitration::case_for(SessionId session) const {
  auto it = by_session_.find(session);
  if (it == by_session_.end()) return std::nullopt;
  return it->second;
}

void Arbitration::join_pool(AccountId juror, Amount stake) {
  ledger_.bond(juror, TokenKind::LZS, stake, "court-stake");
  pool_[juror] += stake;
  trace_.emit("arbitration", "pool_join", {{"juror", raw(juror)}, {"stake", pool_[juror]}});
}

void Arbitration::leave_pool(AccountId juror) {
  auto it = pool_.find(juror);
  if (it == pool_.end()) fail(ErrorCode::NotAJuror, std::to_string(raw(juror)));
  if (it->second > 0) ledger_.unbond(juror, TokenKind::LZS, it->second, "court-stake");
  pool_.erase(it);
  trace_.emit("arbitration", "pool_leave", {{"juror", raw(juror)}});
}

std::vector<Candidate> Arbitration::pool_snapshot() const {
  std::vector<Candidate> out;
  for (const auto& [id, stake] : pool_) out.push_back({id, stake});
  return out;
}

CaseId Arbitration::file_claim(AccountId claimant, SessionId session, DisputeReason reason, bool opt_external,
                               bool description_mismatch) {
  exchange_.begin_dispute(claimant, session, reason, opt_external, description_mismatch);
  return open_case(session);
}

CaseId Arbitration::route_dispute(SessionId session) {
  const auto& s = exchange_.session(session);
  if (s.state != ExchangeState::Disputed || !s.dispute || s.dispute->docketed) {
    fail(ErrorCode::NotClaimEligible, "session " + std::to_string(raw(session)) + " has no undocketed dispute");
  }
  return open_case(session);
}

CaseId Arbitration::open_case(SessionId session) {
  const auto& s = exchange_.session(session);
  const auto& origin = *s.dispute;
  DisputeCase c;
  c.id = CaseId{next_case_++};
  c.session = session;
  c.claimant = origin.claimant;
  c.claimant_party = origin.claimant == s.buyer ? Party::buyer : Party::seller;
  c.respondent = c.claimant_party == Party::buyer ? s.seller : s.buyer;
  c.value_usd = exchange_.usd_value(s.price, s.token);
  c.reason = origin.reason;
  c.filed = today();

  const bool under = c.value_usd <= config_.market.dispute_threshold_usd;
  if (s.tracking == TrackingStatus::declared_lost) {
    c.tier = Tier::internal;
    c.route_basis = "declared-lost";
  } else if (under && !origin.opt_external) {
    c.tier = Tier::internal;
    c.route_basis = "at-or-below-threshold";
  } else if (under) {
    c.tier = Tier::external;
    c.route_basis = "claimant-chose-external";
  } else {
    c.tier = Tier::external;
    c.route_basis = "above-threshold";
  }
  (c.tier == Tier::internal ? stats_.internal_cases : stats_.external_cases)++;
  exchange_.mark_docketed(session);
  trace_.emit("arbitration", "case_opened",
              {{"case", raw(c.id)},
               {"session", raw(session)},
               {"claimant", raw(c.claimant)},
               {"respondent", raw(c.respondent)},
               {"claimant_party", to_string(c.claimant_party)},
               {"value_usd", c.value_usd},
               {"tier", to_string(c.tier)},
               {"route_basis", c.route_basis},
               {"reason", to_string(c.reason)},
               {"origin", origin.rule}});
  const CaseId id = c.id;
  by_session_[session] = id;
  cases_.emplace(id, std::move(c));
  return id;
}

EvidenceFlags Arbitration::evidence_flags(const DisputeCase& c) const {
  const auto& s = exchange_.session(c.session);
  EvidenceFlags f;
  f.tracking_informed = s.tracking == TrackingStatus::informed;
  f.delivered_scan = s.delivered || s.buyer_confirmed;
  f.return_received = s.return_received;
  f.description_mismatch = s.description_mismatch;
  return f;
}

Party Arbitration::party_of(const DisputeCase& c, Ruling r) const {
  return r == Ruling::for_claimant ? c.claimant_party : other(c.claimant_party);
}

Ruling Arbitration::resolve_internal(CaseId id, std::optional<EvidenceFlags> flags) {
  auto& c = mut(id);
  if (c.tier != Tier::internal) fail(ErrorCode::WrongTier, case_text(id) + " is external");
  if (c.status == CaseStatus::closed) fail(ErrorCode::WrongState, case_text(id) + " is closed");
  c.flags = flags ? *flags : evidence_flags(c);
  const auto* row = evaluate_rules(rules_, *c.flags);
  const Party winner = row ? row->winner : Party::buyer;
  c.rule_applied = row ? row->name : "no-match";
  const Ruling ruling = winner == c.claimant_party ? Ruling::for_claimant : Ruling::for_respondent;
  trace_.emit("arbitration", "internal_ruling",
              {{"case", raw(id)}, {"flags", c.flags->to_json()}, {"rule", *c.rule_applied},
               {"ruling", to_string(ruling)}, {"winner", to_string(winner)}});
  finalize(c, ruling, "internal");
  return ruling;
}

void Arbitration::open_external_case(CaseId id, Amount fee_offered) {
  auto& c = mut(id);
  if (c.tier != Tier::external) fail(ErrorCode::WrongTier, case_text(id) + " is internal");
  if (c.status != CaseStatus::filed) fail(ErrorCode::WrongState, case_text(id) + " already opened");
  const Amount fee = config_.arbitration.base_jurors * config_.arbitration.fee_per_juror;
  if (fee_offered < fee || ledger_.balance(c.claimant, TokenKind::LZS) < fee) {
    fail(ErrorCode::InsufficientFee, "claimant fee is " + std::to_string(fee));
  }
  ledger_.transfer(c.claimant, fee_account_, fee, TokenKind::LZS, "court-fee");
  c.fees_paid[c.claimant] += fee;
  c.status = CaseStatus::evidence;
  c.evidence_deadline = today() + config_.arbitration.evidence_days;
  trace_.emit("arbitration", "external_opened",
              {{"case", raw(id)}, {"fee", fee}, {"evidence_deadline", c.evidence_deadline}});
}

void Arbitration::submit_evidence(CaseId id, AccountId submitter, std::string content_hash) {
  auto& c = mut(id);
  if (submitter != c.claimant && submitter != c.respondent) {
    fail(ErrorCode::WrongParty, "not a party to " + case_text(id));
  }
  if (c.status != CaseStatus::evidence || today() > c.evidence_deadline) {
    trace_.emit("arbitration", "evidence_rejected",
                {{"case", raw(id)}, {"submitter", raw(submitter)}, {"hash", content_hash}});
    fail(ErrorCode::DeadlineExpired, "evidence period closed for " + case_text(id));
  }
  c.evidence.push_back({submitter, content_hash, today()});
  trace_.emit("arbitration", "evidence", {{"case", raw(id)}, {"submitter", raw(submitter)}, {"hash", content_hash}});
}

void Arbitration::draw_round(DisputeCase& c) {
  const int k = static_cast<int>(c.rounds.size());
  CourtRound r;
  r.index = k;
  r.jurors_needed = jurors_for_round(config_.arbitration.base_jurors, k);
  if (k == 0) {
    // The opening fee funds the first panel.
    for (const auto& [payer, amount] : c.fees_paid) r.fee_pool += amount;
  }
  auto pool = pool_snapshot();
  std::erase_if(pool, [&](const Candidate& cand) { return cand.id == c.claimant || cand.id == c.respondent; });
  const auto seed = derive_seed(seed_, "juror-draw:" + std::to_string(raw(c.id)) + ":" + std::to_string(k));
  r.jurors = draw_jurors(pool, static_cast<std::size_t>(r.jurors_needed), seed);
  for (auto j : r.jurors) {
    r.drawn_stake[j] = pool_.at(j);
    r.ballots[j] = Ballot{};
  }
  r.opened = today();
  r.commit_deadline = today() + config_.arbitration.commit_days;
  r.reveal_deadline = r.commit_deadline + config_.arbitration.reveal_days;
  r.appeal_deadline = r.reveal_deadline + config_.arbitration.appeal_days;
  json jurors = json::array();
  for (auto j : r.jurors) jurors.push_back(raw(j));
  trace_.emit("arbitration", "round_opened",
              {{"case", raw(c.id)},
               {"round", k},
               {"jurors_needed", r.jurors_needed},
               {"jurors", jurors},
               {"commit_deadline", r.commit_deadline},
               {"reveal_deadline", r.reveal_deadline}});
  c.rounds.push_back(std::move(r));
  c.status = CaseStatus::voting;
}

void Arbitration::commit_vote(CaseId id, AccountId juror, const Digest& hash) {
  auto& c = mut(id);
  if (c.rounds.empty()) fail(ErrorCode::NotAJuror, "no round drawn for " + case_text(id));
  auto& r = c.rounds.back();
  auto it = r.ballots.find(juror);
  if (it == r.ballots.end()) fail(ErrorCode::NotAJuror, std::to_string(raw(juror)));
  if (c.status != CaseStatus::voting || today() > r.commit_deadline) {
    fail(ErrorCode::DeadlineExpired, "commit period closed for " + case_text(id));
  }
  if (it->second.commitment) fail(ErrorCode::AlreadyVotedInRound, std::to_string(raw(juror)));
  it->second.commitment = hash;
  trace_.emit("arbitration", "commit",
              {{"case", raw(id)}, {"round", r.index}, {"juror", raw(juror)}, {"hash", to_hex(hash)}});
}

void Arbitration::reveal_vote(CaseId id, AccountId juror, Vote vote, const Salt& salt) {
  auto& c = mut(id);
  if (c.rounds.empty()) fail(ErrorCode::NotAJuror, "no round drawn for " + case_text(id));
  auto& r = c.rounds.back();
  auto it = r.ballots.find(juror);
  if (it == r.ballots.end()) fail(ErrorCode::NotAJuror, std::to_string(raw(juror)));
  if (c.status != CaseStatus::voting || today() > r.reveal_deadline) {
    fail(ErrorCode::DeadlineExpired, "reveal period closed for " + case_text(id));
  }
  auto& b = it->second;
  if (b.vote) fail(ErrorCode::AlreadyVotedInRound, std::to_string(raw(juror)));
  if (!b.commitment || commitment(vote, salt, juror) != *b.commitment) {
    fail(ErrorCode::CommitmentMismatch, "juror " + std::to_string(raw(juror)));
  }
  b.vote = vote;
  trace_.emit("arbitration", "reveal",
              {{"case", raw(id)}, {"round", r.index}, {"juror", raw(juror)}, {"vote", to_string(vote)},
               {"salt", to_hex(salt)}});
}

Ruling Arbitration::tally_and_rule(CaseId id) {
  auto& c = mut(id);
  if (c.status != CaseStatus::voting || c.rounds.empty()) {
    fail(ErrorCode::RoundNotClosed, case_text(id) + " has no open round");
  }
  auto& r = c.rounds.back();
  if (today() <= r.reveal_deadline) {
    fail(ErrorCode::RoundNotClosed, "reveal period ends on day " + std::to_string(r.reveal_deadline));
  }
  for (auto j : r.jurors) {
    auto& b = r.ballots.at(j);
    if (b.vote) {
      (*b.vote == Vote::for_claimant ? r.votes_claimant : r.votes_respondent)++;
      continue;
    }
    b.absent = true;
    const Amount stake = pool_.contains(j) ? pool_.at(j) : 0;
    const Amount penalty = static_cast<Amount>(static_cast<__int128>(stake) *
                                               config_.arbitration.non_reveal_bps / 10000);
    Amount taken = 0;
    if (penalty > 0) {
      taken = ledger_.slash_bond(Caller::arbitration, j, TokenKind::LZS, penalty, fee_account_);
      pool_[j] -= taken;
      r.fee_pool += taken;
    }
    trace_.emit("arbitration", "absent", {{"case", raw(id)}, {"round", r.index}, {"juror", raw(j)}, {"slashed", taken}});
  }
  // Ties keep the status quo.
  r.result = r.votes_claimant > r.votes_respondent ? Ruling::for_claimant : Ruling::for_respondent;
  c.status = CaseStatus::appeal_window;
  r.appeal_deadline = today() - 1 + config_.arbitration.appeal_days;
  trace_.emit("arbitration", "tally",
              {{"case", raw(id)},
               {"round", r.index},
               {"for_claimant", r.votes_claimant},
               {"for_respondent", r.votes_respondent},
               {"ruling", to_string(*r.result)},
               {"appeal_deadline", r.appeal_deadline}});
  return *r.result;
}

void Arbitration::appeal(CaseId id, AccountId appellant, Amount fee_offered) {
  auto& c = mut(id);
  if (appellant != c.claimant && appellant != c.respondent) {
    fail(ErrorCode::WrongParty, "not a party to " + case_text(id));
  }
  if (c.status == CaseStatus::voting || c.status == CaseStatus::evidence || c.status == CaseStatus::filed) {
    fail(ErrorCode::RoundNotClosed, case_text(id));
  }
  if (c.status != CaseStatus::appeal_window || today() > c.rounds.back().appeal_deadline) {
    fail(ErrorCode::AppealWindowClosed, case_text(id));
  }
  const Party loser = other(party_of(c, *c.rounds.back().result));
  const AccountId loser_id = loser == c.claimant_party ? c.claimant : c.respondent;
  if (appellant != loser_id) fail(ErrorCode::WrongParty, "only the losing party may appeal");

  const int next = static_cast<int>(c.rounds.size());
  const Amount fee = jurors_for_round(config_.arbitration.base_jurors, next) * config_.arbitration.fee_per_juror;
  if (fee_offered < fee || ledger_.balance(appellant, TokenKind::LZS) < fee) {
    fail(ErrorCode::InsufficientFee, "appeal fee is " + std::to_string(fee));
  }
  std::size_t eligible = 0;
  for (const auto& [j, stake] : pool_) {
    if (stake > 0 && j != c.claimant && j != c.respondent) ++eligible;
  }
  if (eligible < static_cast<std::size_t>(jurors_for_round(config_.arbitration.base_jurors, next))) {
    fail(ErrorCode::InsufficientJurors, "pool too small for round " + std::to_string(next));
  }
  ledger_.transfer(appellant, fee_account_, fee, TokenKind::LZS, "appeal-fee");
  c.fees_paid[appellant] += fee;
  ++stats_.appeals;
  trace_.emit("arbitration", "appeal", {{"case", raw(id)}, {"appellant", raw(appellant)}, {"fee", fee}, {"round", next}});
  draw_round(c);
  c.rounds.back().fee_pool += fee;
}

void Arbitration::refund_fees(DisputeCase& c) {
  for (auto& [payer, amount] : c.fees_paid) {
    if (amount > 0) ledger_.transfer(fee_account_, payer, amount, TokenKind::LZS, "court-fee-refund");
  }
  c.fees_paid.clear();
}

void Arbitration::pay_jurors(DisputeCase& c) {
  const Vote coherent = *c.ruling == Ruling::for_claimant ? Vote::for_claimant : Vote::for_respondent;
  Amount carried = 0;
  for (std::size_t k = 0; k < c.rounds.size(); ++k) {
    auto& r = c.rounds[k];
    std::vector<AccountId> winners;
    for (auto j : r.jurors) {  // ascending order below
      const auto& b = r.ballots.at(j);
      if (b.vote && *b.vote == coherent) winners.push_back(j);
    }
    std::sort(winners.begin(), winners.end());
    Amount pot = r.fee_pool + (k + 1 == c.rounds.size() ? carried : 0);
    if (winners.empty()) {
      if (k + 1 < c.rounds.size()) carried += r.fee_pool;
      else if (pot > 0) trace_.emit("arbitration", "fees_unclaimed", {{"case", raw(c.id)}, {"amount", pot}});
      continue;
    }
    const Amount share = pot / static_cast<Amount>(winners.size());
    Amount rest = pot - share * static_cast<Amount>(winners.size());
    json paid = json::array();
    for (auto j : winners) {
      Amount amount = share + (rest > 0 ? 1 : 0);
      if (rest > 0) --rest;
      if (amount > 0) ledger_.transfer(fee_account_, j, amount, TokenKind::LZS, "juror-reward");
      paid.push_back({{"juror", raw(j)}, {"amount", amount}});
    }
    trace_.emit("arbitration", "jurors_paid", {{"case", raw(c.id)}, {"round", r.index}, {"pool", pot}, {"paid", paid}});
  }
}

void Arbitration::finalize(DisputeCase& c, Ruling ruling, std::string_view closed_by) {
  c.ruling = ruling;
  c.winner = party_of(c, ruling);
  c.status = CaseStatus::closed;
  c.closed_by = closed_by;
  const auto& s = exchange_.session(c.session);
  const AccountId winner_id = *c.winner == Party::buyer ? s.buyer : s.seller;
  const AccountId loser_id = *c.winner == Party::buyer ? s.seller : s.buyer;

  if (c.tier == Tier::external && !c.rounds.empty()) {
    // The winner's fees come back from the loser; the pool goes to coherent jurors.
    const Amount paid = c.fees_paid.contains(winner_id) ? c.fees_paid.at(winner_id) : 0;
    const Amount refund = std::min(paid, ledger_.balance(loser_id, TokenKind::LZS));
    if (refund > 0) ledger_.transfer(loser_id, winner_id, refund, TokenKind::LZS, "court-fee-refund");
    if (paid > 0) {
      trace_.emit("arbitration", "fee_refund",
                  {{"case", raw(c.id)}, {"to", raw(winner_id)}, {"owed", paid}, {"refunded", refund}});
    }
    pay_jurors(c);
  }

  exchange_.apply_ruling(c.session, *c.winner);
  reputation_.penalize(Caller::arbitration, loser_id, "lost-dispute", config_.reputation.loss, winner_id);
  if (*c.winner == Party::buyer) {
    std::optional<AccountId> beneficiary;
    if (c.claimant_party == Party::buyer) beneficiary = s.buyer;
    ledger_.slash_stake(Caller::arbitration, s.seller, beneficiary);
  }
  trace_.emit("arbitration", "ruling_executed",
              {{"case", raw(c.id)},
               {"session", raw(c.session)},
               {"tier", to_string(c.tier)},
               {"ruling", to_string(ruling)},
               {"winner", to_string(*c.winner)},
               {"rounds", c.rounds.size()},
               {"closed_by", closed_by}});
}

void Arbitration::fire_day(Day day) {
  for (auto sid : exchange_.awaiting_docket()) route_dispute(sid);
  for (auto& [id, c] : cases_) {
    switch (c.status) {
      case CaseStatus::filed:
        if (day <= c.filed) break;
        if (c.tier == Tier::internal) {
          resolve_internal(id);
        } else if (day > c.filed + config_.arbitration.evidence_days) {
          trace_.emit("arbitration", "fee_unpaid", {{"case", raw(id)}});
          finalize(c, Ruling::for_respondent, "fee-unpaid");
        }
        break;
      case CaseStatus::evidence:
        if (day <= c.evidence_deadline) break;
        try {
          draw_round(c);
        } catch (const ProtocolError& e) {
          if (e.code() != ErrorCode::InsufficientJurors) throw;
          ++stats_.fallbacks;
          refund_fees(c);
          c.tier = Tier::internal;
          c.route_basis += "+insufficient-jurors";
          trace_.emit("arbitration", "fallback_internal", {{"case", raw(id)}, {"detail", e.what()}});
          resolve_internal(id);
        }
        break;
      case CaseStatus::voting:
        if (day > c.rounds.back().reveal_deadline) tally_and_rule(id);
        break;
      case CaseStatus::appeal_window:
        if (day > c.rounds.back().appeal_deadline) finalize(c, *c.rounds.back().result, "court");
        break;
      case CaseStatus::closed:
        break;
    }
  }
}

json Arbitration::transcript(CaseId id) const {
  const auto& c = dispute(id);
  json rounds = json::array();
  for (const auto& r : c.rounds) {
    json ballots = json::array();
    for (auto j : r.jurors) {
      const auto& b = r.ballots.at(j);
      ballots.push_back({{"juror", raw(j)},
                         {"stake", r.drawn_stake.at(j)},
                         {"commitment", b.commitment ? json(to_hex(*b.commitment)) : json(nullptr)},
                         {"vote", b.vote ? json(to_string(*b.vote)) : json(nullptr)},
                         {"absent", b.absent}});
    }
    rounds.push_back({{"round", r.index},
                      {"jurors_needed", r.jurors_needed},
                      {"ballots", ballots},
                      {"fee_pool", r.fee_pool},
                      {"commit_deadline", r.commit_deadline},
                      {"reveal_deadline", r.reveal_deadline},
                      {"result", r.result ? json(to_string(*r.result)) : json(nullptr)}});
  }
  json evidence = json::array();
  for (const auto& e : c.evidence) {
    evidence.push_back({{"submitter", raw(e.submitter)}, {"hash", e.content_hash}, {"day", e.day}});
  }
  return {{"case", raw(c.id)},
          {"session", raw(c.session)},
          {"claimant", raw(c.claimant)},
          {"respondent", raw(c.respondent)},
          {"tier", to_string(c.tier)},
          {"route_basis", c.route_basis},
          {"value_usd", c.value_usd},
          {"reason", to_string(c.reason)},
          {"status", to_string(c.status)},
          {"evidence", evidence},
          {"rounds", rounds},
          {"flags", c.flags ? c.flags->to_json() : json(nullptr)},
          {"rule", c.rule_applied ? json(*c.rule_applied) : json(nullptr)},
          {"ruling", c.ruling ? json(to_string(*c.ruling)) : json(nullptr)},
          {"winner", c.winner ? json(to_string(*c.winner)) : json(nullptr)}};
}

}  // namespace market
