#include "market/governance.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>

namespace market {
namespace {

constexpr std::string_view kSetSig = "set(int64)";
constexpr std::string_view kAddSig = "add(string)";
constexpr std::string_view kRemoveSig = "remove(string)";

std::string pid_text(ProposalId id) { return "proposal " + std::to_string(raw(id)); }

bool decode_hex(const std::string& hex, std::vector<std::uint8_t>& out) {
  if (hex.size() % 2 != 0) return false;
  out.resize(hex.size() / 2);
  return from_hex(hex, out);
}

}  // namespace

std::string_view to_string(Layer layer) {
  switch (layer) {
    case Layer::basic:
      return "basic";
    case Layer::member:
      return "member";
    case Layer::delegate:
      return "delegate";
  }
  return "?";
}

std::string_view to_string(ProposalLevel level) { return level == ProposalLevel::high ? "high" : "low-medium"; }

std::optional<ProposalLevel> parse_level(std::string_view text) {
  if (text == "high") return ProposalLevel::high;
  if (text == "low-medium" || text == "low" || text == "medium") return ProposalLevel::low_medium;
  return std::nullopt;
}

std::string_view to_string(ProposalState state) {
  static constexpr std::array<std::string_view, 8> names{"created",  "active",   "approved", "vetoed",
                                                         "queued",   "executed", "rejected", "failed"};
  return names[static_cast<std::size_t>(state)];
}

std::string_view to_string(DecisionKind kind) {
  switch (kind) {
    case DecisionKind::ratify:
      return "ratify";
    case DecisionKind::veto:
      return "veto";
    case DecisionKind::miscategorized:
      return "miscategorized";
  }
  return "?";
}

std::string encode_int64(std::int64_t value) {
  std::array<std::uint8_t, 8> b{};
  const auto u = static_cast<std::uint64_t>(value);
  for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(u >> (8 * (7 - i)));
  return to_hex(b);
}

std::string encode_text(std::string_view text) {
  return to_hex(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

ProposalPayload ProposalPayload::from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::MalformedPayload, "payload must be an object");
  ProposalPayload p;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto& k = it.key();
      if (k == "targets") p.targets = it->get<std::vector<std::string>>();
      else if (k == "values") p.values = it->get<std::vector<std::int64_t>>();
      else if (k == "signatures") p.signatures = it->get<std::vector<std::string>>();
      else if (k == "calldata") p.calldata = it->get<std::vector<std::string>>();
      else if (k == "description") p.description = it->get<std::string>();
      else fail(ErrorCode::MalformedPayload, "unknown payload field " + k);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedPayload, e.what());
  }
  return p;
}

json ProposalPayload::to_json() const {
  return {{"targets", targets},
          {"values", values},
          {"signatures", signatures},
          {"calldata", calldata},
          {"description", description}};
}

ProposalPayload ProposalPayload::set_key(const std::string& key, std::int64_t value, std::string description) {
  return {{key}, {0}, {std::string(kSetSig)}, {encode_int64(value)}, std::move(description)};
}

ProposalPayload ProposalPayload::category(bool add, const std::string& name, std::string description) {
  return {{"categories"}, {0}, {std::string(add ? kAddSig : kRemoveSig)}, {encode_text(name)}, std::move(description)};
}

std::vector<std::string> payload_problems(const ProposalPayload& p) {
  std::vector<std::string> out;
  const auto n = p.targets.size();
  if (n == 0) out.push_back("no targets");
  if (p.values.size() != n || p.signatures.size() != n || p.calldata.size() != n) {
    out.push_back("targets, values, signatures and calldata must have equal length");
    return out;
  }
  if (p.description.empty()) out.push_back("description is empty");
  for (std::size_t i = 0; i < n; ++i) {
    const auto at = " (call " + std::to_string(i) + ")";
    if (p.values[i] != 0) out.push_back("value must be 0" + at);
    std::vector<std::uint8_t> bytes;
    if (!decode_hex(p.calldata[i], bytes)) {
      out.push_back("calldata is not hex" + at);
      continue;
    }
    if (p.targets[i] == "categories") {
      if (p.signatures[i] != kAddSig && p.signatures[i] != kRemoveSig) out.push_back("bad signature" + at);
      if (bytes.empty()) out.push_back("empty category" + at);
    } else if (find_config_key(p.targets[i])) {
      if (p.signatures[i] != kSetSig) out.push_back("bad signature" + at);
      if (bytes.size() != 8) out.push_back("set(int64) takes 8 bytes" + at);
    } else {
      out.push_back("unknown target " + p.targets[i]);
    }
  }
  return out;
}

EngineConfig apply_payload(const EngineConfig& config, const ProposalPayload& p, std::vector<std::string>& errors) {
  EngineConfig next = config;
  auto problems = payload_problems(p);
  if (!problems.empty()) {
    errors.insert(errors.end(), problems.begin(), problems.end());
    return next;
  }
  for (std::size_t i = 0; i < p.targets.size(); ++i) {
    std::vector<std::uint8_t> bytes;
    decode_hex(p.calldata[i], bytes);
    if (p.targets[i] == "categories") {
      const std::string name(bytes.begin(), bytes.end());
      auto& cats = next.categories;
      auto it = std::find(cats.begin(), cats.end(), name);
      if (p.signatures[i] == kAddSig) {
        if (it != cats.end()) errors.push_back("category already present: " + name);
        else cats.push_back(name);
      } else {
        if (it == cats.end()) errors.push_back("no such category: " + name);
        else cats.erase(it);
      }
      continue;
    }
    std::uint64_t u = 0;
    for (auto b : bytes) u = (u << 8) | b;
    find_config_key(p.targets[i])->ref(next) = static_cast<std::int64_t>(u);
  }
  auto v = next.violations();
  errors.insert(errors.end(), v.begin(), v.end());
  return next;
}

bool committee_approves(std::size_t cast, std::size_t yes, bool strict) {
  if (cast < kCommitteeQuorum) return false;
  return strict ? 2 * yes > cast : 2 * yes >= cast;
}

Governance::Governance(Ledger& ledger, ReputationBook& reputation, Trace& trace, EngineConfig& config)
    : ledger_(ledger), reputation_(reputation), trace_(trace), config_(config) {}

Proposal& Governance::mut(ProposalId id) {
  auto it = proposals_.find(id);
  if (it == proposals_.end()) fail(ErrorCode::UnknownProposal, pid_text(id));
  return it->second;
}

const Proposal& Governance::proposal(ProposalId id) const {
  auto it = proposals_.find(id);
  if (it == proposals_.end()) fail(ErrorCode::UnknownProposal, pid_text(id));
  return it->second;
}

void Governance::found_member(AccountId account) {
  ledger_.account(account);
  auto& m = members_[account];
  m.accepted_proposal = true;
  m.founding = true;
  trace_.emit("governance", "founding_member", {{"account", raw(account)}});
  refresh_membership();
}

void Governance::set_committee(const std::vector<AccountId>& members) {
  std::set<AccountId> distinct(members.begin(), members.end());
  if (members.size() != kCommitteeSize || distinct.size() != kCommitteeSize) {
    fail(ErrorCode::ValidationError, "the committee has exactly five distinct members");
  }
  for (auto m : members) ledger_.account(m);
  committee_ = members;
  committee_term_start_ = today();
  json ids = json::array();
  for (auto m : members) ids.push_back(raw(m));
  trace_.emit("governance", "committee",
              {{"members", ids}, {"term_start", committee_term_start_}, {"term_days", kCommitteeTermDays}});
}

Amount Governance::holdings(AccountId account) const {
  const auto& rec = ledger_.account(account);
  return rec.balance(TokenKind::LZSP) + rec.bond(TokenKind::LZSP);
}

Amount Governance::received(AccountId account) const {
  Amount total = 0;
  for (const auto& [from, d] : delegations_) {
    if (d.active && d.delegatee == account) total += d.amount;
  }
  return total;
}

Amount Governance::vote_weight(AccountId account) const {
  // Bonded LZSP belongs to the delegatee's weight, not the delegator's.
  const Amount own = ledger_.account(account).balance(TokenKind::LZSP);
  return std::min(own + received(account), config_.governance.vote_cap);
}

Amount Governance::quorum_weight() const {
  const Amount circulating = ledger_.supply(TokenKind::LZSP);
  return static_cast<Amount>(static_cast<__int128>(circulating) * config_.governance.quorum_bps / 10000);
}

Layer Governance::layer(AccountId account) const {
  auto it = members_.find(account);
  return it == members_.end() ? Layer::basic : it->second.layer;
}

bool Governance::blacklisted(AccountId account) const {
  auto it = members_.find(account);
  if (it == members_.end() || !it->second.blacklisted_until) return false;
  return today() <= *it->second.blacklisted_until;
}

bool Governance::eligible(AccountId account, const MemberInfo& info) const {
  const std::int64_t rep = reputation_.has(account) ? reputation_.score(account) : 0;
  return info.accepted_proposal && holdings(account) >= config_.governance.member_lzsp &&
         rep >= config_.governance.member_reputation;
}

void Governance::refresh_membership() {
  // Demote first, so a delegation to a demoted delegatee is released.
  for (auto& [id, info] : members_) {
    if (info.layer == Layer::basic || eligible(id, info)) continue;
    const auto was = info.layer;
    info.layer = Layer::basic;
    trace_.emit("governance", "layer", {{"account", raw(id)}, {"from", to_string(was)}, {"to", "basic"}});
  }
  for (auto& [from, d] : delegations_) {
    if (!d.active) continue;
    if (layer(from) == Layer::basic || layer(d.delegatee) == Layer::basic) {
      d.active = false;
      if (d.amount > 0) ledger_.unbond(from, TokenKind::LZSP, d.amount, "delegation");
      if (members_[from].layer == Layer::delegate) members_[from].layer = Layer::member;
      trace_.emit("governance", "delegation_ended",
                  {{"delegator", raw(from)}, {"delegatee", raw(d.delegatee)}, {"reason", "membership-lost"}});
    }
  }
  for (auto& [id, info] : members_) {
    if (info.layer != Layer::basic || !eligible(id, info)) continue;
    const bool delegating = delegations_.contains(id) && delegations_.at(id).active;
    info.layer = delegating ? Layer::delegate : Layer::member;
    trace_.emit("governance", "layer", {{"account", raw(id)}, {"from", "basic"}, {"to", to_string(info.layer)}});
  }
}

void Governance::set_state(Proposal& p, ProposalState to, json extra) {
  const auto from = p.state;
  p.state = to;
  extra["proposal"] = raw(p.id);
  extra["from"] = to_string(from);
  extra["to"] = to_string(to);
  trace_.emit("governance", "proposal_state", std::move(extra));
}

ProposalId Governance::submit_proposal(AccountId user, ProposalLevel level, ProposalPayload payload) {
  ledger_.account(user);
  if (blacklisted(user)) fail(ErrorCode::Blacklisted, "account " + std::to_string(raw(user)));
  if (level == ProposalLevel::high && layer(user) == Layer::basic) {
    fail(ErrorCode::NotAMember, "basic users may only submit low/medium proposals");
  }
  const auto problems = payload_problems(payload);
  if (!problems.empty()) fail(ErrorCode::MalformedPayload, problems.front());
  const Amount fee = config_.governance.proposal_fee;
  if (ledger_.balance(user, TokenKind::LZSP) < fee) {
    fail(ErrorCode::InsufficientLZSP, "proposal fee is " + std::to_string(fee));
  }
  if (fee > 0) ledger_.burn(user, TokenKind::LZSP, fee, "proposal-fee");

  Proposal p;
  p.id = ProposalId{next_proposal_++};
  p.proposer = user;
  p.level = level;
  p.payload = std::move(payload);
  p.created = today();
  p.closes = today() + (level == ProposalLevel::high ? config_.governance.high_days
                                                      : config_.governance.low_medium_days);
  const auto id = p.id;
  trace_.emit("governance", "proposal_created",
              {{"proposal", raw(id)},
               {"proposer", raw(user)},
               {"level", to_string(level)},
               {"payload", p.payload.to_json()},
               {"fee", fee},
               {"closes", p.closes}});
  auto& stored = proposals_.emplace(id, std::move(p)).first->second;
  set_state(stored, ProposalState::active);
  refresh_membership();
  return id;
}

Amount Governance::vote(AccountId member, ProposalId id, Direction direction) {
  auto& p = mut(id);
  if (p.state != ProposalState::active || today() >= p.closes) fail(ErrorCode::NotActive, pid_text(id));
  if (layer(member) != Layer::member) {
    fail(ErrorCode::NotAMember, layer(member) == Layer::delegate ? "voting power is delegated" : "basic user");
  }
  if (p.votes.contains(member)) fail(ErrorCode::AlreadyVoted, pid_text(id));
  const Amount w = vote_weight(member);
  p.votes[member] = direction;
  (direction == Direction::up ? p.up : p.down) += w;
  trace_.emit("governance", "vote",
              {{"proposal", raw(id)},
               {"voter", raw(member)},
               {"direction", direction == Direction::up ? "up" : "down"},
               {"weight", w},
               {"up", p.up},
               {"down", p.down}});
  return w;
}

ProposalState Governance::finalize(ProposalId id) {
  auto& p = mut(id);
  if (p.state != ProposalState::active) fail(ErrorCode::NotActive, pid_text(id));
  if (today() < p.closes) fail(ErrorCode::StillActive, "voting closes on day " + std::to_string(p.closes));
  const Amount quorum = quorum_weight();
  const bool ok = p.up > p.down && p.up >= quorum;
  json extra = {{"up", p.up}, {"down", p.down}, {"quorum", quorum}};
  if (!ok) {
    set_state(p, ProposalState::rejected, extra);
    return p.state;
  }
  if (p.level == ProposalLevel::low_medium) p.veto_deadline = today() + config_.governance.veto_days;
  if (p.veto_deadline) extra["veto_deadline"] = *p.veto_deadline;
  set_state(p, ProposalState::approved, extra);
  auto& m = members_[p.proposer];
  if (!m.accepted_proposal) {
    m.accepted_proposal = true;
    trace_.emit("governance", "accepted_proposal", {{"account", raw(p.proposer)}, {"proposal", raw(id)}});
  }
  refresh_membership();
  return p.state;
}

bool Governance::committee_decide(DecisionKind kind, ProposalId id, const std::map<AccountId, Signature>& signatures) {
  return committee_decide(kind, id, std::vector<std::pair<AccountId, Signature>>(signatures.begin(), signatures.end()));
}

bool Governance::committee_decide(DecisionKind kind, ProposalId id,
                                  const std::vector<std::pair<AccountId, Signature>>& signatures) {
  auto& p = mut(id);
  std::set<AccountId> seen;
  std::size_t cast = 0;
  std::size_t yes = 0;
  for (const auto& [who, sig] : signatures) {
    if (std::find(committee_.begin(), committee_.end(), who) == committee_.end()) {
      fail(ErrorCode::NotCommitteeMember, std::to_string(raw(who)));
    }
    if (!seen.insert(who).second) fail(ErrorCode::DuplicateSignature, std::to_string(raw(who)));
    if (sig == Signature::absent) continue;
    ++cast;
    if (sig == Signature::yes) ++yes;
  }
  // Subject preconditions.
  switch (kind) {
    case DecisionKind::ratify:
      if (p.level != ProposalLevel::high || p.state != ProposalState::approved || p.ratified) {
        fail(ErrorCode::NotApproved, pid_text(id) + " is not awaiting ratification");
      }
      break;
    case DecisionKind::veto:
      if (p.state == ProposalState::vetoed) fail(ErrorCode::Vetoed, pid_text(id));
      if (p.state != ProposalState::approved || !p.veto_deadline || today() > *p.veto_deadline) {
        fail(ErrorCode::NotApproved, pid_text(id) + " is not in its veto window");
      }
      break;
    case DecisionKind::miscategorized:
      if (p.state != ProposalState::active && p.state != ProposalState::approved) {
        fail(ErrorCode::NotActive, pid_text(id));
      }
      break;
  }
  const bool approved = committee_approves(cast, yes, config_.governance.strict_agreement);
  trace_.emit("governance", "committee_decision",
              {{"proposal", raw(id)}, {"kind", to_string(kind)}, {"cast", cast}, {"yes", yes}, {"approved", approved}});
  if (!approved) {
    if (kind == DecisionKind::ratify) set_state(p, ProposalState::rejected, {{"reason", "committee"}});
    return false;
  }
  switch (kind) {
    case DecisionKind::ratify:
      p.ratified = true;
      p.veto_deadline = today() + config_.governance.veto_days;
      trace_.emit("governance", "ratified", {{"proposal", raw(id)}, {"veto_deadline", *p.veto_deadline}});
      break;
    case DecisionKind::veto:
      set_state(p, ProposalState::vetoed);
      break;
    case DecisionKind::miscategorized:
      penalize_miscategorized(p);
      set_state(p, ProposalState::rejected, {{"reason", "miscategorized"}});
      break;
  }
  return true;
}

void Governance::penalize_miscategorized(Proposal& p) {
  auto& m = members_[p.proposer];
  ++m.offenses;
  const Amount want = static_cast<Amount>(static_cast<__int128>(config_.governance.proposal_fee) *
                                          config_.governance.miscategorized_penalty_bps / 10000);
  const Amount lost = std::min(want, ledger_.balance(p.proposer, TokenKind::LZSP));
  if (lost > 0) ledger_.burn(p.proposer, TokenKind::LZSP, lost, "miscategorized-penalty");
  json extra = {{"account", raw(p.proposer)}, {"offense", m.offenses}, {"burned", lost}};
  if (m.offenses >= 2) {
    const Day until = m.offenses == 2 ? today() + 7 : m.offenses == 3 ? today() + 30 : kForever;
    m.blacklisted_until = until;
    extra["blacklisted_until"] = until == kForever ? json("permanent") : json(until);
  }
  trace_.emit("governance", "penalty", std::move(extra));
  refresh_membership();
}

void Governance::queue(ProposalId id) {
  auto& p = mut(id);
  if (p.state == ProposalState::vetoed) fail(ErrorCode::Vetoed, pid_text(id));
  if (p.state != ProposalState::approved) fail(ErrorCode::NotApproved, pid_text(id));
  if (p.level == ProposalLevel::high && !p.ratified) fail(ErrorCode::NotApproved, pid_text(id) + " awaits ratification");
  if (today() <= *p.veto_deadline) {
    fail(ErrorCode::StillActive, "veto window open until day " + std::to_string(*p.veto_deadline));
  }
  set_state(p, ProposalState::queued);
}

ProposalState Governance::execute(ProposalId id) {
  auto& p = mut(id);
  if (p.state == ProposalState::vetoed) fail(ErrorCode::Vetoed, pid_text(id));
  if (p.state != ProposalState::queued) fail(ErrorCode::NotQueued, pid_text(id));
  std::vector<std::string> errors;
  EngineConfig next = apply_payload(config_, p.payload, errors);
  if (!errors.empty()) {
    p.failure = errors.front();
    set_state(p, ProposalState::failed, {{"error", p.failure}});
    return p.state;
  }
  config_ = next;
  set_state(p, ProposalState::executed, {{"config", config_.to_json()}});
  refresh_membership();
  return p.state;
}

void Governance::delegate(AccountId member, AccountId delegatee) {
  if (member == delegatee) fail(ErrorCode::SelfDelegation);
  if (layer(member) != Layer::member) fail(ErrorCode::NotAMember, "delegator " + std::to_string(raw(member)));
  if (layer(delegatee) == Layer::basic) fail(ErrorCode::NotAMember, "delegatee " + std::to_string(raw(delegatee)));
  const std::int64_t rep = reputation_.has(delegatee) ? reputation_.score(delegatee) : 0;
  if (rep < config_.governance.member_reputation) fail(ErrorCode::LowReputationDelegatee, std::to_string(rep));
  const Amount amount = ledger_.balance(member, TokenKind::LZSP);
  if (amount > 0) ledger_.bond(member, TokenKind::LZSP, amount, "delegation");
  delegations_[member] = Delegation{member, delegatee, amount, true};
  members_[member].layer = Layer::delegate;
  trace_.emit("governance", "delegation",
              {{"delegator", raw(member)}, {"delegatee", raw(delegatee)}, {"amount", amount}});
}

void Governance::undelegate(AccountId member) {
  auto it = delegations_.find(member);
  if (it == delegations_.end() || !it->second.active) fail(ErrorCode::NotAMember, "no active delegation");
  auto& d = it->second;
  d.active = false;
  if (d.amount > 0) ledger_.unbond(member, TokenKind::LZSP, d.amount, "delegation");
  if (members_[member].layer == Layer::delegate) members_[member].layer = Layer::member;
  trace_.emit("governance", "delegation_ended",
              {{"delegator", raw(member)}, {"delegatee", raw(d.delegatee)}, {"reason", "undelegated"}});
}

void Governance::fire_day(Day day) {
  refresh_membership();
  if (!auto_advance_) return;
  for (auto& [id, p] : proposals_) {
    if (p.state == ProposalState::active && day >= p.closes) finalize(id);
    if (p.state == ProposalState::approved && p.veto_deadline && day > *p.veto_deadline) queue(id);
    if (p.state == ProposalState::queued) execute(id);
  }
}

}  // namespace market
