#pragma once

#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "market/config.hpp"
#include "market/ledger.hpp"
#include "market/reputation.hpp"
#include "market/trace.hpp"

namespace market {

enum class Layer : std::uint8_t { basic, member, delegate };
enum class ProposalLevel : std::uint8_t { low_medium, high };
enum class ProposalState : std::uint8_t { created, active, approved, vetoed, queued, executed, rejected, failed };
enum class Direction : std::uint8_t { up, down };

std::string_view to_string(Layer layer);
std::string_view to_string(ProposalLevel level);
std::string_view to_string(ProposalState state);
std::optional<ProposalLevel> parse_level(std::string_view text);

/// Targets are config keys ("deadlines.A") or "categories"; signatures are
/// "set(int64)", "add(string)" or "remove(string)"; calldata is hex.
struct ProposalPayload {
  std::vector<std::string> targets;
  std::vector<std::int64_t> values;
  std::vector<std::string> signatures;
  std::vector<std::string> calldata;
  std::string description;

  static ProposalPayload from_json(const json& j);
  json to_json() const;

  /// Convenience: a one-call payload setting an integer config key.
  static ProposalPayload set_key(const std::string& key, std::int64_t value, std::string description);
  static ProposalPayload category(bool add, const std::string& name, std::string description);
};

std::string encode_int64(std::int64_t value);
std::string encode_text(std::string_view text);

/// Checks shape and vocabulary; returns the problems found.
std::vector<std::string> payload_problems(const ProposalPayload& payload);

/// Applies a payload to a copy of `config`; violations land in `errors`.
EngineConfig apply_payload(const EngineConfig& config, const ProposalPayload& payload, std::vector<std::string>& errors);

struct Proposal {
  ProposalId id{};
  AccountId proposer{};
  ProposalLevel level = ProposalLevel::low_medium;
  ProposalPayload payload;
  ProposalState state = ProposalState::created;
  Amount up = 0;
  Amount down = 0;
  std::map<AccountId, Direction> votes;
  Day created = 0;
  Day closes = 0;  // voting allowed while day < closes
  bool ratified = false;  // committee ratification, high level only
  std::optional<Day> veto_deadline;
  std::string failure;
};

inline constexpr std::size_t kCommitteeSize = 5;
inline constexpr std::size_t kCommitteeQuorum = 4;  // ceil(0.8 * 5)
inline constexpr Day kCommitteeTermDays = 3 * 365;

/// approved <=> cast >= 4 and yes/cast >= 1/2 (> 1/2 when strict).
bool committee_approves(std::size_t cast, std::size_t yes, bool strict);

enum class Signature : std::uint8_t { yes, no, absent };
enum class DecisionKind : std::uint8_t { ratify, veto, miscategorized };

std::string_view to_string(DecisionKind kind);

struct Delegation {
  AccountId delegator{};
  AccountId delegatee{};
  Amount amount = 0;
  bool active = true;
};

struct MemberInfo {
  bool accepted_proposal = false;
  bool founding = false;
  Layer layer = Layer::basic;
  int offenses = 0;
  std::optional<Day> blacklisted_until;  // nullopt = not blacklisted; kForever = permanent
};

inline constexpr Day kForever = std::numeric_limits<Day>::max();

/// Three-layer DAO: LZSP-weighted votes with a cap, proposal lifecycle,
/// delegation, and the five-member committee.
class Governance {
 public:
  Governance(Ledger& ledger, ReputationBook& reputation, Trace& trace, EngineConfig& config);

  /// Genesis bootstrap: the account is treated as having an accepted proposal.
  void found_member(AccountId account);
  void set_committee(const std::vector<AccountId>& members);
  const std::vector<AccountId>& committee() const { return committee_; }

  ProposalId submit_proposal(AccountId user, ProposalLevel level, ProposalPayload payload);
  Amount vote(AccountId member, ProposalId id, Direction direction);
  ProposalState finalize(ProposalId id);
  bool committee_decide(DecisionKind kind, ProposalId id, const std::map<AccountId, Signature>& signatures);
  /// Same, with an explicit signature list so duplicates can be reported.
  bool committee_decide(DecisionKind kind, ProposalId id,
                        const std::vector<std::pair<AccountId, Signature>>& signatures);
  void queue(ProposalId id);
  ProposalState execute(ProposalId id);

  void delegate(AccountId member, AccountId delegatee);
  void undelegate(AccountId member);

  /// Re-evaluates every membership; demotes on the first violation.
  void refresh_membership();

  Layer layer(AccountId account) const;
  Amount holdings(AccountId account) const;  // LZSP balance plus bonded LZSP
  Amount received(AccountId account) const;  // delegated in
  Amount vote_weight(AccountId account) const;
  Amount quorum_weight() const;
  bool blacklisted(AccountId account) const;

  /// Finalizes due proposals, queues after the veto window, executes queued.
  void fire_day(Day day);
  void set_auto_advance(bool on) { auto_advance_ = on; }

  const Proposal& proposal(ProposalId id) const;
  const std::map<ProposalId, Proposal>& proposals() const { return proposals_; }
  const std::map<AccountId, Delegation>& delegations() const { return delegations_; }
  const std::map<AccountId, MemberInfo>& members() const { return members_; }

 private:
  Proposal& mut(ProposalId id);
  void set_state(Proposal& p, ProposalState to, json extra = json::object());
  void penalize_miscategorized(Proposal& p);
  bool eligible(AccountId account, const MemberInfo& info) const;
  Day today() const { return trace_.today(); }

  Ledger& ledger_;
  ReputationBook& reputation_;
  Trace& trace_;
  EngineConfig& config_;
  std::vector<AccountId> committee_;
  Day committee_term_start_ = 0;
  std::map<ProposalId, Proposal> proposals_;
  std::map<AccountId, Delegation> delegations_;  // keyed by delegator
  std::map<AccountId, MemberInfo> members_;
  std::uint64_t next_proposal_ = 1;
  bool auto_advance_ = true;
};

}  // namespace market
