#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "market/digest.hpp"
#include "market/exchange.hpp"
#include "market/ledger.hpp"
#include "market/reputation.hpp"
#include "market/trace.hpp"

namespace market {

enum class Tier : std::uint8_t { internal, external };
enum class Ruling : std::uint8_t { for_claimant, for_respondent };
/// The vote byte hashed into a commitment.
enum class Vote : std::uint8_t { for_claimant = 1, for_respondent = 2 };

std::string_view to_string(Tier tier);
std::string_view to_string(Ruling ruling);
std::string_view to_string(Vote vote);

using Salt = std::array<std::uint8_t, 16>;

/// sha256(vote byte || 16-byte salt || juror id as 8 big-endian bytes).
Digest commitment(Vote vote, const Salt& salt, AccountId juror);

/// n_{k+1} = 2 n_k + 1.
std::int64_t jurors_for_round(std::int64_t base, int round);

// ---- internal tier -------------------------------------------------------

struct EvidenceFlags {
  bool tracking_informed = false;
  bool delivered_scan = false;
  bool return_received = false;
  bool description_mismatch = false;

  nlohmann::json to_json() const;
};

/// One row of the internal decision table. Unset conditions match anything.
struct RuleRow {
  std::string name;
  std::optional<bool> tracking_informed;
  std::optional<bool> delivered_scan;
  std::optional<bool> return_received;
  std::optional<bool> description_mismatch;
  Party winner = Party::buyer;

  bool matches(const EvidenceFlags& f) const;
};

using RuleTable = std::vector<RuleRow>;

const RuleTable& default_rule_table();
RuleTable rule_table_from_json(const nlohmann::json& j);
nlohmann::json rule_table_to_json(const RuleTable& table);
/// First matching row. A table with no matching row rules for the buyer.
const RuleRow* evaluate_rules(const RuleTable& table, const EvidenceFlags& flags);

// ---- sortition ------------------------------------------------------------

struct Candidate {
  AccountId id{};
  Amount stake = 0;
};

/// Weighted sampling without replacement, proportional to stake, exact
/// integer arithmetic. A pure function of (pool, n, seed).
std::vector<AccountId> draw_jurors(const std::vector<Candidate>& pool, std::size_t n, std::uint64_t seed);

// ---- cases ----------------------------------------------------------------

struct Evidence {
  AccountId submitter{};
  std::string content_hash;
  Day day = 0;
};

struct Ballot {
  std::optional<Digest> commitment;
  std::optional<Vote> vote;  // revealed
  bool absent = false;
};

struct CourtRound {
  int index = 0;
  std::int64_t jurors_needed = 0;
  std::vector<AccountId> jurors;
  std::map<AccountId, Amount> drawn_stake;
  std::map<AccountId, Ballot> ballots;
  Amount fee_pool = 0;
  Day opened = 0;
  Day commit_deadline = 0;
  Day reveal_deadline = 0;
  Day appeal_deadline = 0;
  std::optional<Ruling> result;
  std::int64_t votes_claimant = 0;
  std::int64_t votes_respondent = 0;
};

enum class CaseStatus : std::uint8_t { filed, evidence, voting, appeal_window, closed };

std::string_view to_string(CaseStatus status);

struct DisputeCase {
  CaseId id{};
  SessionId session{};
  AccountId claimant{};
  AccountId respondent{};
  Party claimant_party = Party::buyer;
  Amount value_usd = 0;
  Tier tier = Tier::internal;
  std::string route_basis;
  DisputeReason reason = DisputeReason::no_news;
  Day filed = 0;
  CaseStatus status = CaseStatus::filed;
  std::vector<Evidence> evidence;
  Day evidence_deadline = 0;
  std::vector<CourtRound> rounds;
  std::map<AccountId, Amount> fees_paid;
  std::optional<EvidenceFlags> flags;  // internal tier
  std::optional<std::string> rule_applied;
  std::optional<Ruling> ruling;
  std::optional<Party> winner;
  std::string closed_by;
};

struct ArbitrationStats {
  std::int64_t internal_cases = 0;
  std::int64_t external_cases = 0;
  std::int64_t appeals = 0;
  std::int64_t fallbacks = 0;
};

/// Two-tier dispute resolution over exchange sessions.
///
/// Internal tier: a deterministic table over evidence flags, resolved on the
/// first tick after filing. External tier: claimant fee, evidence period,
/// juror sortition, commit-reveal, tally, appeal window, execution.
class Arbitration {
 public:
  Arbitration(ExchangeBook& exchange, Ledger& ledger, ReputationBook& reputation, Trace& trace,
              const EngineConfig& config, std::uint64_t seed);

  void set_rule_table(RuleTable table) { rules_ = std::move(table); }
  const RuleTable& rule_table() const { return rules_; }

  // Juror pool: court stakes are LZS bonds.
  void join_pool(AccountId juror, Amount stake);
  void leave_pool(AccountId juror);
  std::vector<Candidate> pool_snapshot() const;

  /// Claimant files a claim; the session moves to Disputed and a case opens.
  CaseId file_claim(AccountId claimant, SessionId session, DisputeReason reason, bool opt_external = false,
                    bool description_mismatch = false);
  /// Opens a case for a session the exchange escalated by timeout.
  CaseId route_dispute(SessionId session);

  EvidenceFlags evidence_flags(const DisputeCase& c) const;
  Ruling resolve_internal(CaseId id, std::optional<EvidenceFlags> flags = std::nullopt);

  void open_external_case(CaseId id, Amount fee_offered);
  void submit_evidence(CaseId id, AccountId submitter, std::string content_hash);
  void commit_vote(CaseId id, AccountId juror, const Digest& commitment);
  void reveal_vote(CaseId id, AccountId juror, Vote vote, const Salt& salt);
  /// Closes the current round after its reveal deadline.
  Ruling tally_and_rule(CaseId id);
  void appeal(CaseId id, AccountId appellant, Amount fee_offered);

  /// Day-driven progression of every open case, in case-id order.
  void fire_day(Day day);

  const DisputeCase& dispute(CaseId id) const;
  const std::map<CaseId, DisputeCase>& cases() const { return cases_; }
  std::optional<CaseId> case_for(SessionId session) const;
  const ArbitrationStats& stats() const { return stats_; }
  AccountId fee_account() const { return fee_account_; }

  nlohmann::json transcript(CaseId id) const;

 private:
  DisputeCase& mut(CaseId id);
  CaseId open_case(SessionId session);
  void draw_round(DisputeCase& c);
  void finalize(DisputeCase& c, Ruling ruling, std::string_view closed_by);
  void pay_jurors(DisputeCase& c);
  void refund_fees(DisputeCase& c);
  Party party_of(const DisputeCase& c, Ruling r) const;
  Day today() const { return trace_.today(); }

  ExchangeBook& exchange_;
  Ledger& ledger_;
  ReputationBook& reputation_;
  Trace& trace_;
  const EngineConfig& config_;
  std::uint64_t seed_;
  RuleTable rules_;
  AccountId fee_account_{};
  std::map<AccountId, Amount> pool_;
  std::map<CaseId, DisputeCase> cases_;
  std::map<SessionId, CaseId> by_session_;
  ArbitrationStats stats_;
  std::uint64_t next_case_ = 1;
};

}  // namespace market
