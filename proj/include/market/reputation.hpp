#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "market/config.hpp"
#include "market/trace.hpp"
#include "market/types.hpp"

namespace market {

inline constexpr std::int64_t kReputationMin = 0;
inline constexpr std::int64_t kReputationMax = 100;

struct ReputationEntry {
  Day day = 0;
  std::int64_t delta = 0;  // requested change, before clamping
  std::string reason;
  std::optional<AccountId> counterparty;
  std::optional<std::string> comment;
};

struct ReputationScore {
  std::int64_t initial = 50;
  std::int64_t value = 50;
  std::vector<ReputationEntry> history;
};

enum class Polarity : std::uint8_t { good, bad };

struct Feedback {
  AccountId rater{};
  AccountId ratee{};
  Polarity polarity = Polarity::good;
  std::optional<std::string> comment;
  SessionId session{};
};

/// What the reputation book needs to know about the rated session.
struct SessionParties {
  AccountId buyer{};
  AccountId seller{};
  bool terminal = false;
};

std::int64_t clamp_score(std::int64_t value);

/// Scores on a 0..100 scale. Comments are append-only and never removed.
class ReputationBook {
 public:
  ReputationBook(Trace& trace, const EngineConfig& config);

  const ReputationScore& init(AccountId account);
  bool has(AccountId account) const { return scores_.contains(account); }
  std::int64_t score(AccountId account) const;
  const ReputationScore& record(AccountId account) const;

  std::int64_t apply_feedback(const Feedback& feedback, const SessionParties& session);

  /// Protocol penalty. Only the exchange and arbitration modules may call it.
  std::int64_t penalize(Caller caller, AccountId account, std::string_view reason, std::int64_t amount,
                        std::optional<AccountId> counterparty = std::nullopt);

  /// Re-derives the score from the history (clamp-fold over the initial value).
  std::int64_t replay(AccountId account) const;

  const std::map<AccountId, ReputationScore>& scores() const { return scores_; }

 private:
  std::int64_t apply(AccountId account, ReputationEntry entry);

  Trace& trace_;
  const EngineConfig& config_;
  std::map<AccountId, ReputationScore> scores_;
  std::set<std::pair<AccountId, SessionId>> rated_;
};

}  // namespace market
