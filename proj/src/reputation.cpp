#include "market/reputation.hpp"

#include <algorithm>

namespace market {

std::int64_t clamp_score(std::int64_t value) { return std::clamp(value, kReputationMin, kReputationMax); }

ReputationBook::ReputationBook(Trace& trace, const EngineConfig& config) : trace_(trace), config_(config) {}

const ReputationScore& ReputationBook::init(AccountId account) {
  if (scores_.contains(account)) fail(ErrorCode::AlreadyInitialized, std::to_string(raw(account)));
  auto& score = scores_[account];
  score.initial = clamp_score(config_.reputation.initial);
  score.value = score.initial;
  trace_.emit("reputation", "init", {{"account", raw(account)}, {"value", score.value}});
  return score;
}

const ReputationScore& ReputationBook::record(AccountId account) const {
  auto it = scores_.find(account);
  if (it == scores_.end()) fail(ErrorCode::UnknownAccount, "no reputation for " + std::to_string(raw(account)));
  return it->second;
}

std::int64_t ReputationBook::score(AccountId account) const { return record(account).value; }

std::int64_t ReputationBook::apply(AccountId account, ReputationEntry entry) {
  auto it = scores_.find(account);
  if (it == scores_.end()) fail(ErrorCode::UnknownAccount, "no reputation for " + std::to_string(raw(account)));
  auto& score = it->second;
  const std::int64_t before = score.value;
  score.value = clamp_score(score.value + entry.delta);
  json payload = {{"account", raw(account)}, {"delta", entry.delta}, {"before", before},
                  {"after", score.value},    {"reason", entry.reason}};
  if (entry.counterparty) payload["counterparty"] = raw(*entry.counterparty);
  if (entry.comment) payload["comment"] = *entry.comment;
  score.history.push_back(std::move(entry));
  trace_.emit("reputation", "change", std::move(payload));
  return score.value;
}

std::int64_t ReputationBook::apply_feedback(const Feedback& feedback, const SessionParties& session) {
  if (!session.terminal) fail(ErrorCode::NotTerminal, "session " + std::to_string(raw(feedback.session)));
  const bool rater_ok = feedback.rater == session.buyer || feedback.rater == session.seller;
  const bool ratee_ok = feedback.ratee == session.buyer || feedback.ratee == session.seller;
  if (!rater_ok || !ratee_ok || feedback.rater == feedback.ratee) {
    fail(ErrorCode::NotParticipant, "feedback must be between the two parties");
  }
  if (!rated_.emplace(feedback.rater, feedback.session).second) {
    fail(ErrorCode::DuplicateFeedback, "session " + std::to_string(raw(feedback.session)));
  }
  ReputationEntry entry;
  entry.day = trace_.today();
  entry.delta = feedback.polarity == Polarity::good ? config_.reputation.gain : -config_.reputation.loss;
  entry.reason = feedback.polarity == Polarity::good ? "feedback-good" : "feedback-bad";
  entry.counterparty = feedback.rater;
  entry.comment = feedback.comment;
  return apply(feedback.ratee, std::move(entry));
}

std::int64_t ReputationBook::penalize(Caller caller, AccountId account, std::string_view reason,
                                      std::int64_t amount, std::optional<AccountId> counterparty) {
  if (caller != Caller::exchange && caller != Caller::arbitration) {
    fail(ErrorCode::UnauthorizedCaller, "reputation penalty");
  }
  ReputationEntry entry;
  entry.day = trace_.today();
  entry.delta = -std::max<std::int64_t>(amount, 0);
  entry.reason = std::string(reason);
  entry.counterparty = counterparty;
  return apply(account, std::move(entry));
}

std::int64_t ReputationBook::replay(AccountId account) const {
  const auto& rec = record(account);
  std::int64_t value = rec.initial;
  for (const auto& entry : rec.history) value = clamp_score(value + entry.delta);
  return value;
}

}  // namespace market
