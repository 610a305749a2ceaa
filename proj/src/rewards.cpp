#include "market/rewards.hpp"

namespace market {

std::vector<RewardMint> compute_rewards(const RewardClaim& claim, const RewardSchedule& schedule) {
  std::vector<RewardMint> mints;
  auto add = [&](AccountId who, Amount amount, const char* reason) {
    if (amount > 0) mints.push_back({who, amount, reason});
  };
  switch (claim.outcome.kind) {
    case OutcomeKind::resolved_mutually:
      add(claim.buyer, schedule.resolution_reward, "mutual-resolution");
      add(claim.seller, schedule.resolution_reward, "mutual-resolution");
      break;
    case OutcomeKind::success_confirmed:
    case OutcomeKind::success_by_default:
      if (!claim.qr_included) {
        // The buyer could not scan through no fault of their own.
        if (claim.buyer_confirmed) add(claim.buyer, schedule.default_grant, "default-grant");
      } else if (claim.scanned_on_time && claim.outcome.satisfaction == true) {
        add(claim.buyer, schedule.buyer_reward, "scan-and-satisfied");
      }
      if (claim.qr_included && claim.dropoff_on_time) {
        add(claim.seller, schedule.seller_reward, "seller-exchange");
      }
      break;
    case OutcomeKind::cancelled:
    case OutcomeKind::arbitrated:
      break;
  }
  return mints;
}

RewardEngine::RewardEngine(Ledger& ledger, Trace& trace, const EngineConfig& config)
    : ledger_(ledger), trace_(trace), config_(config) {}

std::vector<RewardMint> RewardEngine::grant_rewards(const RewardClaim& claim) {
  if (!granted_.insert(claim.session).second) {
    fail(ErrorCode::AlreadyGranted, "session " + std::to_string(raw(claim.session)));
  }
  auto mints = compute_rewards(claim, config_.rewards);
  json list = json::array();
  for (const auto& m : mints) {
    ledger_.mint(Caller::incentives, m.account, TokenKind::LZSP, m.amount, "reward:" + m.reason);
    total_ += m.amount;
    list.push_back({{"account", raw(m.account)}, {"amount", m.amount}, {"reason", m.reason}});
  }
  trace_.emit("incentives", "rewards_granted",
              {{"session", raw(claim.session)}, {"outcome", describe(claim.outcome)}, {"mints", list}});
  return mints;
}

}  // namespace market
