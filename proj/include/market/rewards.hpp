#pragma once

#include <set>
#include <string>
#include <vector>

#include "market/config.hpp"
#include "market/ledger.hpp"
#include "market/session.hpp"

namespace market {

/// Eligibility facts about a finished exchange.
struct RewardClaim {
  SessionId session{};
  AccountId buyer{};
  AccountId seller{};
  Outcome outcome;
  bool buyer_confirmed = false;   // receipt confirmed by scan or manually
  bool scanned_on_time = false;   // QR scanned by T1 + B
  bool qr_included = false;       // seller put the QR code in the package
  bool dropoff_on_time = false;   // dropped off by T0 + A
};

struct RewardMint {
  AccountId account{};
  Amount amount = 0;
  std::string reason;
};

/// Pure: which LZSP mints a claim earns under a schedule.
std::vector<RewardMint> compute_rewards(const RewardClaim& claim, const RewardSchedule& schedule);

/// LZSP issuance for honest behaviour. The only LZSP source besides genesis.
class RewardEngine {
 public:
  RewardEngine(Ledger& ledger, Trace& trace, const EngineConfig& config);

  std::vector<RewardMint> grant_rewards(const RewardClaim& claim);

  bool granted(SessionId session) const { return granted_.contains(session); }
  Amount total_minted() const { return total_; }

 private:
  Ledger& ledger_;
  Trace& trace_;
  const EngineConfig& config_;
  std::set<SessionId> granted_;
  Amount total_ = 0;
};

}  // namespace market
