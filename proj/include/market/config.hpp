#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "market/types.hpp"

namespace market {

/// Exchange deadline windows in days. Each window is anchored at a session
/// event time (T0 escrow funded, T1 dropoff, T1' buyer QR query, T2 receipt
/// confirmed, T3 dissatisfaction declared).
struct DeadlineConfig {
  Day A = 5;   // T0 + A: dropoff
  Day B = 10;  // T1 + B: buyer confirms or claims
  Day B_prime = 3;  // T1' + B': seller answers a missing-QR query
  Day C = 7;   // T2 + C: satisfaction answer
  Day D = 7;   // T3 + D: mutual resolution
  Day E = 14;  // T1 + E: pre-settlement cancellation with return
  Day F = 30;  // T1 + F: post-settlement cancellation with return
  Day pre_escrow = 3;      // each pre-escrow step, anchored at the previous step
  Day return_window = 21;  // seller acknowledges a returned package

  std::vector<std::string> violations() const;
};

struct LedgerConfig {
  Amount seller_min_stake = tokens(500);
  Day stake_duration = 90;
  std::int64_t stake_yield_bps = 0;
  Rate lzs_per_lzdc{1, 1};  // LZS paid for one LZDC
};

struct MarketConfig {
  Rate usd_per_lzs{1, 1};
  Amount listing_floor_usd = 20 * kMicro;
  Amount dispute_threshold_usd = 50 * kMicro;
};

struct ReputationConfig {
  std::int64_t initial = 50;
  std::int64_t gain = 2;  // good feedback
  std::int64_t loss = 5;  // bad feedback and protocol penalties
};

struct RewardSchedule {
  Amount buyer_reward = tokens(10);       // Y: on-time scan and satisfied answer
  Amount resolution_reward = tokens(5);   // Z: each party, mutual resolution
  Amount seller_reward = tokens(5);       // QR included and on-time dropoff
  Amount default_grant = tokens(10);      // buyer, when the seller left out the QR code
};

struct ArbitrationConfig {
  std::int64_t base_jurors = 3;
  Day evidence_days = 5;
  Day commit_days = 3;
  Day reveal_days = 2;
  Day appeal_days = 3;
  Amount fee_per_juror = tokens(1);  // LZS
  std::int64_t non_reveal_bps = 3000;
};

struct GovernanceConfig {
  Amount vote_cap = tokens(1000);
  Amount member_lzsp = tokens(100);
  std::int64_t member_reputation = 40;
  std::int64_t quorum_bps = 1000;  // of circulating LZSP
  Day veto_days = 3;
  Day low_medium_days = 7;
  Day high_days = 30;
  Amount proposal_fee = tokens(1);
  std::int64_t miscategorized_penalty_bps = 5000;
  bool strict_agreement = false;  // committee: yes/cast > 1/2 instead of >= 1/2
};

struct EngineConfig {
  DeadlineConfig deadlines;
  LedgerConfig ledger;
  MarketConfig market;
  ReputationConfig reputation;
  RewardSchedule rewards;
  ArbitrationConfig arbitration;
  GovernanceConfig governance;
  std::vector<std::string> categories{"games", "consoles", "hardware", "phones", "accessories"};

  /// Every bound violation, not just the first.
  std::vector<std::string> violations() const;

  /// Applies a JSON override object ({"deadlines": {"A": 4}, ...}).
  /// Unknown keys and type errors are appended to `errors`.
  void apply_overrides(const nlohmann::json& overrides, std::vector<std::string>& errors);

  nlohmann::json to_json() const;
};

/// Integer-valued configuration keys addressable by dotted name, the
/// vocabulary of executable governance payloads.
struct ConfigKey {
  std::string name;
  std::function<std::int64_t&(EngineConfig&)> ref;
};

const std::vector<ConfigKey>& config_keys();
const ConfigKey* find_config_key(std::string_view name);

}  // namespace market
