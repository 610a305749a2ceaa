#include "market/config.hpp"

#include <algorithm>

namespace market {
namespace {

#define KEY(path, expr) \
  ConfigKey { path, [](EngineConfig& c) -> std::int64_t& { return c.expr; } }

std::vector<ConfigKey> make_keys() {
  return {
      KEY("deadlines.A", deadlines.A),
      KEY("deadlines.B", deadlines.B),
      KEY("deadlines.B_prime", deadlines.B_prime),
      KEY("deadlines.C", deadlines.C),
      KEY("deadlines.D", deadlines.D),
      KEY("deadlines.E", deadlines.E),
      KEY("deadlines.F", deadlines.F),
      KEY("deadlines.pre_escrow", deadlines.pre_escrow),
      KEY("deadlines.return_window", deadlines.return_window),
      KEY("ledger.seller_min_stake", ledger.seller_min_stake),
      KEY("ledger.stake_duration", ledger.stake_duration),
      KEY("ledger.stake_yield_bps", ledger.stake_yield_bps),
      KEY("ledger.lzs_per_lzdc.num", ledger.lzs_per_lzdc.num),
      KEY("ledger.lzs_per_lzdc.den", ledger.lzs_per_lzdc.den),
      KEY("market.usd_per_lzs.num", market.usd_per_lzs.num),
      KEY("market.usd_per_lzs.den", market.usd_per_lzs.den),
      KEY("market.listing_floor_usd", market.listing_floor_usd),
      KEY("market.dispute_threshold_usd", market.dispute_threshold_usd),
      KEY("reputation.initial", reputation.initial),
      KEY("reputation.gain", reputation.gain),
      KEY("reputation.loss", reputation.loss),
      KEY("rewards.buyer_reward", rewards.buyer_reward),
      KEY("rewards.resolution_reward", rewards.resolution_reward),
      KEY("rewards.seller_reward", rewards.seller_reward),
      KEY("rewards.default_grant", rewards.default_grant),
      KEY("arbitration.base_jurors", arbitration.base_jurors),
      KEY("arbitration.evidence_days", arbitration.evidence_days),
      KEY("arbitration.commit_days", arbitration.commit_days),
      KEY("arbitration.reveal_days", arbitration.reveal_days),
      KEY("arbitration.appeal_days", arbitration.appeal_days),
      KEY("arbitration.fee_per_juror", arbitration.fee_per_juror),
      KEY("arbitration.non_reveal_bps", arbitration.non_reveal_bps),
      KEY("governance.vote_cap", governance.vote_cap),
      KEY("governance.member_lzsp", governance.member_lzsp),
      KEY("governance.member_reputation", governance.member_reputation),
      KEY("governance.quorum_bps", governance.quorum_bps),
      KEY("governance.veto_days", governance.veto_days),
      KEY("governance.low_medium_days", governance.low_medium_days),
      KEY("governance.high_days", governance.high_days),
      KEY("governance.proposal_fee", governance.proposal_fee),
      KEY("governance.miscategorized_penalty_bps", governance.miscategorized_penalty_bps),
  };
}

#undef KEY

void flatten(const nlohmann::json& node, const std::string& prefix,
             std::vector<std::pair<std::string, const nlohmann::json*>>& out) {
  if (node.is_object()) {
    for (auto it = node.begin(); it != node.end(); ++it) {
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    }
  } else {
    out.emplace_back(prefix, &node);
  }
}

void check_min(std::vector<std::string>& out, const char* name, std::int64_t value, std::int64_t min) {
  if (value < min) out.push_back(std::string(name) + " must be >= " + std::to_string(min));
}

}  // namespace

std::vector<std::string> DeadlineConfig::violations() const {
  std::vector<std::string> out;
  check_min(out, "deadlines.A", A, 1);
  check_min(out, "deadlines.B", B, 1);
  check_min(out, "deadlines.B_prime", B_prime, 1);
  check_min(out, "deadlines.C", C, 1);
  check_min(out, "deadlines.D", D, 1);
  check_min(out, "deadlines.E", E, 1);
  check_min(out, "deadlines.F", F, 1);
  check_min(out, "deadlines.pre_escrow", pre_escrow, 1);
  check_min(out, "deadlines.return_window", return_window, 1);
  // T1' >= T1, so T1 + B > T1' + B' can only be honoured when B > B'.
  if (B <= B_prime) {
    out.push_back("deadline constraint T1 + B > T1' + B' violated: B (" + std::to_string(B) +
                  ") must exceed B_prime (" + std::to_string(B_prime) + ")");
  }
  return out;
}

std::vector<std::string> EngineConfig::violations() const {
  auto out = deadlines.violations();
  check_min(out, "ledger.seller_min_stake", ledger.seller_min_stake, 1);
  check_min(out, "ledger.stake_duration", ledger.stake_duration, 1);
  check_min(out, "ledger.stake_yield_bps", ledger.stake_yield_bps, 0);
  if (!ledger.lzs_per_lzdc.valid()) out.push_back("ledger.lzs_per_lzdc must be a positive rational");
  if (!market.usd_per_lzs.valid()) out.push_back("market.usd_per_lzs must be a positive rational");
  check_min(out, "market.listing_floor_usd", market.listing_floor_usd, 0);
  check_min(out, "market.dispute_threshold_usd", market.dispute_threshold_usd, 0);
  if (reputation.initial < 0 || reputation.initial > 100) out.push_back("reputation.initial must be in [0,100]");
  check_min(out, "reputation.gain", reputation.gain, 0);
  check_min(out, "reputation.loss", reputation.loss, 0);
  check_min(out, "rewards.buyer_reward", rewards.buyer_reward, 0);
  check_min(out, "rewards.resolution_reward", rewards.resolution_reward, 0);
  check_min(out, "rewards.seller_reward", rewards.seller_reward, 0);
  check_min(out, "rewards.default_grant", rewards.default_grant, 0);
  check_min(out, "arbitration.base_jurors", arbitration.base_jurors, 1);
  check_min(out, "arbitration.evidence_days", arbitration.evidence_days, 1);
  check_min(out, "arbitration.commit_days", arbitration.commit_days, 1);
  check_min(out, "arbitration.reveal_days", arbitration.reveal_days, 1);
  check_min(out, "arbitration.appeal_days", arbitration.appeal_days, 1);
  check_min(out, "arbitration.fee_per_juror", arbitration.fee_per_juror, 0);
  if (arbitration.non_reveal_bps < 0 || arbitration.non_reveal_bps > 10000) {
    out.push_back("arbitration.non_reveal_bps must be in [0,10000]");
  }
  check_min(out, "governance.vote_cap", governance.vote_cap, 1);
  check_min(out, "governance.member_lzsp", governance.member_lzsp, 0);
  if (governance.member_reputation < 0 || governance.member_reputation > 100) {
    out.push_back("governance.member_reputation must be in [0,100]");
  }
  if (governance.quorum_bps < 0 || governance.quorum_bps > 10000) {
    out.push_back("governance.quorum_bps must be in [0,10000]");
  }
  check_min(out, "governance.veto_days", governance.veto_days, 1);
  check_min(out, "governance.low_medium_days", governance.low_medium_days, 1);
  check_min(out, "governance.high_days", governance.high_days, 1);
  check_min(out, "governance.proposal_fee", governance.proposal_fee, 0);
  if (governance.miscategorized_penalty_bps < 0 || governance.miscategorized_penalty_bps > 10000) {
    out.push_back("governance.miscategorized_penalty_bps must be in [0,10000]");
  }
  if (categories.empty()) out.push_back("categories must not be empty");
  return out;
}

void EngineConfig::apply_overrides(const nlohmann::json& overrides, std::vector<std::string>& errors) {
  if (!overrides.is_object()) {
    errors.push_back("config must be an object");
    return;
  }
  std::vector<std::pair<std::string, const nlohmann::json*>> leaves;
  flatten(overrides, "", leaves);
  for (const auto& [name, value] : leaves) {
    if (name == "categories") {
      if (!value->is_array() || value->empty()) {
        errors.push_back("categories must be a non-empty array of strings");
        continue;
      }
      categories.clear();
      for (const auto& c : *value) {
        if (!c.is_string()) {
          errors.push_back("categories must be a non-empty array of strings");
          break;
        }
        categories.push_back(c.get<std::string>());
      }
      continue;
    }
    if (name == "governance.strict_agreement") {
      if (!value->is_boolean()) {
        errors.push_back("governance.strict_agreement must be a boolean");
      } else {
        governance.strict_agreement = value->get<bool>();
      }
      continue;
    }
    const ConfigKey* key = find_config_key(name);
    if (key == nullptr) {
      errors.push_back("unknown config field: " + name);
      continue;
    }
    if (!value->is_number_integer()) {
      errors.push_back(name + " must be an integer");
      continue;
    }
    key->ref(*this) = value->get<std::int64_t>();
  }
}

nlohmann::json EngineConfig::to_json() const {
  nlohmann::json out = nlohmann::json::object();
  EngineConfig copy = *this;
  for (const auto& key : config_keys()) {
    nlohmann::json* node = &out;
    std::string_view rest = key.name;
    for (auto dot = rest.find('.'); dot != std::string_view::npos; dot = rest.find('.')) {
      node = &(*node)[std::string(rest.substr(0, dot))];
      rest.remove_prefix(dot + 1);
    }
    (*node)[std::string(rest)] = key.ref(copy);
  }
  out["governance"]["strict_agreement"] = governance.strict_agreement;
  out["categories"] = categories;
  return out;
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = make_keys();
  return keys;
}

const ConfigKey* find_config_key(std::string_view name) {
  const auto& keys = config_keys();
  auto it = std::find_if(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.name == name; });
  return it == keys.end() ? nullptr : &*it;
}

}  // namespace market
