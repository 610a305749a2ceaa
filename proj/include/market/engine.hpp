#pragma once

#include <cstdint>

#include "market/arbitration.hpp"
#include "market/config.hpp"
#include "market/exchange.hpp"
#include "market/governance.hpp"
#include "market/ledger.hpp"
#include "market/reputation.hpp"
#include "market/rewards.hpp"
#include "market/trace.hpp"

namespace market {

/// Owns one instance of every protocol module, wired to a single trace and
/// a single configuration. Governance edits the configuration in place, so
/// executed proposals take effect for every module on the next operation.
class Engine {
 public:
  Engine(EngineConfig config, std::uint64_t seed, json header = json::object());

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  /// Moves the clock to `day` and fires what is due: exchange timeouts,
  /// then arbitration (docketing new disputes first), then governance.
  void begin_day(Day day);

  /// Emits the per-token conservation totals and throws InvariantViolation
  /// when the identity does not hold.
  void checkpoint();

  Day today() const { return trace.today(); }
  std::uint64_t seed() const { return seed_; }

  EngineConfig config;
  Trace trace;
  Ledger ledger;
  ReputationBook reputation;
  RewardEngine rewards;
  ExchangeBook exchange;
  Arbitration arbitration;
  Governance governance;

 private:
  std::uint64_t seed_;
};

json conservation_json(const ConservationReport& report);

}  // namespace market
