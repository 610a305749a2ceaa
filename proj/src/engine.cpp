#include "market/engine.hpp"

namespace market {

Engine::Engine(EngineConfig cfg, std::uint64_t seed, json header)
    : config(std::move(cfg)),
      trace(std::move(header)),
      ledger(trace, config),
      reputation(trace, config),
      rewards(ledger, trace, config),
      exchange(ledger, reputation, rewards, trace, config, seed),
      arbitration(exchange, ledger, reputation, trace, config, seed),
      governance(ledger, reputation, trace, config),
      seed_(seed) {}

void Engine::begin_day(Day day) {
  if (day < trace.today()) {
    fail(ErrorCode::ClockRegression, "day " + std::to_string(day) + " after " + std::to_string(trace.today()));
  }
  trace.set_day(day);
  exchange.fire_day(day);
  arbitration.fire_day(day);
  governance.fire_day(day);
}

json conservation_json(const ConservationReport& report) {
  json out = json::object();
  for (auto token : kAllTokens) {
    const auto& t = report[static_cast<std::size_t>(token)];
    out[std::string(to_string(token))] = {{"balances", t.balances}, {"escrow", t.escrow}, {"staked", t.staked},
                                          {"minted", t.minted},     {"burned", t.burned}};
  }
  return out;
}

void Engine::checkpoint() {
  const auto report = ledger.conservation_report();
  trace.emit("harness", "conservation", conservation_json(report));
  ledger.check_conservation();
}

}  // namespace market
