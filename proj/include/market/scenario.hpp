#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "market/analytics.hpp"
#include "market/arbitration.hpp"
#include "market/config.hpp"
#include "market/types.hpp"

namespace market {

/// Agent behaviour. Each kind is a fixed decision table over session
/// states; `mixed` picks honest or `alternative` once per session.
enum class StrategyKind : std::uint8_t {
  honest,
  scripted,  // acts only through script events
  no_ship,
  wrong_item,
  qr_omit,
  false_claim,
  never_confirm,
  absent_juror,
  mixed,
};

struct Strategy {
  StrategyKind kind = StrategyKind::honest;
  double p_honest = 1.0;                        // mixed only
  StrategyKind alternative = StrategyKind::honest;  // mixed only; resolved per role when unset

  std::string text() const;
  /// "honest", "scripted", "dishonest-seller:no-ship|wrong-item|qr-omit",
  /// "dishonest-buyer:false-claim|never-confirm", "dishonest-juror:absent",
  /// "mixed:<p-honest>[:<dishonest variant>]".
  static std::optional<Strategy> parse(std::string_view text, std::string& error);
};

std::string_view strategy_name(StrategyKind kind);
bool seller_deviation(StrategyKind kind);
bool buyer_deviation(StrategyKind kind);

struct AgentSpec {
  std::string id;
  std::string role;  // buyer | seller | trader | juror | member | observer
  std::map<TokenKind, Amount> balances;
  Amount stake = 0;        // seller deposit made at genesis
  Amount court_stake = 0;  // juror pool bond made at genesis
  std::optional<TokenKind> payout;
  bool founding = false;
  Strategy strategy;
};

/// Which sessions of a generated market deviate from the agents' strategies.
struct Deviation {
  std::int64_t every = 0;   // every k-th exchange ...
  std::int64_t offset = 0;  // ... starting at this index
  std::vector<std::int64_t> indices;
  std::optional<Strategy> buyer;
  std::optional<Strategy> seller;

  bool applies(std::int64_t index) const;
};

/// Synthetic exchange stream: one listing plus purchase per exchange.
struct MarketSpec {
  std::int64_t exchanges = 0;
  Day start_day = 0;
  std::int64_t per_day = 1;
  std::optional<ValueModel> value_model;
  double fixed_value_usd = 0;  // used when no model is given
  TokenKind token = TokenKind::LZS;
  std::string category;
  bool opt_external = false;
  std::vector<std::string> sellers;
  std::vector<std::string> buyers;
  std::vector<Deviation> deviations;
};

struct ScriptEvent {
  Day day = 0;
  std::string op;
  nlohmann::json args;  // the whole event object
  std::size_t index = 0;  // position in the file, for diagnostics
};

struct CarrierSpec {
  bool automatic = true;
  Day transit_days = 2;
  Day return_days = 2;  // return shipping before an honest seller acknowledges
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  Day horizon = 0;
  EngineConfig config;
  nlohmann::json config_overrides = nlohmann::json::object();
  std::optional<RuleTable> rule_table;
  CostModel cost_model;
  std::vector<AgentSpec> agents;
  std::vector<std::string> committee;
  bool governance_auto = true;
  CarrierSpec carrier;
  std::optional<MarketSpec> market;
  std::vector<ScriptEvent> script;  // stable-sorted by day
  std::string source_text;         // exact file bytes

  const AgentSpec* agent(std::string_view id) const;
};

/// Thrown for a scenario that parses but breaks the schema or a bound.
/// Carries every violation found, not just the first.
class ScenarioError : public ProtocolError {
 public:
  ScenarioError(ErrorCode code, std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

/// Script operations and the fields each accepts besides day/op/expect/note.
const std::map<std::string, std::vector<std::string>>& script_vocabulary();

/// Token amount written as a decimal number of whole tokens.
std::optional<Amount> amount_from_json(const nlohmann::json& value);

}  // namespace market
