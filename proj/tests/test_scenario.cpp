#include "market/scenario.hpp"
#include "support.hpp"

using namespace market;
using namespace market::testing;

namespace {

const char* kBase = R"({
  "name": "t", "seed": 1, "horizon": 10,
  "agents": [
    {"id": "s", "role": "seller", "balances": {"LZS": 1000}, "stake": 500},
    {"id": "b", "role": "buyer", "balances": {"LZS": 1000}}
  ]
})";

json base() { return json::parse(kBase); }

// Parses, expecting a ScenarioError whose problems mention every needle.
void expect_problems(const json& j, ErrorCode code, std::vector<std::string> needles) {
  try {
    parse_scenario(j.dump());
    ADD_FAILURE() << "accepted: " << j.dump();
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.code(), code);
    std::string all;
    for (const auto& p : e.problems()) all += p + "\n";
    for (const auto& n : needles) EXPECT_NE(all.find(n), std::string::npos) << "missing '" << n << "' in\n" << all;
  }
}

TEST(Scenario, MinimalParses) {
  const auto sc = parse_scenario(kBase);
  EXPECT_EQ(sc.name, "t");
  EXPECT_EQ(sc.agents.size(), 2u);
  EXPECT_EQ(sc.agent("s")->stake, tokens(500));
  EXPECT_EQ(sc.agent("b")->balances.at(TokenKind::LZS), tokens(1000));
  EXPECT_EQ(sc.source_text, kBase);
}

TEST(Scenario, NotJson) {
  try {
    parse_scenario("{\"name\": ");
    FAIL();
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
  }
  EXPECT_THROW(parse_scenario("[1,2]"), ScenarioError);
}

TEST(Scenario, UnknownFieldsAnywhere) {
  auto j = base();
  j["colour"] = "red";
  j["agents"][0]["mood"] = 1;
  expect_problems(j, ErrorCode::ValidationError, {"unknown field 'colour'", "unknown field 'mood'"});
}

TEST(Scenario, EveryViolationReported) {
  auto j = base();
  j.erase("seed");
  j["agents"][1]["role"] = "wizard";
  j["agents"][0]["stake"] = 10;
  j["config"] = {{"deadlines", {{"B_prime", 12}}}};
  expect_problems(j, ErrorCode::ValidationError,
                  {"missing field 'seed'", "unknown role 'wizard'", "below the minimum seller stake", "B_prime"});
}

TEST(Scenario, ConfigOverrideTypeAndKey) {
  auto j = base();
  j["config"] = {{"deadlines", {{"Q", 1}}}, {"market", {{"listing_floor_usd", "cheap"}}}};
  expect_problems(j, ErrorCode::ValidationError, {"Q", "listing_floor_usd"});
}

TEST(Scenario, ScriptReferencesAndOps) {
  auto j = base();
  j["script"] = json::array({
      {{"day", 1}, {"op", "purchase"}, {"buyer", "b"}, {"listing", "nope"}, {"ref", "x"}},
      {{"day", 1}, {"op", "teleport"}},
      {{"day", 99}, {"op", "list"}, {"seller", "s"}, {"ref", "L"}, {"price", 5}, {"description", "d"}},
      {{"day", 2}, {"op", "list"}, {"seller", "ghost"}, {"ref", "L2"}, {"price", 5}, {"description", "d"},
       {"expect", "NoSuchError"}},
  });
  expect_problems(j, ErrorCode::ValidationError,
                  {"listing 'nope' not defined earlier", "unknown operation 'teleport'", "after the horizon",
                   "unknown agent 'ghost'", "unknown error code 'NoSuchError'"});
}

TEST(Scenario, StrategiesParse) {
  std::string err;
  EXPECT_EQ(Strategy::parse("dishonest-seller:no-ship", err)->kind, StrategyKind::no_ship);
  const auto m = Strategy::parse("mixed:0.9:false-claim", err);
  ASSERT_TRUE(m);
  EXPECT_EQ(m->kind, StrategyKind::mixed);
  EXPECT_DOUBLE_EQ(m->p_honest, 0.9);
  EXPECT_EQ(m->alternative, StrategyKind::false_claim);
  EXPECT_FALSE(Strategy::parse("mixed:1.5", err));
  EXPECT_FALSE(Strategy::parse("dishonest-seller:teleport", err));
  for (const char* t : {"honest", "scripted", "dishonest-juror:absent", "dishonest-buyer:never-confirm"}) {
    const auto s = Strategy::parse(t, err);
    ASSERT_TRUE(s) << t;
    EXPECT_EQ(Strategy::parse(s->text(), err)->kind, s->kind);
  }
}

TEST(Scenario, AmountsAreWholeTokenDecimals) {
  EXPECT_EQ(amount_from_json(json(1.5)), 1'500'000);
  EXPECT_EQ(amount_from_json(json(2)), tokens(2));
  EXPECT_FALSE(amount_from_json(json("1")));
  EXPECT_FALSE(amount_from_json(json(0.0000001)));
}

TEST(Scenario, MarketBounds) {
  auto j = base();
  j["market"] = {{"exchanges", 100}, {"per_day", 1}, {"value_model", {{"fixed", 30}}},
                 {"sellers", {"s"}}, {"buyers", {"b"}}};
  expect_problems(j, ErrorCode::ValidationError, {"past the horizon"});
  j["horizon"] = 200;
  EXPECT_NO_THROW(parse_scenario(j.dump()));
  j["market"]["value_model"] = {{"exponential", {{"lambda", -1}}}};
  expect_problems(j, ErrorCode::ValidationError, {"rate must be positive"});
}

TEST(Scenario, CorpusParses) {
  for (const auto& f : std::filesystem::directory_iterator(source_dir() / "scenarios")) {
    if (f.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_scenario(f.path())) << f.path();
  }
}

TEST(Scenario, InvalidExamplesRejected) {
  for (const auto& f : std::filesystem::directory_iterator(source_dir() / "tests" / "data" / "invalid")) {
    EXPECT_THROW(load_scenario(f.path()), ScenarioError) << f.path();
  }
}

}  // namespace
