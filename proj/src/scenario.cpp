#include "market/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "market/governance.hpp"

namespace market {
namespace {

using nlohmann::json;

enum class FieldType : std::uint8_t {
  agent,
  listing_def,
  listing,
  session_def,
  session,
  proposal_def,
  proposal,
  token,
  amount,
  integer,
  boolean,
  text,
  choice,
  strategy,
  rate,
  signatures,
  object,
};

struct FieldSpec {
  std::string name;
  FieldType type;
  bool required = true;
  std::vector<std::string> choices{};
};

struct OpSpec {
  std::vector<FieldSpec> fields;
};

FieldSpec req(std::string name, FieldType type, std::vector<std::string> choices = {}) {
  return {std::move(name), type, true, std::move(choices)};
}
FieldSpec opt(std::string name, FieldType type, std::vector<std::string> choices = {}) {
  return {std::move(name), type, false, std::move(choices)};
}

const std::vector<std::string> kReasons{"wrong_description", "party_withdraws", "no_news",
                                        "not_delivered",     "wrong_item_or_empty", "defective"};

const std::map<std::string, OpSpec>& op_specs() {
  using F = FieldType;
  static const std::map<std::string, OpSpec> specs = {
      {"list",
       {{req("seller", F::agent), req("ref", F::listing_def), req("price", F::amount), opt("token", F::token),
         opt("category", F::text), opt("description", F::text)}}},
      {"purchase",
       {{req("buyer", F::agent), req("listing", F::listing), req("ref", F::session_def),
         opt("buyer_strategy", F::strategy), opt("seller_strategy", F::strategy)}}},
      {"validate", {{req("seller", F::agent), req("session", F::session)}}},
      {"agree", {{req("agent", F::agent), req("session", F::session)}}},
      {"fund", {{req("buyer", F::agent), req("session", F::session)}}},
      {"issue_qr", {{req("seller", F::agent), req("session", F::session)}}},
      {"prepare", {{req("seller", F::agent), req("session", F::session), opt("qr_included", F::boolean)}}},
      {"dropoff",
       {{req("seller", F::agent), req("session", F::session), opt("qr_included", F::boolean),
         opt("tracking", F::choice, {"informed", "lost", "silent"}), opt("tracking_number", F::text)}}},
      {"report_tracking",
       {{req("seller", F::agent), req("session", F::session), req("tracking", F::choice, {"informed", "lost"}),
         opt("tracking_number", F::text)}}},
      {"deliver", {{req("session", F::session)}}},
      {"query_qr", {{req("buyer", F::agent), req("session", F::session)}}},
      {"answer_qr", {{req("seller", F::agent), req("session", F::session)}}},
      {"confirm",
       {{req("buyer", F::agent), req("session", F::session), opt("via", F::choice, {"scan", "manual", "bad-scan"})}}},
      {"satisfaction", {{req("buyer", F::agent), req("session", F::session), req("satisfied", F::boolean)}}},
      {"resolve", {{req("agent", F::agent), req("session", F::session)}}},
      {"cancel", {{req("agent", F::agent), req("session", F::session)}}},
      {"return_received", {{req("seller", F::agent), req("session", F::session)}}},
      {"claim",
       {{req("agent", F::agent), req("session", F::session), req("reason", F::choice, kReasons),
         opt("external", F::boolean), opt("mismatch", F::boolean)}}},
      {"pay_fee", {{req("agent", F::agent), req("session", F::session), opt("fee", F::amount)}}},
      {"evidence", {{req("agent", F::agent), req("session", F::session), req("content", F::text)}}},
      {"commit",
       {{req("agent", F::agent), req("session", F::session), req("vote", F::choice, {"claimant", "respondent"})}}},
      {"reveal", {{req("agent", F::agent), req("session", F::session), opt("tamper", F::boolean)}}},
      {"appeal", {{req("agent", F::agent), req("session", F::session), opt("fee", F::amount)}}},
      {"join_pool", {{req("agent", F::agent), req("stake", F::amount)}}},
      {"leave_pool", {{req("agent", F::agent)}}},
      {"stake", {{req("agent", F::agent), req("amount", F::amount), opt("duration", F::integer)}}},
      {"withdraw_stake", {{req("agent", F::agent)}}},
      {"transfer", {{req("from", F::agent), req("to", F::agent), req("token", F::token), req("amount", F::amount)}}},
      {"convert",
       {{req("agent", F::agent), req("from_token", F::token), req("to_token", F::token), req("amount", F::amount)}}},
      {"set_rate", {{req("lzs_per_lzdc", F::rate)}}},
      {"feedback",
       {{req("rater", F::agent), req("ratee", F::agent), req("session", F::session),
         req("polarity", F::choice, {"good", "bad"}), opt("comment", F::text)}}},
      {"propose",
       {{req("agent", F::agent), req("ref", F::proposal_def),
         req("level", F::choice, {"high", "low-medium", "low", "medium"}), req("payload", F::object)}}},
      {"vote", {{req("agent", F::agent), req("proposal", F::proposal), req("direction", F::choice, {"up", "down"})}}},
      {"committee",
       {{req("kind", F::choice, {"ratify", "veto", "miscategorized"}), req("proposal", F::proposal),
         req("signatures", F::signatures)}}},
      {"delegate", {{req("agent", F::agent), req("to", F::agent)}}},
      {"undelegate", {{req("agent", F::agent)}}},
      {"finalize", {{req("proposal", F::proposal)}}},
      {"queue", {{req("proposal", F::proposal)}}},
      {"execute", {{req("proposal", F::proposal)}}},
  };
  return specs;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

/// Collects problems with a JSON path prefix.
class Checker {
 public:
  void add(const std::string& where, const std::string& what) { problems.push_back(where + ": " + what); }

  void only_fields(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
        add(where, "unknown field '" + it.key() + "'");
      }
    }
  }

  std::optional<std::int64_t> integer(const json& obj, const std::string& where, const char* key, bool required,
                                      std::int64_t min = std::numeric_limits<std::int64_t>::min()) {
    if (!obj.contains(key)) {
      if (required) add(where, std::string("missing field '") + key + "'");
      return std::nullopt;
    }
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) {
      add(where + "." + key, "must be an integer");
      return std::nullopt;
    }
    const auto x = v.get<std::int64_t>();
    if (x < min) {
      add(where + "." + key, "must be >= " + std::to_string(min));
      return std::nullopt;
    }
    return x;
  }

  std::optional<bool> boolean(const json& obj, const std::string& where, const char* key) {
    if (!obj.contains(key)) return std::nullopt;
    if (!obj.at(key).is_boolean()) {
      add(where + "." + key, "must be a boolean");
      return std::nullopt;
    }
    return obj.at(key).get<bool>();
  }

  std::optional<std::string> text(const json& obj, const std::string& where, const char* key, bool required) {
    if (!obj.contains(key)) {
      if (required) add(where, std::string("missing field '") + key + "'");
      return std::nullopt;
    }
    if (!obj.at(key).is_string()) {
      add(where + "." + key, "must be a string");
      return std::nullopt;
    }
    return obj.at(key).get<std::string>();
  }

  std::optional<Amount> amount(const json& obj, const std::string& where, const char* key, bool required) {
    if (!obj.contains(key)) {
      if (required) add(where, std::string("missing field '") + key + "'");
      return std::nullopt;
    }
    auto a = amount_from_json(obj.at(key));
    if (!a || *a < 0) {
      add(where + "." + key, "must be a non-negative token amount (at most 6 decimals)");
      return std::nullopt;
    }
    return a;
  }

  std::optional<TokenKind> token(const json& obj, const std::string& where, const char* key) {
    if (!obj.contains(key)) return std::nullopt;
    const auto& v = obj.at(key);
    std::optional<TokenKind> t;
    if (v.is_string()) t = parse_token(v.get<std::string>());
    if (!t) add(where + "." + key, "must be one of LZS, LZSP, LZDC");
    return t;
  }

  std::vector<std::string> problems;
};

std::optional<Strategy> check_strategy(Checker& ck, const json& v, const std::string& where) {
  if (!v.is_string()) {
    ck.add(where, "strategy must be a string");
    return std::nullopt;
  }
  std::string err;
  auto s = Strategy::parse(v.get<std::string>(), err);
  if (!s) ck.add(where, err);
  return s;
}

void check_value_model(Checker& ck, const json& v, const std::string& where, MarketSpec& m) {
  if (!v.is_object() || v.size() != 1) {
    ck.add(where, "value_model must be an object with exactly one of exponential, pareto, fixed");
    return;
  }
  const auto& [kind, body] = *v.items().begin();
  if (kind == "exponential") {
    if (!body.is_object()) return ck.add(where + ".exponential", "must be an object");
    ck.only_fields(body, where + ".exponential", {"lambda", "mean"});
    double lambda = 0;
    if (body.contains("lambda") == body.contains("mean")) {
      return ck.add(where + ".exponential", "give exactly one of lambda or mean");
    }
    const auto& x = body.contains("lambda") ? body.at("lambda") : body.at("mean");
    if (!x.is_number() || !(x.get<double>() > 0)) return ck.add(where + ".exponential", "rate must be positive");
    lambda = body.contains("lambda") ? x.get<double>() : 1.0 / x.get<double>();
    m.value_model = ExpModel{lambda};
  } else if (kind == "pareto") {
    if (!body.is_object()) return ck.add(where + ".pareto", "must be an object");
    ck.only_fields(body, where + ".pareto", {"alpha", "xmin"});
    ParetoModel p;
    for (const char* k : {"alpha", "xmin"}) {
      if (!body.contains(k) || !body.at(k).is_number() || !(body.at(k).get<double>() > 0)) {
        ck.add(where + ".pareto." + k, "must be a positive number");
        return;
      }
    }
    p.alpha = body.at("alpha").get<double>();
    p.xmin = body.at("xmin").get<double>();
    m.value_model = p;
  } else if (kind == "fixed") {
    if (!body.is_number() || !(body.get<double>() > 0)) return ck.add(where + ".fixed", "must be a positive USD value");
    m.fixed_value_usd = body.get<double>();
  } else {
    ck.add(where, "unknown value model '" + kind + "'");
  }
}

void check_market(Checker& ck, const json& j, Scenario& sc, const std::set<std::string>& agents) {
  const std::string where = "market";
  if (!j.is_object()) return ck.add(where, "must be an object");
  ck.only_fields(j, where,
                 {"exchanges", "start_day", "per_day", "value_model", "token", "category", "opt_external", "sellers",
                  "buyers", "deviations"});
  MarketSpec m;
  m.category = sc.config.categories.empty() ? "" : sc.config.categories.front();
  if (auto v = ck.integer(j, where, "exchanges", true, 1)) m.exchanges = *v;
  if (auto v = ck.integer(j, where, "start_day", false, 0)) m.start_day = *v;
  if (auto v = ck.integer(j, where, "per_day", false, 1)) m.per_day = *v;
  if (j.contains("value_model")) {
    check_value_model(ck, j.at("value_model"), where + ".value_model", m);
  } else {
    ck.add(where, "missing field 'value_model'");
  }
  if (auto t = ck.token(j, where, "token")) {
    if (*t == TokenKind::LZSP) ck.add(where + ".token", "exchanges settle in LZS or LZDC");
    m.token = *t;
  }
  if (auto c = ck.text(j, where, "category", false)) m.category = *c;
  if (auto b = ck.boolean(j, where, "opt_external")) m.opt_external = *b;
  for (const char* side : {"sellers", "buyers"}) {
    auto& out = std::string_view(side) == "sellers" ? m.sellers : m.buyers;
    if (!j.contains(side) || !j.at(side).is_array() || j.at(side).empty()) {
      ck.add(where + "." + side, "must be a non-empty array of agent ids");
      continue;
    }
    for (const auto& id : j.at(side)) {
      if (!id.is_string() || !agents.contains(id.get<std::string>())) {
        ck.add(where + "." + side, "unknown agent " + id.dump());
        continue;
      }
      out.push_back(id.get<std::string>());
    }
  }
  for (const auto& s : m.sellers) {
    if (std::find(m.buyers.begin(), m.buyers.end(), s) != m.buyers.end()) {
      ck.add(where, "agent '" + s + "' cannot be both a generated seller and buyer");
    }
  }
  if (j.contains("deviations")) {
    const auto& devs = j.at("deviations");
    if (!devs.is_array()) {
      ck.add(where + ".deviations", "must be an array");
    } else {
      for (std::size_t i = 0; i < devs.size(); ++i) {
        const auto& d = devs[i];
        const std::string w = where + ".deviations[" + std::to_string(i) + "]";
        if (!d.is_object()) {
          ck.add(w, "must be an object");
          continue;
        }
        ck.only_fields(d, w, {"every", "offset", "indices", "buyer", "seller"});
        Deviation dev;
        if (auto v = ck.integer(d, w, "every", false, 1)) dev.every = *v;
        if (auto v = ck.integer(d, w, "offset", false, 0)) dev.offset = *v;
        if (d.contains("indices")) {
          if (!d.at("indices").is_array()) ck.add(w + ".indices", "must be an array of integers");
          else
            for (const auto& x : d.at("indices")) {
              if (!x.is_number_integer() || x.get<std::int64_t>() < 0) ck.add(w + ".indices", "bad index " + x.dump());
              else dev.indices.push_back(x.get<std::int64_t>());
            }
        }
        if (dev.every == 0 && dev.indices.empty()) ck.add(w, "give 'every' or 'indices'");
        if (d.contains("buyer")) dev.buyer = check_strategy(ck, d.at("buyer"), w + ".buyer");
        if (d.contains("seller")) dev.seller = check_strategy(ck, d.at("seller"), w + ".seller");
        if (dev.buyer && seller_deviation(dev.buyer->kind)) ck.add(w + ".buyer", "seller strategy given for buyer");
        if (dev.seller && buyer_deviation(dev.seller->kind)) ck.add(w + ".seller", "buyer strategy given for seller");
        m.deviations.push_back(std::move(dev));
      }
    }
  }
  const Day last = m.start_day + (m.exchanges - 1) / std::max<std::int64_t>(m.per_day, 1);
  if (m.exchanges > 0 && last > sc.horizon) {
    ck.add(where, "generated exchanges run to day " + std::to_string(last) + ", past the horizon");
  }
  sc.market = std::move(m);
}

void check_agents(Checker& ck, const json& j, Scenario& sc) {
  if (!j.is_array()) return ck.add("agents", "must be an array");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& a = j[i];
    const std::string where = "agents[" + std::to_string(i) + "]";
    if (!a.is_object()) {
      ck.add(where, "must be an object");
      continue;
    }
    ck.only_fields(a, where, {"id", "role", "balances", "stake", "court_stake", "payout", "founding", "strategy"});
    AgentSpec spec;
    if (auto id = ck.text(a, where, "id", true)) {
      if (id->empty()) ck.add(where + ".id", "must not be empty");
      if (!seen.insert(*id).second) ck.add(where + ".id", "duplicate agent id '" + *id + "'");
      spec.id = *id;
    }
    spec.role = ck.text(a, where, "role", false).value_or("trader");
    static const std::set<std::string> roles{"buyer", "seller", "trader", "juror", "member", "observer"};
    if (!roles.contains(spec.role)) ck.add(where + ".role", "unknown role '" + spec.role + "'");
    if (a.contains("balances")) {
      const auto& b = a.at("balances");
      if (!b.is_object()) {
        ck.add(where + ".balances", "must be an object");
      } else {
        for (auto it = b.begin(); it != b.end(); ++it) {
          auto token = parse_token(it.key());
          if (!token) {
            ck.add(where + ".balances", "unknown token '" + it.key() + "'");
            continue;
          }
          if (auto amt = ck.amount(b, where + ".balances", it.key().c_str(), true)) spec.balances[*token] = *amt;
        }
      }
    }
    spec.stake = ck.amount(a, where, "stake", false).value_or(0);
    spec.court_stake = ck.amount(a, where, "court_stake", false).value_or(0);
    if (spec.stake > 0 && spec.stake < sc.config.ledger.seller_min_stake) {
      ck.add(where + ".stake", "below the minimum seller stake");
    }
    const Amount lzs = spec.balances.contains(TokenKind::LZS) ? spec.balances.at(TokenKind::LZS) : 0;
    if (spec.stake + spec.court_stake > lzs) ck.add(where, "stake plus court_stake exceeds the LZS balance");
    if (auto t = ck.token(a, where, "payout")) {
      if (*t == TokenKind::LZSP) ck.add(where + ".payout", "payouts are LZS or LZDC");
      spec.payout = *t;
    }
    spec.founding = ck.boolean(a, where, "founding").value_or(false);
    if (a.contains("strategy")) {
      if (auto s = check_strategy(ck, a.at("strategy"), where + ".strategy")) spec.strategy = *s;
    }
    sc.agents.push_back(std::move(spec));
  }
}

struct RefSets {
  std::set<std::string> listings;
  std::set<std::string> sessions;
  std::set<std::string> proposals;
};

void check_field(Checker& ck, const FieldSpec& f, const json& v, const std::string& where,
                 const std::set<std::string>& agents, RefSets& refs) {
  using F = FieldType;
  const std::string w = where + "." + f.name;
  auto need_string = [&]() -> std::optional<std::string> {
    if (!v.is_string()) {
      ck.add(w, "must be a string");
      return std::nullopt;
    }
    return v.get<std::string>();
  };
  switch (f.type) {
    case F::agent:
      if (auto s = need_string(); s && !agents.contains(*s)) ck.add(w, "unknown agent '" + *s + "'");
      break;
    case F::listing_def:
      if (auto s = need_string(); s && !refs.listings.insert(*s).second) ck.add(w, "listing ref '" + *s + "' reused");
      break;
    case F::session_def:
      if (auto s = need_string(); s && !refs.sessions.insert(*s).second) ck.add(w, "session ref '" + *s + "' reused");
      break;
    case F::proposal_def:
      if (auto s = need_string(); s && !refs.proposals.insert(*s).second) {
        ck.add(w, "proposal ref '" + *s + "' reused");
      }
      break;
    case F::listing:
      if (auto s = need_string(); s && !refs.listings.contains(*s)) ck.add(w, "listing '" + *s + "' not defined earlier");
      break;
    case F::session:
      if (auto s = need_string(); s && !refs.sessions.contains(*s)) ck.add(w, "session '" + *s + "' not defined earlier");
      break;
    case F::proposal:
      if (auto s = need_string(); s && !refs.proposals.contains(*s)) {
        ck.add(w, "proposal '" + *s + "' not defined earlier");
      }
      break;
    case F::token:
      if (auto s = need_string(); s && !parse_token(*s)) ck.add(w, "unknown token '" + *s + "'");
      break;
    case F::amount:
      if (auto a = amount_from_json(v); !a || *a < 0) ck.add(w, "must be a non-negative token amount");
      break;
    case F::integer:
      if (!v.is_number_integer()) ck.add(w, "must be an integer");
      break;
    case F::boolean:
      if (!v.is_boolean()) ck.add(w, "must be a boolean");
      break;
    case F::text:
      need_string();
      break;
    case F::choice:
      if (auto s = need_string(); s && std::find(f.choices.begin(), f.choices.end(), *s) == f.choices.end()) {
        ck.add(w, "must be one of " + join(f.choices, ", "));
      }
      break;
    case F::strategy:
      check_strategy(ck, v, w);
      break;
    case F::rate:
      if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer() ||
          v[0].get<std::int64_t>() <= 0 || v[1].get<std::int64_t>() <= 0) {
        ck.add(w, "must be [numerator, denominator] with positive integers");
      }
      break;
    case F::signatures:
      if (!v.is_object()) {
        ck.add(w, "must map agent ids to yes|no|absent");
        break;
      }
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!agents.contains(it.key())) ck.add(w, "unknown agent '" + it.key() + "'");
        if (!it->is_string() || (*it != "yes" && *it != "no" && *it != "absent")) {
          ck.add(w + "." + it.key(), "must be yes, no or absent");
        }
      }
      break;
    case F::object:
      if (!v.is_object()) ck.add(w, "must be an object");
      break;
  }
}

void check_script(Checker& ck, const json& j, Scenario& sc, const std::set<std::string>& agents) {
  if (!j.is_array()) return ck.add("script", "must be an array");
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    const std::string where = "script[" + std::to_string(i) + "]";
    if (!e.is_object()) {
      ck.add(where, "must be an object");
      continue;
    }
    ScriptEvent ev;
    ev.index = i;
    ev.args = e;
    if (auto d = ck.integer(e, where, "day", true, 0)) {
      ev.day = *d;
      if (*d > sc.horizon) ck.add(where + ".day", "after the horizon");
    }
    auto op = ck.text(e, where, "op", true);
    if (!op) continue;
    ev.op = *op;
    if (auto x = ck.text(e, where, "expect", false); x && *x != "ok" && !parse_error_code(*x)) {
      ck.add(where + ".expect", "unknown error code '" + *x + "'");
    }
    ck.text(e, where, "note", false);
    sc.script.push_back(std::move(ev));
  }
  std::stable_sort(sc.script.begin(), sc.script.end(),
                   [](const ScriptEvent& a, const ScriptEvent& b) { return a.day < b.day; });

  // Field checks run in execution order so refs must be defined before use.
  RefSets refs;
  const auto& specs = op_specs();
  for (const auto& ev : sc.script) {
    const std::string where = "script[" + std::to_string(ev.index) + "]";
    auto it = specs.find(ev.op);
    if (it == specs.end()) {
      ck.add(where + ".op", "unknown operation '" + ev.op + "'");
      continue;
    }
    std::set<std::string> allowed{"day", "op", "expect", "note"};
    for (const auto& f : it->second.fields) allowed.insert(f.name);
    for (auto f = ev.args.begin(); f != ev.args.end(); ++f) {
      if (!allowed.contains(f.key())) ck.add(where, "unknown field '" + f.key() + "' for op " + ev.op);
    }
    for (const auto& f : it->second.fields) {
      if (!ev.args.contains(f.name)) {
        if (f.required) ck.add(where, "missing field '" + f.name + "' for op " + ev.op);
        continue;
      }
      check_field(ck, f, ev.args.at(f.name), where, agents, refs);
    }
    if (ev.op == "propose" && ev.args.contains("payload") && ev.args.at("payload").is_object()) {
      try {
        const auto payload = ProposalPayload::from_json(ev.args.at("payload"));
        (void)payload;
      } catch (const ProtocolError& e) {
        // Malformed payloads are a protocol outcome (the engine rejects them),
        // but they must at least have the documented shape.
        if (e.code() != ErrorCode::MalformedPayload) ck.add(where + ".payload", e.what());
      }
    }
  }
}

}  // namespace

std::string_view strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::honest:
      return "honest";
    case StrategyKind::scripted:
      return "scripted";
    case StrategyKind::no_ship:
      return "dishonest-seller:no-ship";
    case StrategyKind::wrong_item:
      return "dishonest-seller:wrong-item";
    case StrategyKind::qr_omit:
      return "dishonest-seller:qr-omit";
    case StrategyKind::false_claim:
      return "dishonest-buyer:false-claim";
    case StrategyKind::never_confirm:
      return "dishonest-buyer:never-confirm";
    case StrategyKind::absent_juror:
      return "dishonest-juror:absent";
    case StrategyKind::mixed:
      return "mixed";
  }
  return "?";
}

bool seller_deviation(StrategyKind k) {
  return k == StrategyKind::no_ship || k == StrategyKind::wrong_item || k == StrategyKind::qr_omit;
}

bool buyer_deviation(StrategyKind k) { return k == StrategyKind::false_claim || k == StrategyKind::never_confirm; }

std::string Strategy::text() const {
  if (kind != StrategyKind::mixed) return std::string(strategy_name(kind));
  std::ostringstream os;
  os << "mixed:" << p_honest;
  if (alternative != StrategyKind::honest) os << ':' << strategy_name(alternative);
  return os.str();
}

std::optional<Strategy> Strategy::parse(std::string_view text, std::string& error) {
  static const StrategyKind kFixed[] = {StrategyKind::honest,      StrategyKind::scripted,   StrategyKind::no_ship,
                                        StrategyKind::wrong_item,  StrategyKind::qr_omit,    StrategyKind::false_claim,
                                        StrategyKind::never_confirm, StrategyKind::absent_juror};
  for (auto k : kFixed) {
    if (strategy_name(k) == text) return Strategy{k, 1.0, StrategyKind::honest};
  }
  if (text.starts_with("mixed:")) {
    std::string_view rest = text.substr(6);
    std::string_view prob = rest;
    std::string_view alt;
    if (auto colon = rest.find(':'); colon != std::string_view::npos) {
      prob = rest.substr(0, colon);
      alt = rest.substr(colon + 1);
    }
    double p = 0;
    try {
      std::size_t used = 0;
      p = std::stod(std::string(prob), &used);
      if (used != prob.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      error = "mixed strategy needs a probability: mixed:<p-honest>";
      return std::nullopt;
    }
    if (!(p >= 0 && p <= 1)) {
      error = "mixed probability must be in [0,1]";
      return std::nullopt;
    }
    Strategy s{StrategyKind::mixed, p, StrategyKind::honest};
    if (!alt.empty()) {
      std::string inner;
      auto a = parse(alt, inner);
      // Bare variant names ("false-claim") are accepted too.
      for (const char* prefix : {"dishonest-buyer:", "dishonest-seller:"}) {
        if (!a) a = parse(std::string(prefix) + std::string(alt), inner);
      }
      if (!a || !(seller_deviation(a->kind) || buyer_deviation(a->kind))) {
        error = "mixed alternative must be a dishonest buyer or seller strategy";
        return std::nullopt;
      }
      s.alternative = a->kind;
    }
    return s;
  }
  error = "unknown strategy '" + std::string(text) + "'";
  return std::nullopt;
}

bool Deviation::applies(std::int64_t index) const {
  if (std::find(indices.begin(), indices.end(), index) != indices.end()) return true;
  return every > 0 && index >= offset && (index - offset) % every == 0;
}

const AgentSpec* Scenario::agent(std::string_view id) const {
  for (const auto& a : agents) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

ScenarioError::ScenarioError(ErrorCode code, std::vector<std::string> problems)
    : ProtocolError(code, join(problems, "; ")), problems_(std::move(problems)) {}

std::optional<Amount> amount_from_json(const json& value) {
  if (value.is_number_integer()) {
    const auto whole = value.get<std::int64_t>();
    if (whole > std::numeric_limits<Amount>::max() / kMicro || whole < std::numeric_limits<Amount>::min() / kMicro) {
      return std::nullopt;
    }
    return whole * kMicro;
  }
  if (value.is_number_float()) {
    const double x = value.get<double>() * static_cast<double>(kMicro);
    if (!std::isfinite(x) || std::fabs(x) > 9e18) return std::nullopt;
    const double r = std::round(x);
    if (std::fabs(r - x) > 1e-6 * std::max(1.0, std::fabs(x))) return std::nullopt;
    return static_cast<Amount>(r);
  }
  return std::nullopt;
}

const std::map<std::string, std::vector<std::string>>& script_vocabulary() {
  static const auto vocab = [] {
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& [op, spec] : op_specs()) {
      auto& fields = out[op];
      for (const auto& f : spec.fields) fields.push_back(f.required ? f.name : f.name + "?");
    }
    return out;
  }();
  return vocab;
}

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(ErrorCode::ParseError, {std::string("scenario is not valid JSON: ") + e.what()});
  }
  if (!j.is_object()) throw ScenarioError(ErrorCode::ParseError, {"scenario must be a JSON object"});

  Checker ck;
  Scenario sc;
  sc.source_text = text;
  ck.only_fields(j, "scenario",
                 {"name", "seed", "horizon", "config", "rule_table", "cost_model", "agents", "committee",
                  "governance_auto", "carrier", "market", "script"});
  sc.name = ck.text(j, "scenario", "name", false).value_or("");
  if (!j.contains("seed")) {
    ck.add("scenario", "missing field 'seed'");
  } else if (j.at("seed").is_number_unsigned()) {
    sc.seed = j.at("seed").get<std::uint64_t>();
  } else {
    ck.add("scenario.seed", "must be a non-negative 64-bit integer");
  }
  sc.horizon = ck.integer(j, "scenario", "horizon", true, 0).value_or(0);

  if (j.contains("config")) {
    sc.config_overrides = j.at("config");
    std::vector<std::string> errors;
    sc.config.apply_overrides(sc.config_overrides, errors);
    for (const auto& e : errors) ck.add("config", e);
  }
  for (const auto& v : sc.config.violations()) ck.add("config", v);

  if (j.contains("rule_table")) {
    try {
      sc.rule_table = rule_table_from_json(j.at("rule_table"));
    } catch (const ProtocolError& e) {
      ck.add("rule_table", e.what());
    }
  }
  if (j.contains("cost_model")) {
    try {
      if (!j.at("cost_model").is_object()) fail(ErrorCode::ValidationError, "must be an object");
      sc.cost_model = CostModel::from_json(j.at("cost_model"));
    } catch (const ProtocolError& e) {
      ck.add("cost_model", e.what());
    }
  }
  if (j.contains("agents")) check_agents(ck, j.at("agents"), sc);
  else ck.add("scenario", "missing field 'agents'");

  std::set<std::string> ids;
  for (const auto& a : sc.agents) ids.insert(a.id);

  if (j.contains("committee")) {
    const auto& c = j.at("committee");
    if (!c.is_array()) {
      ck.add("committee", "must be an array of agent ids");
    } else {
      for (const auto& id : c) {
        if (!id.is_string() || !ids.contains(id.get<std::string>())) ck.add("committee", "unknown agent " + id.dump());
        else sc.committee.push_back(id.get<std::string>());
      }
      std::set<std::string> uniq(sc.committee.begin(), sc.committee.end());
      if (uniq.size() != kCommitteeSize || sc.committee.size() != kCommitteeSize) {
        ck.add("committee", "must name exactly " + std::to_string(kCommitteeSize) + " distinct agents");
      }
    }
  }
  sc.governance_auto = ck.boolean(j, "scenario", "governance_auto").value_or(true);
  if (j.contains("carrier")) {
    const auto& c = j.at("carrier");
    if (!c.is_object()) {
      ck.add("carrier", "must be an object");
    } else {
      ck.only_fields(c, "carrier", {"auto", "transit_days", "return_days"});
      sc.carrier.automatic = ck.boolean(c, "carrier", "auto").value_or(true);
      sc.carrier.transit_days = ck.integer(c, "carrier", "transit_days", false, 0).value_or(2);
      sc.carrier.return_days = ck.integer(c, "carrier", "return_days", false, 0).value_or(2);
      if (sc.carrier.transit_days > sc.config.deadlines.B) {
        ck.add("carrier.transit_days", "must not exceed deadlines.B or every delivery times out");
      }
      if (sc.carrier.return_days > sc.config.deadlines.return_window) {
        ck.add("carrier.return_days", "must not exceed deadlines.return_window");
      }
    }
  }
  if (j.contains("market")) check_market(ck, j.at("market"), sc, ids);
  if (j.contains("script")) check_script(ck, j.at("script"), sc, ids);

  if (!ck.problems.empty()) throw ScenarioError(ErrorCode::ValidationError, ck.problems);
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(ErrorCode::ParseError, {"cannot read scenario " + path.string()});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace market
