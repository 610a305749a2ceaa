#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <sstream>

#include "market/exchange.hpp"
#include "market/simulator.hpp"
#include "market/trace.hpp"

namespace market {
namespace {

using nlohmann::json;

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      out.push_back(text.substr(pos));  // unterminated final line: caught below
      break;
    }
    out.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return out;
}

struct BadRecord {
  ErrorCode code;
  std::int64_t seq;
  std::string detail;
};

[[noreturn]] void bad(ErrorCode code, std::int64_t seq, std::string detail) {
  throw BadRecord{code, seq, std::move(detail)};
}

/// Chain and schema check. Returns the header and the event records.
std::vector<json> parse_chain(std::string_view text, json& header) {
  if (text.empty()) bad(ErrorCode::TamperedTrace, -1, "empty trace");
  const auto lines = split_lines(text);
  if (text.back() != '\n') bad(ErrorCode::TamperedTrace, static_cast<std::int64_t>(lines.size()) - 2,
                               "trace does not end with a newline");
  Digest head{};
  std::vector<json> events;
  events.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::int64_t seq = static_cast<std::int64_t>(i) - 1;
    std::string_view body, hex;
    if (!Trace::split_line(lines[i], body, hex)) bad(ErrorCode::TamperedTrace, seq, "record has no digest member");
    head = chain(head, body);
    if (to_hex(head) != hex) bad(ErrorCode::TamperedTrace, seq, "digest mismatch");
    json record;
    try {
      record = json::parse(std::string(body) + "}");
    } catch (const json::parse_error& e) {
      bad(ErrorCode::ValidationError, seq, std::string("record is not JSON: ") + e.what());
    }
    if (!record.is_object()) bad(ErrorCode::ValidationError, seq, "record is not an object");
    if (i == 0) {
      if (record.value("record", "") != "header" || record.value("trace_version", 0) != kTraceVersion ||
          record.value("hash", "") != kHashName) {
        bad(ErrorCode::ValidationError, seq, "bad header record");
      }
      header = std::move(record);
      continue;
    }
    static const std::set<std::string> kKeys{"seq", "day", "module", "kind", "payload"};
    if (record.size() != kKeys.size()) bad(ErrorCode::ValidationError, seq, "event must have exactly seq, day, module, kind, payload");
    for (const auto& k : kKeys) {
      if (!record.contains(k)) bad(ErrorCode::ValidationError, seq, "event lacks '" + k + "'");
    }
    if (!record["seq"].is_number_unsigned() || record["seq"].get<std::int64_t>() != seq) {
      bad(ErrorCode::ValidationError, seq, "sequence numbers must be dense from 0");
    }
    if (!record["day"].is_number_integer() || !record["module"].is_string() || !record["kind"].is_string() ||
        !record["payload"].is_object()) {
      bad(ErrorCode::ValidationError, seq, "event field types");
    }
    if (!events.empty() && record["day"].get<Day>() < events.back()["day"].get<Day>()) {
      bad(ErrorCode::ValidationError, seq, "day went backwards");
    }
    static const std::set<std::string> kModules{"ledger", "exchange", "reputation", "incentives",
                                                "arbitration", "governance", "harness"};
    if (!kModules.contains(record["module"].get<std::string>())) bad(ErrorCode::ValidationError, seq, "unknown module");
    events.push_back(std::move(record));
  }
  return events;
}

std::size_t tok(const json& v) {
  const auto t = parse_token(v.get<std::string>());
  if (!t) throw std::invalid_argument("bad token");
  return static_cast<std::size_t>(*t);
}

/// Re-applies ledger, exchange and governance events to a fresh shadow
/// state, checking conservation and transition legality as it goes.
class Shadow {
 public:
  void apply(const json& ev) {
    seq_ = ev["seq"].get<std::int64_t>();
    const auto& module = ev["module"].get_ref<const std::string&>();
    const auto& kind = ev["kind"].get_ref<const std::string&>();
    const auto& p = ev["payload"];
    try {
      if (module == "ledger") ledger(kind, p);
      else if (module == "exchange") exchange(kind, p);
      else if (module == "governance") governance(kind, p);
      else if (module == "harness" && kind == "conservation") checkpoint(p);
      else if (module == "harness" && kind == "aborted") violation("run aborted: " + p.value("detail", ""));
    } catch (const json::exception& e) {
      bad(ErrorCode::ValidationError, seq_, std::string("payload schema: ") + e.what());
    } catch (const std::invalid_argument& e) {
      bad(ErrorCode::ValidationError, seq_, std::string("payload schema: ") + e.what());
    }
    if (module == "ledger") check_identity();
  }

  void finish() {
    for (const auto& [sid, state] : sessions_) {
      auto e = escrows_.find(sid);
      if (is_terminal(state) && e != escrows_.end() && e->second.status == "locked") {
        seq_ = -1;
        violation("session " + std::to_string(sid) + " ended " + std::string(to_string(state)) +
                  " with its escrow still locked");
      }
    }
  }

  std::size_t sessions() const { return sessions_.size(); }
  std::size_t transitions() const { return transitions_; }

 private:
  struct Escrow {
    std::size_t token = 0;
    Amount amount = 0;
    std::string status = "locked";
  };
  using Key = std::pair<std::uint64_t, std::size_t>;

  [[noreturn]] void violation(const std::string& what) { bad(ErrorCode::InvariantViolation, seq_, what); }

  Amount& bal(std::uint64_t account, std::size_t token) {
    if (!accounts_.contains(account)) violation("unknown account " + std::to_string(account));
    return balances_[{account, token}];
  }

  void debit(std::uint64_t account, std::size_t token, Amount amount) {
    if (amount <= 0) violation("non-positive amount");
    auto& b = bal(account, token);
    if (b < amount) violation("balance of account " + std::to_string(account) + " would go negative");
    b -= amount;
    totals_[token].balances -= amount;
  }

  void credit(std::uint64_t account, std::size_t token, Amount amount) {
    if (amount < 0) violation("negative credit");
    bal(account, token) += amount;
    totals_[token].balances += amount;
  }

  void ledger(const std::string& kind, const json& p) {
    constexpr std::size_t kLZS = static_cast<std::size_t>(TokenKind::LZS);
    if (kind == "account_created") {
      accounts_.insert(p["account"].get<std::uint64_t>());
    } else if (kind == "mint") {
      const auto t = tok(p["token"]);
      const Amount a = p["amount"].get<Amount>();
      credit(p["account"].get<std::uint64_t>(), t, a);
      totals_[t].minted += a;
    } else if (kind == "burn") {
      const auto t = tok(p["token"]);
      const Amount a = p["amount"].get<Amount>();
      debit(p["account"].get<std::uint64_t>(), t, a);
      totals_[t].burned += a;
    } else if (kind == "transfer") {
      const auto t = tok(p["token"]);
      const Amount a = p["amount"].get<Amount>();
      debit(p["from"].get<std::uint64_t>(), t, a);
      credit(p["to"].get<std::uint64_t>(), t, a);
    } else if (kind == "stake_deposit") {
      const auto acct = p["account"].get<std::uint64_t>();
      const Amount a = p["amount"].get<Amount>();
      if (stakes_[acct] != 0) violation("second active stake");
      debit(acct, kLZS, a);
      stakes_[acct] = a;
      totals_[kLZS].staked += a;
    } else if (kind == "stake_withdraw" || kind == "stake_slash") {
      const auto acct = p["account"].get<std::uint64_t>();
      const Amount a = p["amount"].get<Amount>();
      if (stakes_[acct] != a) violation("stake release does not match the held stake");
      stakes_[acct] = 0;
      totals_[kLZS].staked -= a;
      if (kind == "stake_withdraw") {
        credit(acct, kLZS, a);
      } else if (p["beneficiary"].is_null()) {
        totals_[kLZS].burned += a;
      } else {
        credit(p["beneficiary"].get<std::uint64_t>(), kLZS, a);
      }
    } else if (kind == "stake_draw") {
      const auto acct = p["account"].get<std::uint64_t>();
      const Amount a = p["amount"].get<Amount>();
      if (a <= 0 || stakes_[acct] < a) violation("stake draw exceeds the stake");
      stakes_[acct] -= a;
      totals_[kLZS].staked -= a;
      credit(p["to"].get<std::uint64_t>(), kLZS, a);
    } else if (kind == "escrow_lock") {
      const auto sid = p["session"].get<std::uint64_t>();
      if (escrows_.contains(sid)) violation("second escrow for a session");
      const auto t = tok(p["token"]);
      const Amount a = p["amount"].get<Amount>();
      debit(p["buyer"].get<std::uint64_t>(), t, a);
      escrows_[sid] = Escrow{t, a, "locked"};
      totals_[t].escrow += a;
    } else if (kind == "escrow_settle") {
      const auto sid = p["session"].get<std::uint64_t>();
      auto it = escrows_.find(sid);
      if (it == escrows_.end() || it->second.status != "locked") violation("settling an escrow that is not locked");
      auto& e = it->second;
      const Amount to_seller = p["to_seller"].get<Amount>();
      const Amount to_buyer = p["to_buyer"].get<Amount>();
      if (to_seller < 0 || to_buyer < 0 || to_seller + to_buyer != e.amount) {
        violation("escrow settlement does not disburse exactly the locked amount");
      }
      if (tok(p["token"]) != e.token) violation("escrow token changed");
      e.status = p["status"].get<std::string>();
      totals_[e.token].escrow -= e.amount;
      if (to_seller) credit(p["seller"].get<std::uint64_t>(), e.token, to_seller);
      if (to_buyer) credit(p["buyer"].get<std::uint64_t>(), e.token, to_buyer);
    } else if (kind == "convert") {
      const auto acct = p["account"].get<std::uint64_t>();
      const auto from = tok(p["from"]);
      const auto to = tok(p["to"]);
      const Amount in = p["amount_in"].get<Amount>();
      const Amount out = p["amount_out"].get<Amount>();
      debit(acct, from, in);
      totals_[from].burned += in;
      credit(acct, to, out);
      totals_[to].minted += out;
    } else if (kind == "bond" || kind == "unbond") {
      const auto acct = p["account"].get<std::uint64_t>();
      const auto t = tok(p["token"]);
      const Amount a = p["amount"].get<Amount>();
      auto& held = bonds_[{acct, t}];
      if (kind == "bond") {
        debit(acct, t, a);
        held += a;
        totals_[t].staked += a;
      } else {
        if (held < a) violation("unbond exceeds the bond");
        held -= a;
        totals_[t].staked -= a;
        credit(acct, t, a);
      }
    } else if (kind == "bond_slash") {
      const auto acct = p["account"].get<std::uint64_t>();
      const auto t = tok(p["token"]);
      const Amount a = p["amount"].get<Amount>();
      auto& held = bonds_[{acct, t}];
      if (a <= 0 || held < a) violation("bond slash exceeds the bond");
      held -= a;
      totals_[t].staked -= a;
      credit(p["to"].get<std::uint64_t>(), t, a);
    }
  }

  void check_identity() {
    for (std::size_t t = 0; t < 3; ++t) {
      if (!totals_[t].conserved()) {
        violation(std::string(to_string(static_cast<TokenKind>(t))) + " conservation identity broken");
      }
    }
  }

  void checkpoint(const json& p) {
    for (auto token : kAllTokens) {
      const auto t = static_cast<std::size_t>(token);
      const auto& c = p.at(std::string(to_string(token)));
      const auto& s = totals_[t];
      if (c.at("balances") != s.balances || c.at("escrow") != s.escrow || c.at("staked") != s.staked ||
          c.at("minted") != s.minted || c.at("burned") != s.burned) {
        violation(std::string(to_string(token)) + " checkpoint disagrees with the replayed ledger");
      }
    }
  }

  void exchange(const std::string& kind, const json& p) {
    if (kind == "session_opened") {
      const auto sid = p["session"].get<std::uint64_t>();
      if (sessions_.contains(sid)) violation("session opened twice");
      sessions_[sid] = ExchangeState::Listed;
      return;
    }
    if (kind == "clawback") {
      clawed_.insert(p["session"].get<std::uint64_t>());
      return;
    }
    if (kind != "transition") return;
    ++transitions_;
    const auto sid = p["session"].get<std::uint64_t>();
    auto it = sessions_.find(sid);
    if (it == sessions_.end()) violation("transition for an unopened session");
    const auto from = parse_exchange_state(p["from"].get<std::string>());
    const auto to = parse_exchange_state(p["to"].get<std::string>());
    if (!from || !to) violation("unknown exchange state");
    if (*from != it->second) {
      violation("session " + std::to_string(sid) + " is " + std::string(to_string(it->second)) +
                ", transition claims " + std::string(to_string(*from)));
    }
    const auto* edge = find_transition(*from, *to, p["rule"].get<std::string>());
    if (!edge) violation("no edge " + p["from"].get<std::string>() + " -> " + p["to"].get<std::string>() + " via " +
                         p["rule"].get<std::string>());
    if (edge->step != p["step"].get<std::string>()) violation("step label does not match the edge");
    it->second = *to;
    // Terminal soundness: the escrow's disposition must agree with the end state.
    auto e = escrows_.find(sid);
    const std::string status = e == escrows_.end() ? "none" : e->second.status;
    if (*to == ExchangeState::Settled && status != "released-to-seller") {
      violation("session " + std::to_string(sid) + " settled with escrow " + status);
    }
    if (*to == ExchangeState::Cancelled && status != "none" && status != "refunded-to-buyer" &&
        !(status == "released-to-seller" && clawed_.contains(sid))) {
      violation("session " + std::to_string(sid) + " cancelled with escrow " + status);
    }
  }

  void governance(const std::string& kind, const json& p) {
    if (kind == "proposal_created") {
      proposals_[p["proposal"].get<std::uint64_t>()] = "created";
      return;
    }
    if (kind != "proposal_state") return;
    static const std::set<std::pair<std::string, std::string>> kLegal{
        {"created", "active"},    {"active", "approved"},  {"active", "rejected"}, {"approved", "vetoed"},
        {"approved", "queued"},   {"approved", "rejected"}, {"queued", "executed"}, {"queued", "failed"},
        {"active", "failed"}};
    const auto id = p["proposal"].get<std::uint64_t>();
    auto it = proposals_.find(id);
    if (it == proposals_.end()) violation("state change for an unknown proposal");
    const auto from = p["from"].get<std::string>();
    const auto to = p["to"].get<std::string>();
    if (from != it->second) violation("proposal " + std::to_string(id) + " is " + it->second + ", event claims " + from);
    if (!kLegal.contains({from, to})) violation("illegal proposal transition " + from + " -> " + to);
    it->second = to;
  }

  std::int64_t seq_ = 0;
  std::set<std::uint64_t> accounts_;
  std::map<Key, Amount> balances_;
  std::map<Key, Amount> bonds_;
  std::map<std::uint64_t, Amount> stakes_;
  std::map<std::uint64_t, Escrow> escrows_;
  std::array<TokenTotals, 3> totals_{};
  std::map<std::uint64_t, ExchangeState> sessions_;
  std::set<std::uint64_t> clawed_;
  std::map<std::uint64_t, std::string> proposals_;
  std::size_t transitions_ = 0;
};

}  // namespace

json VerifyReport::to_json() const {
  json j = {{"ok", ok},
            {"events", events},
            {"sessions", sessions},
            {"transitions", transitions},
            {"replayed", replayed}};
  if (code) j["error"] = std::string(to_string(*code));
  if (bad_seq) j["seq"] = *bad_seq;
  if (!detail.empty()) j["detail"] = detail;
  return j;
}

std::vector<json> read_trace_events(std::string_view text, json* header) {
  json h;
  try {
    auto events = parse_chain(text, h);
    if (header) *header = std::move(h);
    return events;
  } catch (const BadRecord& b) {
    fail(b.code, (b.seq < 0 ? std::string("header") : "event " + std::to_string(b.seq)) + ": " + b.detail);
  }
}

VerifyReport verify_trace(std::string_view text, bool replay) {
  VerifyReport r;
  try {
    json header;
    const auto events = parse_chain(text, header);
    r.events = events.size();
    Shadow shadow;
    for (const auto& ev : events) shadow.apply(ev);
    shadow.finish();
    r.sessions = shadow.sessions();
    r.transitions = shadow.transitions();
    if (replay && header.contains("scenario_text")) {
      Scenario sc;
      try {
        sc = parse_scenario(header["scenario_text"].get<std::string>());
      } catch (const ProtocolError& e) {
        bad(ErrorCode::ValidationError, -1, std::string("embedded scenario: ") + e.what());
      }
      if (!header["seed"].is_number_unsigned()) bad(ErrorCode::ValidationError, -1, "header seed");
      const auto rerun = run_scenario(sc, header["seed"].get<std::uint64_t>());
      if (rerun.trace_text != text) {
        const auto a = split_lines(text);
        const auto b = split_lines(rerun.trace_text);
        std::size_t i = 0;
        while (i < a.size() && i < b.size() && a[i] == b[i]) ++i;
        bad(ErrorCode::TamperedTrace, static_cast<std::int64_t>(i) - 1, "replay on a fresh engine diverges here");
      }
      r.replayed = true;
    }
    r.ok = true;
  } catch (const BadRecord& b) {
    r.ok = false;
    r.code = b.code;
    r.bad_seq = b.seq;
    r.detail = b.detail;
  }
  return r;
}

json trace_report(const std::vector<json>& events, bool governance) {
  std::map<std::uint64_t, std::string> state;
  std::map<std::uint64_t, std::string> outcome;
  std::map<std::string, std::int64_t> steps;
  std::map<std::uint64_t, json> cases;
  Amount lzsp_rewards = 0;
  std::map<std::uint64_t, std::int64_t> reputation;
  std::map<std::uint64_t, json> proposals;
  std::int64_t rejected = 0;
  json summary;

  for (const auto& ev : events) {
    const auto& m = ev["module"].get_ref<const std::string&>();
    const auto& k = ev["kind"].get_ref<const std::string&>();
    const auto& p = ev["payload"];
    if (m == "exchange" && k == "transition") {
      state[p["session"].get<std::uint64_t>()] = p["to"].get<std::string>();
      steps[p["step"].get<std::string>()]++;
    } else if (m == "exchange" && k == "listed") {
      steps["1"]++;
    } else if (m == "incentives" && k == "rewards_granted") {
      outcome[p["session"].get<std::uint64_t>()] = p["outcome"].get<std::string>();
      for (const auto& x : p["mints"]) lzsp_rewards += x["amount"].get<Amount>();
    } else if (m == "arbitration" && k == "case_opened") {
      cases[p["case"].get<std::uint64_t>()] = {{"session", p["session"]}, {"tier", p["tier"]},
                                              {"route_basis", p["route_basis"]}, {"value_usd", p["value_usd"]}};
    } else if (m == "arbitration" && k == "fallback_internal") {
      cases[p["case"].get<std::uint64_t>()]["tier"] = "internal";
      cases[p["case"].get<std::uint64_t>()]["fallback"] = true;
    } else if (m == "arbitration" && k == "ruling_executed") {
      auto& c = cases[p["case"].get<std::uint64_t>()];
      c["winner"] = p["winner"];
      c["rounds"] = p["rounds"];
      c["closed_by"] = p["closed_by"];
    } else if (m == "reputation" && k == "init") {
      reputation[p["account"].get<std::uint64_t>()] = p["value"].get<std::int64_t>();
    } else if (m == "reputation" && k == "change") {
      reputation[p["account"].get<std::uint64_t>()] = p["after"].get<std::int64_t>();
    } else if (m == "governance" && k == "proposal_created") {
      proposals[p["proposal"].get<std::uint64_t>()] = {{"proposal", p["proposal"]},
                                                       {"level", p["level"]},
                                                       {"proposer", p["proposer"]},
                                                       {"created", ev["day"]},
                                                       {"closes", p["closes"]},
                                                       {"up", 0},
                                                       {"down", 0},
                                                       {"voters", 0},
                                                       {"history", json::array({{{"day", ev["day"]}, {"state", "created"}}})},
                                                       {"state", "created"}};
    } else if (m == "governance" && k == "vote") {
      auto& pr = proposals[p["proposal"].get<std::uint64_t>()];
      const std::string dir = p.value("direction", "up");
      pr[dir] = pr[dir].get<Amount>() + p.value("weight", Amount{0});
      pr["voters"] = pr["voters"].get<std::int64_t>() + 1;
    } else if (m == "governance" && k == "proposal_state") {
      auto& pr = proposals[p["proposal"].get<std::uint64_t>()];
      pr["state"] = p["to"];
      pr["history"].push_back({{"day", ev["day"]}, {"state", p["to"]}});
    } else if (m == "governance" && k == "committee_decision") {
      auto& pr = proposals[p["proposal"].get<std::uint64_t>()];
      pr["committee"].push_back(p);
    } else if (m == "harness" && k == "rejected") {
      ++rejected;
    } else if (m == "harness" && k == "summary") {
      summary = p;
    }
  }

  json by_state = json::object();
  for (const auto& [sid, s] : state) by_state[s] = by_state.value(s, 0) + 1;
  json by_outcome = json::object();
  for (const auto& [sid, o] : outcome) by_outcome[o] = by_outcome.value(o, 0) + 1;
  json tiers = {{"internal", 0}, {"external", 0}};
  json winners = {{"buyer", 0}, {"seller", 0}, {"open", 0}};
  for (const auto& [cid, c] : cases) {
    const std::string tier = c.value("tier", "internal");
    tiers[tier] = tiers[tier].get<int>() + 1;
    const std::string w = c.contains("winner") ? c["winner"].get<std::string>() : "open";
    winners[w] = winners[w].get<int>() + 1;
  }
  std::array<std::int64_t, 11> deciles{};
  for (const auto& [acct, v] : reputation) deciles[static_cast<std::size_t>(std::clamp<std::int64_t>(v, 0, 100) / 10)]++;
  json step_counts = json::object();
  for (const auto& s : all_step_labels()) step_counts[s] = steps.contains(s) ? steps.at(s) : 0;

  json report = {{"events", events.size()},
                 {"sessions", state.size()},
                 {"by_state", by_state},
                 {"rewarded_outcomes", by_outcome},
                 {"steps", step_counts},
                 {"disputes", {{"cases", cases.size()}, {"tiers", tiers}, {"by_winner", winners}}},
                 {"lzsp_minted_rewards", lzsp_rewards},
                 {"reputation_deciles", deciles},
                 {"rejected_ops", rejected}};
  if (!summary.is_null()) report["summary"] = summary;
  if (governance) {
    json table = json::array();
    for (auto& [id, pr] : proposals) table.push_back(pr);
    report["proposals"] = table;
  }
  return report;
}

std::string render_report_text(const json& r) {
  std::ostringstream os;
  os << "events: " << r["events"] << "  sessions: " << r["sessions"] << "  rejected ops: " << r["rejected_ops"] << "\n";
  os << "\nsessions by final state\n";
  for (const auto& [k, v] : r["by_state"].items()) os << "  " << k << ": " << v << "\n";
  if (r.contains("summary")) {
    os << "\nsessions by outcome\n";
    for (const auto& [k, v] : r["summary"]["by_outcome"].items()) os << "  " << k << ": " << v << "\n";
  }
  os << "\ndisputes: " << r["disputes"]["cases"] << "  internal " << r["disputes"]["tiers"]["internal"] << ", external "
     << r["disputes"]["tiers"]["external"] << "  won by buyer " << r["disputes"]["by_winner"]["buyer"] << ", seller "
     << r["disputes"]["by_winner"]["seller"] << "\n";
  os << "LZSP minted as rewards: " << r["lzsp_minted_rewards"] << " micro-units\n";
  os << "reputation deciles (0-9, 10-19, ..., 100): " << r["reputation_deciles"].dump() << "\n";
  os << "\nflowchart step coverage\n";
  for (const auto& [k, v] : r["steps"].items()) os << "  [" << k << "] " << v << "\n";
  if (r.contains("proposals")) {
    os << "\nproposals\n";
    os << "  id  level       created  closes  up            down          final      path\n";
    for (const auto& p : r["proposals"]) {
      std::string path;
      for (const auto& h : p["history"]) {
        if (!path.empty()) path += " > ";
        path += h["state"].get<std::string>() + "@" + std::to_string(h["day"].get<Day>());
      }
      char line[200];
      std::snprintf(line, sizeof line, "  %-3llu %-11s %-8lld %-7lld %-13lld %-13lld %-10s ",
                    static_cast<unsigned long long>(p["proposal"].get<std::uint64_t>()),
                    p["level"].get<std::string>().c_str(), static_cast<long long>(p["created"].get<Day>()),
                    static_cast<long long>(p["closes"].get<Day>()), static_cast<long long>(p["up"].get<Amount>()),
                    static_cast<long long>(p["down"].get<Amount>()), p["state"].get<std::string>().c_str());
      os << line << path << "\n";
    }
  }
  return os.str();
}

}  // namespace market
