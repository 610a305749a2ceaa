// Acceptance checks: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "market/analytics.hpp"
#include "market/engine.hpp"
#include "market/payoff.hpp"
#include "market/rng.hpp"
#include "market/simulator.hpp"

using namespace market;

namespace {

struct Verdict {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::vector<std::filesystem::path> corpus() {
  std::vector<std::filesystem::path> out;
  for (const auto& f : std::filesystem::directory_iterator(std::filesystem::path(MARKET_SOURCE_DIR) / "scenarios")) {
    if (f.path().extension() == ".json") out.push_back(f.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::map<std::string, RunResult>& runs() {
  static std::map<std::string, RunResult> cache;
  if (cache.empty()) {
    for (const auto& f : corpus()) cache.emplace(f.stem().string(), run_scenario(load_scenario(f)));
  }
  return cache;
}

// 1. Honest play is the unique strict equilibrium and the social optimum.
Verdict c1() {
  Verdict o;
  const auto m = build_payoff_matrix(PayoffParams{});
  const auto ne = find_nash_equilibria(m);
  o.require(ne.size() == 1 && ne[0].profile == Profile{} && ne[0].strict, "defaults: honest is not the unique strict NE");
  o.require(is_social_optimum(Profile{}, m), "defaults: honest is not the social optimum");
  Rng rng(2025);
  const auto t0 = std::chrono::steady_clock::now();
  int checked = 0, optimum = 0;
  for (int i = 0; i < 10000; ++i) {
    PayoffParams p{1e-3 + 1000 * rng.unit(), 1e-3 + 100 * rng.unit(), 100 * rng.unit(), 1e-3 + 1000 * rng.unit(),
                   1e-3 + 1000 * rng.unit(), 1e-3 + 100 * rng.unit(), true};
    const auto mm = build_payoff_matrix(p);
    const auto e = find_nash_equilibria(mm);
    const bool good = e.size() == 1 && e[0].profile == Profile{} && e[0].strict;
    o.require(good, "random parameter set " + std::to_string(i) + " breaks the claim: " + p.to_json().dump());
    optimum += is_social_optimum(Profile{}, mm);
    ++checked;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(secs < 1.0, "sweep took " + std::to_string(secs) + " s");
  if (o.ok) {
    o.detail = std::to_string(checked) + " parameter sets in " + std::to_string(secs) + " s; honest also maximizes welfare in " +
               std::to_string(optimum);
  }
  return o;
}

// 2. Exponential value model: median ln2/lambda, P(v < mean) = 1 - 1/e.
Verdict c2() {
  Verdict o;
  for (double lambda : {0.005, 0.02, 0.5, 3.0}) {
    const auto s = exp_stats(lambda);
    o.require(std::fabs(s.median * lambda - std::log(2.0)) < 1e-12, "median");
    o.require(std::fabs(s.mean * lambda - 1.0) < 1e-12, "mean");
    o.require(std::fabs(s.frac_below_mean - (1 - std::exp(-1.0))) < 1e-12, "fraction below mean");
  }
  const double lambda = 0.02;
  const auto xs = sample_values(ExpModel{lambda}, 1'000'000, 77);
  std::size_t below = 0;
  for (double x : xs) below += x < 1 / lambda;
  const double frac = static_cast<double>(below) / xs.size();
  o.require(std::fabs(frac - (1 - std::exp(-1.0))) <= 0.002, "Monte Carlo fraction " + std::to_string(frac));
  if (o.ok) o.detail = "Monte Carlo fraction below mean " + std::to_string(frac);
  return o;
}

// 3. The corpus covers every step label; every trace conserves value and
//    ends sessions soundly.
Verdict c3() {
  Verdict o;
  std::set<std::string> seen;
  for (const auto& [name, run] : runs()) {
    o.require(!run.aborted, name + " aborted: " + run.abort_reason);
    const auto v = verify_trace(run.trace_text, false);
    o.require(v.ok, name + ": " + v.detail);
    for (const auto& e : read_trace_events(run.trace_text)) {
      if (e["module"] != "exchange") continue;
      if (e["kind"] == "listed") seen.insert("1");
      if (e["kind"] == "transition") seen.insert(e["payload"]["step"].get<std::string>());
    }
  }
  for (const auto& label : all_step_labels()) o.require(seen.contains(label), "step " + label + " never exercised");
  if (o.ok) o.detail = std::to_string(all_step_labels().size()) + " step labels over " + std::to_string(runs().size()) + " scenarios";
  return o;
}

// 4. Appeal rounds grow as n_{k+1} = 2 n_k + 1.
Verdict c4() {
  Verdict o;
  const std::int64_t want[] = {3, 7, 15, 31, 63};
  for (int k = 0; k < 5; ++k) o.require(jurors_for_round(3, k) == want[k], "round " + std::to_string(k));
  for (std::int64_t n0 = 1; n0 <= 9; n0 += 2) {
    for (int k = 0; k <= 10; ++k) {
      o.require(jurors_for_round(n0, k) == (n0 + 1) * (std::int64_t{1} << k) - 1, "closed form");
    }
  }
  // The appeal scenario must actually seat 3, 7 and 15 jurors.
  std::vector<std::int64_t> seats;
  for (const auto& e : read_trace_events(runs().at("appeal-ladder").trace_text)) {
    if (e["kind"] == "round_opened") seats.push_back(e["payload"]["jurors"].size());
  }
  o.require(seats == std::vector<std::int64_t>{3, 7, 15}, "appeal-ladder rounds");
  if (o.ok) o.detail = "3, 7, 15, 31, 63; closed form to k = 10; appeal-ladder seats 3/7/15";
  return o;
}

// 5. Sortition frequency follows stake; zero stake is never drawn.
Verdict c5() {
  Verdict o;
  const std::vector<Candidate> pool{{AccountId{1}, 10}, {AccountId{2}, 5}, {AccountId{3}, 0}};
  std::map<AccountId, int> hits;
  const int n = 100000;
  for (int i = 0; i < n; ++i) hits[draw_jurors(pool, 1, splitmix64(static_cast<std::uint64_t>(i)))[0]]++;
  o.require(hits[AccountId{3}] == 0, "zero-stake candidate drawn");
  std::string obs;
  for (auto [id, p] : {std::pair{AccountId{1}, 10.0 / 15}, {AccountId{2}, 5.0 / 15}}) {
    const double sigma = std::sqrt(n * p * (1 - p));
    o.require(std::fabs(hits[id] - n * p) <= 4 * sigma, "frequency of candidate " + std::to_string(raw(id)));
    obs += std::to_string(hits[id]) + " ";
  }
  if (o.ok) o.detail = "counts " + obs + "vs expected 66667 33333, zero-stake 0";
  return o;
}

// 6. Commit-reveal binds vote, salt and juror.
Verdict c6() {
  Verdict o;
  Rng rng(6);
  int rejected = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vote v = rng.chance(0.5) ? Vote::for_claimant : Vote::for_respondent;
    const Salt salt = rng.bytes16();
    const AccountId juror{1 + rng.below(1'000'000)};
    const Digest c = commitment(v, salt, juror);
    o.require(commitment(v, salt, juror) == c, "honest reveal rejected");
    Salt s2 = salt;
    s2[rng.below(16)] ^= static_cast<std::uint8_t>(1 + rng.below(255));
    const Vote flipped = v == Vote::for_claimant ? Vote::for_respondent : Vote::for_claimant;
    const bool caught = commitment(flipped, salt, juror) != c && commitment(v, s2, juror) != c &&
                        commitment(v, salt, AccountId{raw(juror) + 1}) != c;
    o.require(caught, "mutated reveal accepted");
    rejected += caught ? 3 : 0;
  }
  if (o.ok) o.detail = "10000 honest reveals accepted, " + std::to_string(rejected) + " mutated rejected";
  return o;
}

// 7. Committee rule over all 3^5 signature assignments.
Verdict c7() {
  Verdict o;
  int approvals = 0;
  for (int code = 0; code < 243; ++code) {
    int c = code, cast = 0, yes = 0;
    for (int m = 0; m < 5; ++m, c /= 3) {
      if (c % 3 != 2) ++cast;  // 0 yes, 1 no, 2 absent
      if (c % 3 == 0) ++yes;
    }
    const bool oracle = 5 * cast >= 4 * 5 && 2 * yes >= cast;
    o.require(committee_approves(cast, yes, false) == oracle, "assignment " + std::to_string(code));
    approvals += oracle;
  }
  // Same through the engine: a veto decision against a live proposal.
  for (int code = 0; code < 243; ++code) {
    Engine e(EngineConfig{}, 1);
    std::vector<AccountId> m;
    for (int i = 0; i < 6; ++i) {
      m.push_back(e.ledger.create_account(AccountKind::neutral));
      e.reputation.init(m.back());
      e.ledger.mint(Caller::genesis, m.back(), TokenKind::LZSP, tokens(500), "genesis");
      e.governance.found_member(m.back());
    }
    e.governance.set_committee({m[0], m[1], m[2], m[3], m[4]});
    e.governance.set_auto_advance(false);
    const auto id = e.governance.submit_proposal(m[5], ProposalLevel::low_medium,
                                                 ProposalPayload::set_key("deadlines.C", 8, "probe"));
    std::map<AccountId, Signature> sigs;
    int c = code, cast = 0, yes = 0;
    for (int i = 0; i < 5; ++i, c /= 3) {
      sigs[m[i]] = static_cast<Signature>(c % 3);
      if (c % 3 != 2) ++cast;
      if (c % 3 == 0) ++yes;
    }
    const bool oracle = 5 * cast >= 20 && 2 * yes >= cast;
    o.require(e.governance.committee_decide(DecisionKind::miscategorized, id, sigs) == oracle,
              "engine decision for assignment " + std::to_string(code));
  }
  if (o.ok) o.detail = "243 assignments, " + std::to_string(approvals) + " approve (pure rule and engine)";
  return o;
}

// 8. Randomized governance: every proposal moves only along legal edges,
//    voting closes at +7 / +30 days, config changes only on execution.
Verdict c8() {
  Verdict o;
  static const std::set<std::pair<std::string, std::string>> legal{
      {"created", "active"}, {"active", "approved"}, {"active", "rejected"}, {"approved", "vetoed"},
      {"approved", "queued"}, {"approved", "rejected"}, {"queued", "executed"}, {"queued", "failed"}};
  const std::vector<std::string> keys{"deadlines.C", "deadlines.D", "market.listing_floor_usd",
                                      "arbitration.fee_per_juror", "deadlines.B_prime"};
  Rng rng(8);
  std::size_t proposals = 0, executed = 0;
  for (int seq = 0; seq < 1000 && o.ok; ++seq) {
    Engine e(EngineConfig{}, static_cast<std::uint64_t>(seq));
    std::vector<AccountId> acct;
    for (int i = 0; i < 8; ++i) {
      acct.push_back(e.ledger.create_account(AccountKind::neutral));
      e.reputation.init(acct.back());
      e.ledger.mint(Caller::genesis, acct.back(), TokenKind::LZSP, tokens(50 + 100 * static_cast<int>(rng.below(10))),
                    "genesis");
      if (i < 6) e.governance.found_member(acct.back());
    }
    e.governance.set_committee({acct[0], acct[1], acct[2], acct[3], acct[4]});
    std::size_t cursor = 0;
    Day day = 0;
    for (int step = 0; step < 40; ++step) {
      const auto before = e.config.to_json();
      const std::size_t mark = e.trace.events().size();
      try {
        const auto who = acct[rng.below(acct.size())];
        switch (rng.below(6)) {
          case 0: {
            const auto level = rng.chance(0.3) ? ProposalLevel::high : ProposalLevel::low_medium;
            const auto& key = keys[rng.below(keys.size())];
            e.governance.submit_proposal(who, level,
                                         ProposalPayload::set_key(key, static_cast<std::int64_t>(1 + rng.below(40)), "r"));
            break;
          }
          case 1:
          case 2:
            if (!e.governance.proposals().empty()) {
              const ProposalId id{1 + rng.below(e.governance.proposals().size())};
              e.governance.vote(who, id, rng.chance(0.7) ? Direction::up : Direction::down);
            }
            break;
          case 3:
            if (!e.governance.proposals().empty()) {
              const ProposalId id{1 + rng.below(e.governance.proposals().size())};
              std::map<AccountId, Signature> sigs;
              for (int i = 0; i < 5; ++i) sigs[acct[i]] = static_cast<Signature>(rng.below(3));
              e.governance.committee_decide(static_cast<DecisionKind>(rng.below(3)), id, sigs);
            }
            break;
          case 4:
            if (rng.chance(0.5)) e.governance.delegate(who, acct[rng.below(6)]);
            else e.governance.undelegate(who);
            break;
          default:
            day += static_cast<Day>(rng.below(9));
            e.begin_day(day);
            break;
        }
      } catch (const ProtocolError&) {
      }
      bool executed_now = false;
      for (std::size_t i = mark; i < e.trace.events().size(); ++i) {
        const auto& ev = e.trace.events()[i];
        if (ev.kind == "proposal_state" && ev.payload["to"] == "executed") executed_now = true;
      }
      o.require(e.config.to_json() == before || executed_now, "config changed without an execution");
      for (; cursor < e.trace.events().size(); ++cursor) {
        const auto& ev = e.trace.events()[cursor];
        if (ev.module != "governance" || ev.kind != "proposal_state") continue;
        const std::pair<std::string, std::string> edge{ev.payload["from"], ev.payload["to"]};
        o.require(legal.contains(edge), "illegal edge " + edge.first + " -> " + edge.second);
        executed += edge.second == "executed";
      }
    }
    for (const auto& [id, p] : e.governance.proposals()) {
      const Day window = p.level == ProposalLevel::high ? 30 : 7;
      o.require(p.closes == p.created + window, "closing day");
      ++proposals;
    }
    o.require(e.ledger.conservation_report()[1].conserved(), "LZSP conservation");
  }
  o.require(executed > 0, "no proposal ever executed; the sweep is vacuous");
  if (o.ok) o.detail = "1000 sequences, " + std::to_string(proposals) + " proposals, " + std::to_string(executed) + " executed";
  return o;
}

// 9. Reputation stays in [0, 100]; fresh accounts read 50.
Verdict c9() {
  Verdict o;
  EngineConfig cfg;
  Trace trace;
  ReputationBook book(trace, cfg);
  Rng rng(9);
  std::vector<AccountId> ids;
  for (std::uint64_t i = 1; i <= 50; ++i) {
    ids.push_back(AccountId{i});
    o.require(book.init(ids.back()).value == 50, "fresh account");
  }
  for (std::uint64_t s = 0; s < 200000; ++s) {
    const auto a = ids[rng.below(25)];
    const auto b = ids[25 + rng.below(25)];
    if (rng.chance(0.4)) {
      book.penalize(rng.chance(0.5) ? Caller::exchange : Caller::arbitration, a, "fuzz",
                    static_cast<std::int64_t>(rng.below(200)));
    } else {
      book.apply_feedback(Feedback{b, a, rng.chance(0.5) ? Polarity::good : Polarity::bad, {}, SessionId{s}},
                          SessionParties{a, b, true});
    }
    const auto v = book.score(a);
    o.require(v >= 0 && v <= 100, "score out of range");
  }
  for (auto id : ids) o.require(book.replay(id) == book.score(id), "replay disagrees");
  if (o.ok) o.detail = "200000 random updates over 50 accounts";
  return o;
}

// 10. Reruns are byte-identical; every single-byte change is detected.
Verdict c10() {
  Verdict o;
  for (const auto& f : corpus()) {
    const auto again = run_scenario(load_scenario(f));
    o.require(again.trace_text == runs().at(f.stem().string()).trace_text, f.stem().string() + " rerun differs");
  }
  const std::string tiny = R"({
  "name": "one-exchange", "seed": 5, "horizon": 20,
  "agents": [
    {"id": "s", "role": "seller", "balances": {"LZS": 600}, "stake": 500},
    {"id": "b", "role": "buyer", "balances": {"LZS": 100}}
  ],
  "market": {"exchanges": 1, "value_model": {"fixed": 30}, "sellers": ["s"], "buyers": ["b"]}
})";
  const auto run = run_scenario(parse_scenario(tiny));
  const auto& text = run.trace_text;
  o.require(verify_trace(text, true).ok, "tiny trace does not verify");
  std::size_t caught = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    std::string bad = text;
    bad[i] = static_cast<char>(static_cast<unsigned char>(bad[i]) ^ (1u << (i % 8)));
    if (!verify_trace(bad, false).ok) ++caught;
    else o.require(false, "mutation at byte " + std::to_string(i) + " undetected");
  }
  if (o.ok) {
    o.detail = std::to_string(corpus().size()) + " scenarios rerun identically; " + std::to_string(caught) + "/" +
               std::to_string(text.size()) + " single-byte mutations detected";
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"honest play is the unique strict equilibrium (social optimum at defaults)", c1},
      {"exponential value statistics", c2},
      {"corpus step coverage, conservation, terminal soundness", c3},
      {"appeal round sizes", c4},
      {"stake-weighted sortition", c5},
      {"commit-reveal binding", c6},
      {"committee approval rule", c7},
      {"governance lifecycle under random sequences", c8},
      {"reputation bounds", c9},
      {"determinism and tamper evidence", c10},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %zu: %s (%s)\n", o.ok ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.ok;
  }
  return failed == 0 ? 0 : 1;
}
