#include "market/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "market/engine.hpp"
#include "market/rng.hpp"

namespace market {
namespace {

using S = ExchangeState;

/// Per-session facts the harness keeps beside the engine: the concrete
/// behaviour each side plays, and physical facts the protocol cannot see.
struct SessionPlan {
  StrategyKind buyer = StrategyKind::honest;
  StrategyKind seller = StrategyKind::honest;
  bool opt_external = false;
  bool wrong_item = false;    // the package does not match the listing
  bool buyer_has_qr = false;  // the nonce reached the buyer outside the package
  bool queried = false;
  bool feedback_done = false;
};

struct BallotSecret {
  Vote vote = Vote::for_claimant;
  Salt salt{};
  bool revealed = false;
};

class Simulator {
 public:
  Simulator(const Scenario& sc, std::uint64_t seed)
      : sc_(sc),
        seed_(seed),
        engine_(sc.config, seed, header(sc, seed)),
        mixed_rng_(substream(seed, "mixed-strategy")),
        salt_rng_(substream(seed, "juror-salt")) {}

  RunResult run() {
    RunResult result;
    try {
      genesis();
      prepare_market();
      std::size_t next_script = 0;
      std::size_t next_market = 0;
      for (Day day = 0; day <= sc_.horizon; ++day) {
        engine_.begin_day(day);
        carrier(day);
        while (next_market < market_.size() && market_[next_market].day == day) generate(next_market++);
        while (next_script < sc_.script.size() && sc_.script[next_script].day == day) {
          execute(sc_.script[next_script++]);
          engine_.governance.refresh_membership();
        }
        agents(day);
        engine_.governance.refresh_membership();
        engine_.checkpoint();
      }
      result.summary = summary();
      engine_.trace.emit("harness", "summary", result.summary);
    } catch (const ProtocolError& e) {
      abort(result, e.what());
    } catch (const std::exception& e) {
      abort(result, std::string("unexpected: ") + e.what());
    }
    result.trace_text = engine_.trace.serialize();
    result.expectation_failures = expectation_failures_;
    result.rejected_ops = rejected_;
    return result;
  }

 private:
  static json header(const Scenario& sc, std::uint64_t seed) {
    return {{"generator", "marketsim"},
            {"scenario", sc.name},
            {"seed", seed},
            {"scenario_sha256", to_hex(sha256(sc.source_text))},
            {"scenario_text", sc.source_text}};
  }

  void abort(RunResult& result, const std::string& why) {
    result.aborted = true;
    result.abort_reason = why;
    engine_.trace.emit("harness", "aborted", {{"detail", why}});
  }

  // ---- setup ---------------------------------------------------------------

  void genesis() {
    auto& eng = engine_;
    eng.trace.set_day(0);
    if (sc_.rule_table) eng.arbitration.set_rule_table(*sc_.rule_table);
    eng.governance.set_auto_advance(sc_.governance_auto);
    for (const auto& a : sc_.agents) {
      const auto kind = a.role == "buyer" ? AccountKind::buyer
                        : a.role == "seller" ? AccountKind::seller
                                             : AccountKind::neutral;
      const AccountId id = eng.ledger.create_account(kind, a.id);
      ids_[a.id] = id;
      spec_[id] = &a;
      eng.reputation.init(id);
      for (const auto& [token, amount] : a.balances) {
        if (amount > 0) eng.ledger.mint(Caller::genesis, id, token, amount, "genesis");
      }
      if (a.payout) eng.ledger.set_payout_preference(id, a.payout);
      if (a.stake > 0) eng.ledger.stake_deposit(id, a.stake, eng.config.ledger.stake_duration);
      if (a.court_stake > 0) eng.arbitration.join_pool(id, a.court_stake);
      if (a.founding) eng.governance.found_member(id);
    }
    if (!sc_.committee.empty()) {
      std::vector<AccountId> members;
      for (const auto& c : sc_.committee) members.push_back(ids_.at(c));
      eng.governance.set_committee(members);
    }
    eng.governance.refresh_membership();
  }

  struct Generated {
    Day day = 0;
    std::int64_t index = 0;
    double value_usd = 0;
  };

  void prepare_market() {
    if (!sc_.market) return;
    const auto& m = *sc_.market;
    std::vector<double> values;
    if (m.value_model) {
      values = sample_values(*m.value_model, static_cast<std::size_t>(m.exchanges), derive_seed(seed_, "market-gen"));
    } else {
      values.assign(static_cast<std::size_t>(m.exchanges), m.fixed_value_usd);
    }
    for (std::int64_t i = 0; i < m.exchanges; ++i) {
      market_.push_back({m.start_day + i / m.per_day, i, values[static_cast<std::size_t>(i)]});
    }
  }

  Amount price_for(double usd, TokenKind token) const {
    const Amount usd_micro = std::llround(usd * static_cast<double>(kMicro));
    const auto& c = engine_.config;
    const Amount lzs = c.market.usd_per_lzs.inverse().apply(usd_micro);
    return token == TokenKind::LZS ? lzs : c.ledger.lzs_per_lzdc.inverse().apply(lzs);
  }

  void generate(std::size_t k) {
    const auto& m = *sc_.market;
    const auto& g = market_[k];
    const auto seller_name = m.sellers[static_cast<std::size_t>(g.index) % m.sellers.size()];
    const auto buyer_name = m.buyers[static_cast<std::size_t>(g.index) % m.buyers.size()];
    std::optional<Strategy> buyer_override, seller_override;
    for (const auto& d : m.deviations) {
      if (!d.applies(g.index)) continue;
      if (d.buyer) buyer_override = d.buyer;
      if (d.seller) seller_override = d.seller;
    }
    const json args = {{"op", "market"}, {"index", g.index}, {"value_usd", g.value_usd}};
    attempt(args, [&] {
      const auto& listing = engine_.exchange.list_item(ids_.at(seller_name), "item-" + std::to_string(g.index),
                                                       price_for(g.value_usd, m.token), m.token, m.category);
      const SessionId sid = engine_.exchange.request_purchase(ids_.at(buyer_name), listing.id);
      open_plan(sid, buyer_override, seller_override, m.opt_external);
    });
  }

  StrategyKind resolve(const Strategy& s, Party side) {
    if (s.kind != StrategyKind::mixed) return s.kind;
    const bool honest = mixed_rng_.unit() < s.p_honest;
    if (honest) return StrategyKind::honest;
    StrategyKind alt = s.alternative;
    if (alt == StrategyKind::honest) alt = side == Party::buyer ? StrategyKind::false_claim : StrategyKind::no_ship;
    // A seller deviation means nothing in the buyer seat and vice versa.
    if (side == Party::buyer && !buyer_deviation(alt)) return StrategyKind::honest;
    if (side == Party::seller && !seller_deviation(alt)) return StrategyKind::honest;
    return alt;
  }

  void open_plan(SessionId sid, const std::optional<Strategy>& buyer, const std::optional<Strategy>& seller,
                 bool opt_external) {
    const auto& s = engine_.exchange.session(sid);
    SessionPlan plan;
    plan.opt_external = opt_external;
    plan.buyer = resolve(buyer.value_or(spec_.at(s.buyer)->strategy), Party::buyer);
    plan.seller = resolve(seller.value_or(spec_.at(s.seller)->strategy), Party::seller);
    engine_.trace.emit("harness", "plan",
                       {{"session", raw(sid)},
                        {"buyer_strategy", strategy_name(plan.buyer)},
                        {"seller_strategy", strategy_name(plan.seller)}});
    plans_[sid] = plan;
  }

  // ---- carrier ---------------------------------------------------------------

  void carrier(Day day) {
    if (!sc_.carrier.automatic) return;
    for (const auto& [sid, s] : engine_.exchange.sessions()) {
      if (s.state != S::InTransit || !s.anchors.T1) continue;
      if (day < *s.anchors.T1 + sc_.carrier.transit_days) continue;
      const auto id = sid;
      attempt({{"op", "carrier-deliver"}, {"session", raw(id)}}, [&] { engine_.exchange.mark_delivered(id); });
    }
  }

  // ---- script ----------------------------------------------------------------

  template <typename Fn>
  bool attempt(const json& what, Fn&& fn, std::optional<std::string> expect = std::nullopt, std::size_t index = 0) {
    std::string outcome = "ok";
    std::string detail;
    try {
      fn();
    } catch (const ProtocolError& e) {
      if (e.code() == ErrorCode::InvariantViolation) throw;
      outcome = std::string(to_string(e.code()));
      detail = e.what();
    }
    if (outcome != "ok") {
      ++rejected_;
      json payload = what;
      payload["code"] = outcome;
      payload["detail"] = detail;
      engine_.trace.emit("harness", "rejected", std::move(payload));
    }
    if (expect && *expect != outcome) {
      const std::string msg = "script[" + std::to_string(index) + "] " + what.value("op", "?") + " expected " +
                              *expect + ", got " + outcome;
      expectation_failures_.push_back(msg);
      engine_.trace.emit("harness", "expectation_failed", {{"index", index}, {"expected", *expect}, {"got", outcome}});
    }
    return outcome == "ok";
  }

  AccountId who(const json& e, const char* key) const { return ids_.at(e.at(key).get<std::string>()); }
  SessionId session_ref(const json& e) const { return sessions_.at(e.at("session").get<std::string>()); }
  ProposalId proposal_ref(const json& e) const { return proposals_.at(e.at("proposal").get<std::string>()); }
  static Amount amount(const json& e, const char* key) { return *amount_from_json(e.at(key)); }
  static TokenKind token(const json& e, const char* key, TokenKind fallback) {
    return e.contains(key) ? *parse_token(e.at(key).get<std::string>()) : fallback;
  }

  CaseId case_of(SessionId sid) const {
    auto c = engine_.arbitration.case_for(sid);
    if (!c) fail(ErrorCode::UnknownCase, "no case for session " + std::to_string(raw(sid)));
    return *c;
  }

  static TrackingReport tracking_of(const std::string& t) {
    if (t == "lost") return TrackingReport::declared_lost;
    if (t == "silent") return TrackingReport::silent;
    return TrackingReport::informed;
  }

  void execute(const ScriptEvent& ev) {
    const json& e = ev.args;
    std::optional<std::string> expect;
    if (e.contains("expect")) expect = e.at("expect").get<std::string>();
    json what = {{"op", ev.op}, {"index", ev.index}};
    auto& ex = engine_.exchange;
    auto& arb = engine_.arbitration;
    auto& gov = engine_.governance;
    auto& led = engine_.ledger;
    const std::string& op = ev.op;

    attempt(
        what,
        [&] {
          if (op == "list") {
            const auto& l = ex.list_item(who(e, "seller"), e.value("description", e.at("ref").get<std::string>()),
                                         amount(e, "price"), token(e, "token", TokenKind::LZS),
                                         e.value("category", engine_.config.categories.front()));
            listings_[e.at("ref").get<std::string>()] = l.id;
          } else if (op == "purchase") {
            const auto lid = listings_.at(e.at("listing").get<std::string>());
            const auto sid = ex.request_purchase(who(e, "buyer"), lid);
            sessions_[e.at("ref").get<std::string>()] = sid;
            std::optional<Strategy> b, s;
            std::string err;
            if (e.contains("buyer_strategy")) b = Strategy::parse(e.at("buyer_strategy").get<std::string>(), err);
            if (e.contains("seller_strategy")) s = Strategy::parse(e.at("seller_strategy").get<std::string>(), err);
            open_plan(sid, b, s, false);
          } else if (op == "validate") {
            ex.validate_sale(who(e, "seller"), session_ref(e));
          } else if (op == "agree") {
            ex.agree_terms(who(e, "agent"), session_ref(e));
          } else if (op == "fund") {
            ex.fund_escrow(who(e, "buyer"), session_ref(e));
          } else if (op == "issue_qr") {
            ex.issue_qr(who(e, "seller"), session_ref(e));
          } else if (op == "prepare") {
            ex.prepare_package(who(e, "seller"), session_ref(e), e.value("qr_included", true));
          } else if (op == "dropoff") {
            const auto sid = session_ref(e);
            ex.confirm_dropoff(who(e, "seller"), sid, e.value("qr_included", true),
                               tracking_of(e.value("tracking", "informed")),
                               e.value("tracking_number", "TRK-" + std::to_string(raw(sid))));
          } else if (op == "report_tracking") {
            const auto sid = session_ref(e);
            ex.report_tracking(who(e, "seller"), sid, tracking_of(e.at("tracking").get<std::string>()),
                               e.value("tracking_number", "TRK-" + std::to_string(raw(sid))));
          } else if (op == "deliver") {
            ex.mark_delivered(session_ref(e));
          } else if (op == "query_qr") {
            const auto sid = session_ref(e);
            ex.query_qr(who(e, "buyer"), sid);
            if (plans_.contains(sid)) plans_[sid].queried = true;
          } else if (op == "answer_qr") {
            const auto sid = session_ref(e);
            ex.answer_qr(who(e, "seller"), sid);
            if (plans_.contains(sid)) plans_[sid].buyer_has_qr = true;
          } else if (op == "confirm") {
            const auto sid = session_ref(e);
            const std::string via = e.value("via", "scan");
            if (via == "manual") {
              ex.confirm_receipt(who(e, "buyer"), sid, Confirmation::manual());
            } else {
              QrNonce nonce{};
              if (ex.session(sid).qr) nonce = *ex.session(sid).qr;
              if (via == "bad-scan") nonce[0] ^= 0x5a;
              ex.confirm_receipt(who(e, "buyer"), sid, Confirmation::scan(nonce));
            }
          } else if (op == "satisfaction") {
            ex.answer_satisfaction(who(e, "buyer"), session_ref(e), e.at("satisfied").get<bool>());
          } else if (op == "resolve") {
            ex.resolve_mutually(who(e, "agent"), session_ref(e));
          } else if (op == "cancel") {
            ex.cancel(who(e, "agent"), session_ref(e));
          } else if (op == "return_received") {
            ex.return_received(who(e, "seller"), session_ref(e));
          } else if (op == "claim") {
            arb.file_claim(who(e, "agent"), session_ref(e), *parse_dispute_reason(e.at("reason").get<std::string>()),
                           e.value("external", false), e.value("mismatch", false));
          } else if (op == "pay_fee") {
            const Amount fee = e.contains("fee") ? amount(e, "fee")
                                                 : engine_.config.arbitration.base_jurors *
                                                       engine_.config.arbitration.fee_per_juror;
            const auto cid = case_of(session_ref(e));
            if (arb.dispute(cid).claimant != who(e, "agent")) fail(ErrorCode::WrongParty, "only the claimant pays");
            arb.open_external_case(cid, fee);
          } else if (op == "evidence") {
            arb.submit_evidence(case_of(session_ref(e)), who(e, "agent"), to_hex(sha256(e.at("content").get<std::string>())));
          } else if (op == "commit") {
            const auto cid = case_of(session_ref(e));
            const Vote vote = e.at("vote") == "claimant" ? Vote::for_claimant : Vote::for_respondent;
            commit(cid, who(e, "agent"), vote);
          } else if (op == "reveal") {
            const auto cid = case_of(session_ref(e));
            reveal(cid, who(e, "agent"), e.value("tamper", false));
          } else if (op == "appeal") {
            const auto cid = case_of(session_ref(e));
            const auto& c = arb.dispute(cid);
            const Amount fee =
                e.contains("fee") ? amount(e, "fee")
                                  : jurors_for_round(engine_.config.arbitration.base_jurors,
                                                     static_cast<int>(c.rounds.size())) *
                                        engine_.config.arbitration.fee_per_juror;
            arb.appeal(cid, who(e, "agent"), fee);
          } else if (op == "join_pool") {
            arb.join_pool(who(e, "agent"), amount(e, "stake"));
          } else if (op == "leave_pool") {
            arb.leave_pool(who(e, "agent"));
          } else if (op == "stake") {
            led.stake_deposit(who(e, "agent"), amount(e, "amount"),
                              e.value("duration", engine_.config.ledger.stake_duration));
          } else if (op == "withdraw_stake") {
            withdraw_stake(who(e, "agent"));
          } else if (op == "transfer") {
            led.transfer(who(e, "from"), who(e, "to"), amount(e, "amount"), token(e, "token", TokenKind::LZS),
                         "script");
          } else if (op == "convert") {
            led.convert(who(e, "agent"), token(e, "from_token", TokenKind::LZS), token(e, "to_token", TokenKind::LZDC),
                        amount(e, "amount"));
          } else if (op == "set_rate") {
            const auto& r = e.at("lzs_per_lzdc");
            engine_.config.ledger.lzs_per_lzdc = Rate{r[0].get<std::int64_t>(), r[1].get<std::int64_t>()};
            engine_.trace.emit("harness", "rate", {{"lzs_per_lzdc", r}});
          } else if (op == "feedback") {
            const auto sid = session_ref(e);
            const auto& s = ex.session(sid);
            Feedback f{who(e, "rater"), who(e, "ratee"),
                       e.at("polarity") == "good" ? Polarity::good : Polarity::bad, std::nullopt, sid};
            if (e.contains("comment")) f.comment = e.at("comment").get<std::string>();
            engine_.reputation.apply_feedback(f, {s.buyer, s.seller, is_terminal(s.state)});
          } else if (op == "propose") {
            const auto pid = gov.submit_proposal(who(e, "agent"), *parse_level(e.at("level").get<std::string>()),
                                                 ProposalPayload::from_json(e.at("payload")));
            proposals_[e.at("ref").get<std::string>()] = pid;
          } else if (op == "vote") {
            gov.vote(who(e, "agent"), proposal_ref(e), e.at("direction") == "up" ? Direction::up : Direction::down);
          } else if (op == "committee") {
            const std::string kind = e.at("kind").get<std::string>();
            const auto k = kind == "ratify" ? DecisionKind::ratify
                           : kind == "veto" ? DecisionKind::veto
                                            : DecisionKind::miscategorized;
            std::vector<std::pair<AccountId, Signature>> sigs;
            for (auto it = e.at("signatures").begin(); it != e.at("signatures").end(); ++it) {
              const auto v = it->get<std::string>();
              sigs.emplace_back(ids_.at(it.key()), v == "yes" ? Signature::yes
                                                   : v == "no" ? Signature::no
                                                               : Signature::absent);
            }
            gov.committee_decide(k, proposal_ref(e), sigs);
          } else if (op == "delegate") {
            gov.delegate(who(e, "agent"), who(e, "to"));
          } else if (op == "undelegate") {
            gov.undelegate(who(e, "agent"));
          } else if (op == "finalize") {
            gov.finalize(proposal_ref(e));
          } else if (op == "queue") {
            gov.queue(proposal_ref(e));
          } else if (op == "execute") {
            gov.execute(proposal_ref(e));
          } else {
            fail(ErrorCode::ValidationError, "unknown op " + op);
          }
        },
        expect, ev.index);
  }

  void withdraw_stake(AccountId seller) {
    for (const auto& [sid, s] : engine_.exchange.sessions()) {
      if (s.seller == seller && !is_terminal(s.state)) {
        fail(ErrorCode::StakeLocked, "open exchange " + std::to_string(raw(sid)));
      }
    }
    engine_.ledger.mark_stake_withdrawable(Caller::exchange, seller);
    engine_.ledger.withdraw_stake(seller);
  }

  void commit(CaseId cid, AccountId juror, Vote vote) {
    const auto& c = engine_.arbitration.dispute(cid);
    const int round = c.rounds.empty() ? 0 : c.rounds.back().index;
    BallotSecret secret{vote, salt_rng_.bytes16(), false};
    engine_.arbitration.commit_vote(cid, juror, commitment(vote, secret.salt, juror));
    secrets_[{raw(cid), round, raw(juror)}] = secret;
  }

  void reveal(CaseId cid, AccountId juror, bool tamper) {
    const auto& c = engine_.arbitration.dispute(cid);
    const int round = c.rounds.empty() ? 0 : c.rounds.back().index;
    auto it = secrets_.find({raw(cid), round, raw(juror)});
    if (it == secrets_.end()) fail(ErrorCode::CommitmentMismatch, "no commitment held for this juror");
    Salt salt = it->second.salt;
    if (tamper) salt[0] ^= 0x01;
    engine_.arbitration.reveal_vote(cid, juror, it->second.vote, salt);
    it->second.revealed = true;
  }

  // ---- agents ------------------------------------------------------------------

  StrategyKind standing(AccountId id) const { return spec_.at(id)->strategy.kind; }

  bool buyer_holds_qr(const ExchangeSession& s, const SessionPlan& p) const {
    return s.qr && (s.qr_included || p.buyer_has_qr || s.qr_supplied_by_engine);
  }

  /// One decision for the seller seat. Returns true when it acted.
  bool seller_step(const ExchangeSession& s, SessionPlan& p) {
    const auto kind = p.seller;
    if (kind == StrategyKind::scripted) return false;
    const auto sid = s.id;
    const auto me = s.seller;
    auto& ex = engine_.exchange;
    auto act = [&](const char* what, auto&& fn) {
      return attempt({{"op", what}, {"session", raw(sid)}, {"agent", "seller"}}, fn);
    };
    switch (s.state) {
      case S::PurchaseRequested:
        return act("validate", [&] { ex.validate_sale(me, sid); });
      case S::SellerValidated:
        return act("agree", [&] { ex.agree_terms(me, sid); });
      case S::EscrowFunded:
        if (kind == StrategyKind::no_ship) return false;
        return act("issue_qr", [&] { ex.issue_qr(me, sid); });
      case S::QRIssued:
        p.wrong_item = kind == StrategyKind::wrong_item;
        return act("dropoff", [&] {
          ex.confirm_dropoff(me, sid, kind != StrategyKind::qr_omit, TrackingReport::informed,
                             "TRK-" + std::to_string(raw(sid)));
        });
      case S::AwaitingQR:
        if (kind == StrategyKind::qr_omit) return false;
        return act("answer_qr", [&] {
          ex.answer_qr(me, sid);
          p.buyer_has_qr = true;
        });
      case S::ResolutionWindow:
        if (kind == StrategyKind::wrong_item) return false;
        return act("resolve", [&] { ex.resolve_mutually(me, sid); });
      case S::ReturnPending:
        if (!s.return_requested || today() < *s.return_requested + sc_.carrier.return_days) return false;
        return act("return_received", [&] { ex.return_received(me, sid); });
      default:
        return false;
    }
  }

  bool buyer_step(const ExchangeSession& s, SessionPlan& p) {
    const auto kind = p.buyer;
    if (kind == StrategyKind::scripted) return false;
    const auto sid = s.id;
    const auto me = s.buyer;
    auto& ex = engine_.exchange;
    auto act = [&](const char* what, auto&& fn) {
      return attempt({{"op", what}, {"session", raw(sid)}, {"agent", "buyer"}}, fn);
    };
    switch (s.state) {
      case S::TermsAgreed:
        return act("fund", [&] { ex.fund_escrow(me, sid); });
      case S::Delivered:
        if (kind == StrategyKind::never_confirm) return false;
        if (kind == StrategyKind::false_claim) {
          return act("claim", [&] {
            engine_.arbitration.file_claim(me, sid, DisputeReason::not_delivered, p.opt_external, false);
          });
        }
        if (buyer_holds_qr(s, p)) return act("confirm", [&] { ex.confirm_receipt(me, sid, Confirmation::scan(*s.qr)); });
        if (!p.queried && today() + engine_.config.deadlines.B_prime < *s.anchors.T1 + engine_.config.deadlines.B) {
          p.queried = true;
          return act("query_qr", [&] { ex.query_qr(me, sid); });
        }
        return act("confirm", [&] { ex.confirm_receipt(me, sid, Confirmation::manual()); });
      case S::AwaitingSatisfaction:
        return act("satisfaction", [&] { ex.answer_satisfaction(me, sid, !p.wrong_item); });
      case S::ResolutionWindow:
        if (!p.wrong_item) return false;
        return act("claim", [&] {
          engine_.arbitration.file_claim(me, sid, DisputeReason::wrong_item_or_empty, p.opt_external, true);
        });
      default:
        return false;
    }
  }

  void feedback(const ExchangeSession& s, SessionPlan& p) {
    if (p.feedback_done || !is_terminal(s.state) || !s.outcome || !s.anchors.T0) return;
    p.feedback_done = true;
    const auto& o = *s.outcome;
    const bool success = s.state == S::Settled &&
                         (o.kind == OutcomeKind::success_confirmed || o.kind == OutcomeKind::success_by_default);
    const bool buyer_won = o.kind == OutcomeKind::arbitrated && o.winner == Party::buyer;
    const bool seller_won = o.kind == OutcomeKind::arbitrated && o.winner == Party::seller;
    auto rate = [&](AccountId rater, AccountId ratee, Polarity pol) {
      attempt({{"op", "feedback"}, {"session", raw(s.id)}}, [&] {
        engine_.reputation.apply_feedback(Feedback{rater, ratee, pol, std::nullopt, s.id},
                                          {s.buyer, s.seller, true});
      });
    };
    if (p.buyer != StrategyKind::scripted) {
      const bool bad = buyer_won || o.kind == OutcomeKind::resolved_mutually ||
                       (o.kind == OutcomeKind::cancelled && o.cancel == CancelCode::C2);
      if (success || bad) rate(s.buyer, s.seller, bad ? Polarity::bad : Polarity::good);
    }
    if (p.seller != StrategyKind::scripted) {
      if (success || seller_won) rate(s.seller, s.buyer, seller_won ? Polarity::bad : Polarity::good);
    }
  }

  Vote honest_vote(const DisputeCase& c) const {
    const auto flags = engine_.arbitration.evidence_flags(c);
    const auto* row = evaluate_rules(engine_.arbitration.rule_table(), flags);
    const Party winner = row ? row->winner : Party::buyer;
    return winner == c.claimant_party ? Vote::for_claimant : Vote::for_respondent;
  }

  void courts() {
    auto& arb = engine_.arbitration;
    std::vector<CaseId> ids;
    for (const auto& [id, c] : arb.cases()) {
      if (c.status != CaseStatus::closed) ids.push_back(id);
    }
    for (auto cid : ids) {
      const auto& c = arb.dispute(cid);
      if (c.status == CaseStatus::filed && c.tier == Tier::external && c.fees_paid.empty() &&
          standing(c.claimant) != StrategyKind::scripted && plans_.contains(c.session) &&
          !fee_attempted_.contains(cid)) {
        fee_attempted_.insert(cid);
        const Amount fee = engine_.config.arbitration.base_jurors * engine_.config.arbitration.fee_per_juror;
        attempt({{"op", "pay_fee"}, {"case", raw(cid)}}, [&] { arb.open_external_case(cid, fee); });
      }
      if (arb.dispute(cid).status != CaseStatus::voting) continue;
      const auto& round = arb.dispute(cid).rounds.back();
      const std::vector<AccountId> jurors = round.jurors;
      for (auto j : jurors) {
        const auto kind = standing(j);
        if (kind == StrategyKind::scripted) continue;
        const auto& ballot = arb.dispute(cid).rounds.back().ballots.at(j);
        const std::tuple<std::uint64_t, int, std::uint64_t> key{raw(cid), round.index, raw(j)};
        if (!ballot.commitment && today() <= round.commit_deadline) {
          const Vote v = honest_vote(arb.dispute(cid));
          attempt({{"op", "commit"}, {"case", raw(cid)}, {"juror", raw(j)}}, [&] { commit(cid, j, v); });
        } else if (ballot.commitment && !ballot.vote && kind != StrategyKind::absent_juror &&
                   today() > round.opened && today() <= round.reveal_deadline && secrets_.contains(key) &&
                   !secrets_.at(key).revealed) {
          attempt({{"op", "reveal"}, {"case", raw(cid)}, {"juror", raw(j)}}, [&] { reveal(cid, j, false); });
        }
      }
    }
  }

  void agents(Day) {
    stalled_.clear();
    for (int pass = 0; pass < 32; ++pass) {
      bool acted = false;
      for (const auto& [sid, s] : engine_.exchange.sessions()) {
        auto it = plans_.find(sid);
        if (it == plans_.end() || is_terminal(s.state) || s.state == S::Disputed) continue;
        const auto before = s.state;
        const auto key = std::make_pair(raw(sid), static_cast<int>(before));
        if (stalled_.contains(key)) continue;
        seller_step(s, it->second);
        if (s.state == before) buyer_step(s, it->second);
        // Nothing more to do in this state today; do not retry a failed action.
        if (s.state == before) stalled_.insert(key);
        else acted = true;
      }
      if (!acted) break;
    }
    courts();
    for (const auto& [sid, s] : engine_.exchange.sessions()) {
      auto it = plans_.find(sid);
      if (it != plans_.end()) feedback(s, it->second);
    }
  }

  Day today() const { return engine_.today(); }

  // ---- summary -----------------------------------------------------------------

  json summary() const {
    json by_state = json::object();
    json by_outcome = json::object();
    for (const auto& [sid, s] : engine_.exchange.sessions()) {
      by_state[std::string(to_string(s.state))] = by_state.value(std::string(to_string(s.state)), 0) + 1;
      if (s.outcome && is_terminal(s.state)) {
        const auto d = describe(*s.outcome);
        by_outcome[d] = by_outcome.value(d, 0) + 1;
      }
    }
    json winners = {{"buyer", 0}, {"seller", 0}, {"open", 0}};
    for (const auto& [cid, c] : engine_.arbitration.cases()) {
      if (c.winner) winners[std::string(to_string(*c.winner))] = winners[std::string(to_string(*c.winner))].get<int>() + 1;
      else winners["open"] = winners["open"].get<int>() + 1;
    }
    const auto& st = engine_.arbitration.stats();
    std::array<std::int64_t, 11> hist{};
    std::int64_t lo = 100, hi = 0, total = 0, n = 0;
    for (const auto& [acct, score] : engine_.reputation.scores()) {
      hist[static_cast<std::size_t>(score.value / 10)]++;
      lo = std::min(lo, score.value);
      hi = std::max(hi, score.value);
      total += score.value;
      ++n;
    }
    json proposals = json::object();
    for (const auto& [pid, p] : engine_.governance.proposals()) {
      const auto k = std::string(to_string(p.state));
      proposals[k] = proposals.value(k, 0) + 1;
    }
    return {{"sessions", engine_.exchange.sessions().size()},
            {"by_state", by_state},
            {"by_outcome", by_outcome},
            {"disputes",
             {{"cases", engine_.arbitration.cases().size()},
              {"internal", st.internal_cases},
              {"external", st.external_cases},
              {"appeals", st.appeals},
              {"fallbacks", st.fallbacks},
              {"by_winner", winners}}},
            {"lzsp_minted_rewards", engine_.rewards.total_minted()},
            {"reputation",
             {{"accounts", n},
              {"min", n ? lo : 0},
              {"max", n ? hi : 0},
              {"mean", n ? static_cast<double>(total) / static_cast<double>(n) : 0.0},
              {"deciles", hist}}},
            {"proposals", proposals},
            {"rejected_ops", rejected_},
            {"expectation_failures", expectation_failures_.size()}};
  }

  const Scenario& sc_;
  std::uint64_t seed_;
  Engine engine_;
  Rng mixed_rng_;
  Rng salt_rng_;
  std::map<std::string, AccountId> ids_;
  std::map<AccountId, const AgentSpec*> spec_;
  std::map<std::string, ListingId> listings_;
  std::map<std::string, SessionId> sessions_;
  std::map<std::string, ProposalId> proposals_;
  std::map<SessionId, SessionPlan> plans_;
  std::map<std::tuple<std::uint64_t, int, std::uint64_t>, BallotSecret> secrets_;
  std::set<std::pair<std::uint64_t, int>> stalled_;
  std::set<CaseId> fee_attempted_;
  std::vector<Generated> market_;
  std::vector<std::string> expectation_failures_;
  std::size_t rejected_ = 0;
};

}  // namespace

RunResult run_scenario(const Scenario& scenario, std::optional<std::uint64_t> seed_override) {
  Simulator sim(scenario, seed_override.value_or(scenario.seed));
  return sim.run();
}

}  // namespace market
