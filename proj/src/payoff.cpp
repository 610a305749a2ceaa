#include "market/payoff.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "market/types.hpp"

namespace market {
namespace {

nlohmann::json terms_json(const UtilityTerms& t) {
  return {{"asset", t.asset}, {"lzsp", t.lzsp}, {"stake", t.stake}, {"reputation", t.reputation},
          {"total", t.total()}};
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

bool PayoffParams::buildable() const {
  for (double v : {V, r, s_keep, s_lose, s_gain, rho}) {
    if (!std::isfinite(v) || v < 0) return false;
  }
  return true;
}

bool PayoffParams::strictly_valid() const {
  return buildable() && V > 0 && r > 0 && s_lose > 0 && s_gain > 0 && rho > 0 && s_keep >= 0;
}

PayoffParams PayoffParams::scaled(double k) const {
  PayoffParams p = *this;
  p.V *= k;
  p.r *= k;
  p.s_keep *= k;
  p.s_lose *= k;
  p.s_gain *= k;
  p.rho *= k;
  return p;
}

nlohmann::json PayoffParams::to_json() const {
  return {{"V", V},           {"r", r},       {"s_keep", s_keep},
          {"s_lose", s_lose}, {"s_gain", s_gain}, {"rho", rho},
          {"include_reputation", include_reputation}};
}

PayoffParams PayoffParams::from_json(const nlohmann::json& j) {
  PayoffParams p;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k == "include_reputation") {
      p.include_reputation = it->get<bool>();
      continue;
    }
    if (!it->is_number()) fail(ErrorCode::InvalidParams, k + " must be a number");
    const double v = it->get<double>();
    if (k == "V") p.V = v;
    else if (k == "r") p.r = v;
    else if (k == "s_keep") p.s_keep = v;
    else if (k == "s_lose") p.s_lose = v;
    else if (k == "s_gain") p.s_gain = v;
    else if (k == "rho") p.rho = v;
    else fail(ErrorCode::InvalidParams, "unknown payoff parameter " + k);
  }
  return p;
}

std::string label(const Profile& p) {
  std::string out = "(s";
  out += p.buyer == Play::honest ? '1' : '2';
  out += ",s";
  out += p.seller == Play::honest ? '1' : '2';
  out += ')';
  return out;
}

PayoffMatrix build_payoff_matrix(const PayoffParams& p) {
  if (!p.buildable()) fail(ErrorCode::InvalidParams, "payoff parameters must be finite and non-negative");
  const double rho = p.include_reputation ? p.rho : 0.0;
  PayoffMatrix m;
  // Both honest: asset gained, LZSP earned, deposit kept, good feedback.
  m.at({Play::honest, Play::honest}) = {{p.V, p.r, 0, rho}, {p.V, p.r, p.s_keep, rho}};
  // Honest buyer, dishonest seller: buyer made whole and awarded the deposit;
  // seller loses the asset value, the deposit and reputation.
  m.at({Play::honest, Play::dishonest}) = {{p.V, 0, p.s_gain, 0}, {-p.V, 0, -p.s_lose, -rho}};
  // Dishonest buyer, honest seller: seller paid (no LZSP), buyer loses value and reputation.
  m.at({Play::dishonest, Play::honest}) = {{-p.V, 0, 0, -rho}, {p.V, 0, p.s_keep, 0}};
  // Both dishonest: value sent back to each issuing party, seller loses the deposit.
  m.at({Play::dishonest, Play::dishonest}) = {{p.V, 0, 0, 0}, {p.V, 0, -p.s_lose, 0}};
  return m;
}

std::vector<Equilibrium> find_nash_equilibria(const PayoffMatrix& m) {
  std::vector<Equilibrium> out;
  for (const auto& prof : kAllProfiles) {
    const Profile buyer_dev{prof.buyer == Play::honest ? Play::dishonest : Play::honest, prof.seller};
    const Profile seller_dev{prof.buyer, prof.seller == Play::honest ? Play::dishonest : Play::honest};
    const double u1 = m.at(prof).u1();
    const double u2 = m.at(prof).u2();
    const double d1 = m.at(buyer_dev).u1();
    const double d2 = m.at(seller_dev).u2();
    if (u1 >= d1 && u2 >= d2) out.push_back({prof, u1 > d1 && u2 > d2});
  }
  return out;
}

bool is_social_optimum(const Profile& profile, const PayoffMatrix& m) {
  const double mine = m.at(profile).u1() + m.at(profile).u2();
  for (const auto& other : kAllProfiles) {
    if (m.at(other).u1() + m.at(other).u2() > mine) return false;
  }
  return true;
}

bool is_pareto_undominated(const Profile& profile, const PayoffMatrix& m) {
  const auto& c = m.at(profile);
  for (const auto& other : kAllProfiles) {
    const auto& o = m.at(other);
    const bool weakly = o.u1() >= c.u1() && o.u2() >= c.u2();
    const bool strictly = o.u1() > c.u1() || o.u2() > c.u2();
    if (weakly && strictly) return false;
  }
  return true;
}

DeviationMargins honest_margins(const PayoffMatrix& m, const PayoffParams& p) {
  const Profile hh{Play::honest, Play::honest};
  DeviationMargins d;
  d.buyer = m.at(hh).u1() - m.at({Play::dishonest, Play::honest}).u1();
  d.seller = m.at(hh).u2() - m.at({Play::honest, Play::dishonest}).u2();
  d.buyer_formula = p.include_reputation ? "2V + r + 2rho" : "2V + r";
  d.seller_formula = p.include_reputation ? "2V + r + s_keep + s_lose + 2rho" : "2V + r + s_keep + s_lose";
  return d;
}

nlohmann::json analyze_game(const PayoffParams& params) {
  const auto m = build_payoff_matrix(params);
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& prof : kAllProfiles) {
    const auto& c = m.at(prof);
    cells.push_back({{"profile", label(prof)},
                     {"u1", c.u1()},
                     {"u2", c.u2()},
                     {"sum", c.u1() + c.u2()},
                     {"buyer_terms", terms_json(c.buyer)},
                     {"seller_terms", terms_json(c.seller)},
                     {"social_optimum", is_social_optimum(prof, m)},
                     {"pareto_undominated", is_pareto_undominated(prof, m)}});
  }
  nlohmann::json eq = nlohmann::json::array();
  const auto equilibria = find_nash_equilibria(m);
  for (const auto& e : equilibria) eq.push_back({{"profile", label(e.profile)}, {"strict", e.strict}});

  const auto margins = honest_margins(m, params);
  const bool unique_strict_honest =
      equilibria.size() == 1 && equilibria[0].profile == Profile{} && equilibria[0].strict;

  nlohmann::json notes = nlohmann::json::array();
  const auto& dd = m.at({Play::dishonest, Play::dishonest});
  notes.push_back("(s2,s2): both players keep the asset value (u1 = " + num(dd.u1()) + ", u2 = " + num(dd.u2()) +
                  "); only the seller's deposit loss penalizes mutual dishonesty");
  if (!params.strictly_valid()) {
    notes.push_back("parameters are outside the strictly positive regime; equilibrium claims may not hold");
  }

  return {
      {"schema", "market.equilibrium/1"},
      {"params", params.to_json()},
      {"matrix", cells},
      {"equilibria", eq},
      {"honest_is_unique_strict_ne", unique_strict_honest},
      {"margins",
       {{"buyer", {{"formula", margins.buyer_formula}, {"value", margins.buyer}, {"holds", margins.buyer > 0}}},
        {"seller",
         {{"formula", margins.seller_formula}, {"value", margins.seller}, {"holds", margins.seller > 0}}}}},
      {"social_optimum", [&] {
         nlohmann::json s = nlohmann::json::array();
         for (const auto& prof : kAllProfiles) {
           if (is_social_optimum(prof, m)) s.push_back(label(prof));
         }
         return s;
       }()},
      {"notes", notes},
  };
}

std::string render_game_text(const nlohmann::json& report) {
  std::ostringstream os;
  os << "payoff matrix (u1 buyer, u2 seller)\n";
  os << "  profile    u1        u2        sum       optimum  pareto\n";
  for (const auto& c : report.at("matrix")) {
    char line[160];
    std::snprintf(line, sizeof line, "  %-9s  %-8s  %-8s  %-8s  %-7s  %s\n",
                  c.at("profile").get<std::string>().c_str(), num(c.at("u1").get<double>()).c_str(),
                  num(c.at("u2").get<double>()).c_str(), num(c.at("sum").get<double>()).c_str(),
                  c.at("social_optimum").get<bool>() ? "yes" : "no",
                  c.at("pareto_undominated").get<bool>() ? "yes" : "no");
    os << line;
  }
  os << "pure Nash equilibria:";
  for (const auto& e : report.at("equilibria")) {
    os << ' ' << e.at("profile").get<std::string>() << (e.at("strict").get<bool>() ? "[strict]" : "[weak]");
  }
  os << "\nmargins away from (s1,s1):\n";
  for (const char* who : {"buyer", "seller"}) {
    const auto& mg = report.at("margins").at(who);
    os << "  " << who << ": " << mg.at("formula").get<std::string>() << " = "
       << num(mg.at("value").get<double>()) << " > 0 " << (mg.at("holds").get<bool>() ? "holds" : "FAILS")
       << '\n';
  }
  for (const auto& n : report.at("notes")) os << "note: " << n.get<std::string>() << '\n';
  return os.str();
}

}  // namespace market
