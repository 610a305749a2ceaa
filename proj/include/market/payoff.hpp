#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

namespace market {

/// Utility weights for the buyer/seller honesty game.
///
/// Asset outcome: +V gain, -V loss. LZSP: +r gain, 0 non-gain. Seller
/// deposit: +s_keep kept by the seller, -s_lose lost by the seller, 0 for a
/// buyer who gains nothing from it, +s_gain for a buyer awarded the deposit.
/// Reputation: +rho / -rho, counted only when include_reputation is set.
struct PayoffParams {
  double V = 10;
  double r = 2;
  double s_keep = 1;
  double s_lose = 8;
  double s_gain = 8;
  double rho = 1;
  bool include_reputation = true;

  /// Finite and non-negative: the matrix can be built.
  bool buildable() const;
  /// Strictly positive weights (s_keep may be zero): the regime in which
  /// honest play is claimed to be the equilibrium.
  bool strictly_valid() const;

  PayoffParams scaled(double k) const;
  nlohmann::json to_json() const;
  static PayoffParams from_json(const nlohmann::json& j);
};

enum class Play : std::uint8_t { honest = 0, dishonest = 1 };

struct Profile {
  Play buyer = Play::honest;
  Play seller = Play::honest;

  bool operator==(const Profile&) const = default;
};

std::string label(const Profile& p);  // "(s1,s2)" style, buyer first

inline constexpr std::array<Profile, 4> kAllProfiles{
    Profile{Play::honest, Play::honest}, Profile{Play::honest, Play::dishonest},
    Profile{Play::dishonest, Play::honest}, Profile{Play::dishonest, Play::dishonest}};

/// One player's utility split into the four payoff components.
struct UtilityTerms {
  double asset = 0;
  double lzsp = 0;
  double stake = 0;
  double reputation = 0;

  double total() const { return asset + lzsp + stake + reputation; }
};

struct PayoffCell {
  UtilityTerms buyer;
  UtilityTerms seller;

  double u1() const { return buyer.total(); }
  double u2() const { return seller.total(); }
};

struct PayoffMatrix {
  std::array<std::array<PayoffCell, 2>, 2> cells{};  // [buyer play][seller play]

  const PayoffCell& at(const Profile& p) const {
    return cells[static_cast<int>(p.buyer)][static_cast<int>(p.seller)];
  }
  PayoffCell& at(const Profile& p) { return cells[static_cast<int>(p.buyer)][static_cast<int>(p.seller)]; }
};

PayoffMatrix build_payoff_matrix(const PayoffParams& params);

struct Equilibrium {
  Profile profile;
  bool strict = false;
};

/// Exhaustive best-response check over the four pure profiles.
std::vector<Equilibrium> find_nash_equilibria(const PayoffMatrix& matrix);

/// u1 + u2 is maximal over all four profiles (ties allowed).
bool is_social_optimum(const Profile& profile, const PayoffMatrix& matrix);

/// No other profile is at least as good for both players and better for one.
bool is_pareto_undominated(const Profile& profile, const PayoffMatrix& matrix);

/// Unilateral deviation margins away from honest play.
struct DeviationMargins {
  double buyer = 0;   // u1(s1,s1) - u1(s2,s1)
  double seller = 0;  // u2(s1,s1) - u2(s1,s2)
  std::string buyer_formula;
  std::string seller_formula;
};

DeviationMargins honest_margins(const PayoffMatrix& matrix, const PayoffParams& params);

/// Full analyzer output, the document printed by verify-equilibrium.
nlohmann::json analyze_game(const PayoffParams& params);
std::string render_game_text(const nlohmann::json& report);

}  // namespace market
