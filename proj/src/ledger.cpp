#include "market/ledger.hpp"

namespace market {
namespace {

std::size_t idx(TokenKind token) { return static_cast<std::size_t>(token); }

bool protocol_caller(Caller caller) {
  return caller == Caller::exchange || caller == Caller::arbitration;
}

}  // namespace

std::string_view to_string(AccountKind kind) {
  switch (kind) {
    case AccountKind::buyer:
      return "buyer";
    case AccountKind::seller:
      return "seller";
    case AccountKind::neutral:
      return "neutral";
    case AccountKind::system:
      return "system";
  }
  return "?";
}

std::string_view to_string(StakeStatus status) {
  switch (status) {
    case StakeStatus::active:
      return "active";
    case StakeStatus::withdrawable:
      return "withdrawable";
    case StakeStatus::slashed:
      return "slashed";
    case StakeStatus::withdrawn:
      return "withdrawn";
  }
  return "?";
}

std::string_view to_string(EscrowStatus status) {
  switch (status) {
    case EscrowStatus::locked:
      return "locked";
    case EscrowStatus::released_to_seller:
      return "released-to-seller";
    case EscrowStatus::refunded_to_buyer:
      return "refunded-to-buyer";
    case EscrowStatus::split:
      return "split";
  }
  return "?";
}

json account_json(AccountId id) { return raw(id); }

Amount Receipt::delta_for(AccountId account, TokenKind token) const {
  Amount total = 0;
  for (const auto& line : lines) {
    if (line.account == account && line.token == token) total += line.delta;
  }
  return total;
}

Ledger::Ledger(Trace& trace, const EngineConfig& config) : trace_(trace), config_(config) {}

AccountId Ledger::create_account(AccountKind kind, std::string label) {
  const AccountId id{next_account_++};
  AccountRecord rec;
  rec.id = id;
  rec.kind = kind;
  rec.label = label.empty() ? "acct-" + std::to_string(raw(id)) : std::move(label);
  trace_.emit("ledger", "account_created",
              {{"account", raw(id)}, {"label", rec.label}, {"kind", std::string(to_string(kind))}});
  accounts_.emplace(id, std::move(rec));
  return id;
}

const AccountRecord& Ledger::account(AccountId id) const {
  auto it = accounts_.find(id);
  if (it == accounts_.end()) fail(ErrorCode::UnknownAccount, std::to_string(raw(id)));
  return it->second;
}

AccountRecord& Ledger::mut(AccountId id) {
  auto it = accounts_.find(id);
  if (it == accounts_.end()) fail(ErrorCode::UnknownAccount, std::to_string(raw(id)));
  return it->second;
}

void Ledger::set_payout_preference(AccountId id, std::optional<TokenKind> token) {
  if (token == TokenKind::LZSP) fail(ErrorCode::UnsupportedToken, "payouts are LZS or LZDC");
  mut(id).payout_preference = token;
}

void Ledger::require_positive(Amount amount) const {
  if (amount <= 0) fail(ErrorCode::ZeroAmount, "amount must be positive");
}

void Ledger::require_funds(AccountId id, TokenKind token, Amount amount) const {
  const Amount have = account(id).balance(token);
  if (have < amount) {
    fail(ErrorCode::InsufficientFunds, std::string(to_string(token)) + " balance " + std::to_string(have) +
                                           " < " + std::to_string(amount));
  }
}

void Ledger::mint(Caller caller, AccountId to, TokenKind token, Amount amount, std::string_view source) {
  require_positive(amount);
  const bool allowed = token == TokenKind::LZSP ? (caller == Caller::incentives || caller == Caller::genesis)
                                                : caller == Caller::genesis;
  if (!allowed) fail(ErrorCode::UnauthorizedCaller, "mint of " + std::string(to_string(token)));
  bal(to, token) += amount;
  minted_[idx(token)] += amount;
  trace_.emit("ledger", "mint",
              {{"account", raw(to)}, {"token", to_string(token)}, {"amount", amount}, {"source", source}});
}

void Ledger::burn(AccountId from, TokenKind token, Amount amount, std::string_view reason) {
  require_positive(amount);
  require_funds(from, token, amount);
  bal(from, token) -= amount;
  burned_[idx(token)] += amount;
  trace_.emit("ledger", "burn",
              {{"account", raw(from)}, {"token", to_string(token)}, {"amount", amount}, {"reason", reason}});
}

Receipt Ledger::transfer(AccountId from, AccountId to, Amount amount, TokenKind token, std::string_view memo) {
  require_positive(amount);
  account(to);
  require_funds(from, token, amount);
  bal(from, token) -= amount;
  bal(to, token) += amount;
  trace_.emit("ledger", "transfer",
              {{"from", raw(from)},
               {"to", raw(to)},
               {"token", to_string(token)},
               {"amount", amount},
               {"memo", memo}});
  return Receipt{{{from, token, -amount}, {to, token, amount}}};
}

const StakePosition& Ledger::stake_deposit(AccountId seller, Amount amount, Day duration) {
  auto& rec = mut(seller);
  if (rec.stake && rec.stake->status == StakeStatus::active) fail(ErrorCode::AlreadyStaked);
  if (rec.stake && rec.stake->status == StakeStatus::withdrawable) {
    fail(ErrorCode::AlreadyStaked, "withdraw the matured stake first");
  }
  if (amount < config_.ledger.seller_min_stake) {
    fail(ErrorCode::BelowMinimumStake,
         std::to_string(amount) + " < " + std::to_string(config_.ledger.seller_min_stake));
  }
  if (duration < 1) fail(ErrorCode::BelowMinimumStake, "duration must be at least one day");
  require_funds(seller, TokenKind::LZS, amount);
  rec.balances[idx(TokenKind::LZS)] -= amount;
  rec.stake = StakePosition{amount, trace_.today(), duration, StakeStatus::active};
  trace_.emit("ledger", "stake_deposit",
              {{"account", raw(seller)}, {"amount", amount}, {"duration", duration}, {"start", trace_.today()}});
  return *rec.stake;
}

bool Ledger::seller_active(AccountId seller) const {
  const auto& rec = account(seller);
  return rec.stake && rec.stake->status == StakeStatus::active;
}

void Ledger::mark_stake_withdrawable(Caller caller, AccountId seller) {
  if (!protocol_caller(caller)) fail(ErrorCode::UnauthorizedCaller, "stake maturity");
  auto& rec = mut(seller);
  if (!rec.stake || rec.stake->status != StakeStatus::active) fail(ErrorCode::NoStake);
  if (trace_.today() < rec.stake->start + rec.stake->duration) {
    fail(ErrorCode::StakeLocked, "stake matures on day " + std::to_string(rec.stake->start + rec.stake->duration));
  }
  rec.stake->status = StakeStatus::withdrawable;
  trace_.emit("ledger", "stake_status", {{"account", raw(seller)}, {"status", "withdrawable"}});
}

Amount Ledger::withdraw_stake(AccountId seller) {
  auto& rec = mut(seller);
  if (!rec.stake || rec.stake->status != StakeStatus::withdrawable) {
    fail(ErrorCode::StakeLocked, "stake is not withdrawable");
  }
  const Amount principal = rec.stake->amount;
  const Amount yield = static_cast<Amount>(static_cast<__int128>(principal) *
                                           config_.ledger.stake_yield_bps / 10000);
  rec.stake->status = StakeStatus::withdrawn;
  rec.balances[idx(TokenKind::LZS)] += principal;
  trace_.emit("ledger", "stake_withdraw", {{"account", raw(seller)}, {"amount", principal}});
  if (yield > 0) {
    bal(seller, TokenKind::LZS) += yield;
    minted_[idx(TokenKind::LZS)] += yield;
    trace_.emit("ledger", "mint",
                {{"account", raw(seller)}, {"token", "LZS"}, {"amount", yield}, {"source", "stake-yield"}});
  }
  return principal + yield;
}

Amount Ledger::slash_stake(Caller caller, AccountId seller, std::optional<AccountId> beneficiary) {
  if (!protocol_caller(caller)) fail(ErrorCode::UnauthorizedCaller, "stake slash");
  auto& rec = mut(seller);
  if (!rec.stake || rec.stake->status != StakeStatus::active) return 0;
  const Amount amount = rec.stake->amount;
  rec.stake->status = StakeStatus::slashed;
  json payload = {{"account", raw(seller)}, {"amount", amount}};
  if (beneficiary) {
    bal(*beneficiary, TokenKind::LZS) += amount;
    payload["beneficiary"] = raw(*beneficiary);
  } else {
    burned_[idx(TokenKind::LZS)] += amount;
    payload["beneficiary"] = nullptr;
  }
  trace_.emit("ledger", "stake_slash", std::move(payload));
  return amount;
}

Amount Ledger::draw_stake(Caller caller, AccountId seller, Amount amount, AccountId to) {
  if (!protocol_caller(caller)) fail(ErrorCode::UnauthorizedCaller, "stake draw");
  account(to);
  auto& rec = mut(seller);
  if (!rec.stake || !rec.stake->held() || amount <= 0) return 0;
  const Amount taken = std::min(amount, rec.stake->amount);
  if (taken == 0) return 0;
  rec.stake->amount -= taken;
  bal(to, TokenKind::LZS) += taken;
  trace_.emit("ledger", "stake_draw", {{"account", raw(seller)}, {"amount", taken}, {"to", raw(to)}});
  return taken;
}

const EscrowAccount& Ledger::lock_escrow(SessionId session, AccountId buyer, Amount amount, TokenKind token) {
  if (token == TokenKind::LZSP) fail(ErrorCode::UnsupportedToken, "LZSP cannot fund escrow");
  if (escrows_.contains(session)) fail(ErrorCode::DuplicateEscrow, std::to_string(raw(session)));
  require_positive(amount);
  require_funds(buyer, token, amount);
  bal(buyer, token) -= amount;
  auto [it, _] = escrows_.emplace(session, EscrowAccount{session, buyer, amount, token, EscrowStatus::locked});
  trace_.emit("ledger", "escrow_lock",
              {{"session", raw(session)}, {"buyer", raw(buyer)}, {"token", to_string(token)}, {"amount", amount}});
  return it->second;
}

Receipt Ledger::settle_escrow(Caller caller, SessionId session, Disposition disposition, AccountId seller) {
  if (!protocol_caller(caller)) fail(ErrorCode::UnauthorizedCaller, "escrow settlement");
  auto it = escrows_.find(session);
  if (it == escrows_.end()) fail(ErrorCode::UnknownEscrow, std::to_string(raw(session)));
  auto& esc = it->second;
  if (esc.status != EscrowStatus::locked) fail(ErrorCode::AlreadySettled, std::to_string(raw(session)));
  account(seller);

  Amount to_seller = 0;
  switch (disposition.kind) {
    case Disposition::Kind::to_seller:
      to_seller = esc.amount;
      esc.status = EscrowStatus::released_to_seller;
      break;
    case Disposition::Kind::to_buyer:
      esc.status = EscrowStatus::refunded_to_buyer;
      break;
    case Disposition::Kind::split: {
      if (disposition.seller_bps < 0 || disposition.seller_bps > 10000) {
        fail(ErrorCode::InvalidParams, "split fraction out of range");
      }
      to_seller = static_cast<Amount>(static_cast<__int128>(esc.amount) * disposition.seller_bps / 10000);
      esc.status = EscrowStatus::split;
      break;
    }
  }
  const Amount to_buyer = esc.amount - to_seller;
  Receipt receipt;
  if (to_seller > 0) {
    bal(seller, esc.token) += to_seller;
    receipt.lines.push_back({seller, esc.token, to_seller});
  }
  if (to_buyer > 0) {
    bal(esc.buyer, esc.token) += to_buyer;
    receipt.lines.push_back({esc.buyer, esc.token, to_buyer});
  }
  trace_.emit("ledger", "escrow_settle",
              {{"session", raw(session)},
               {"status", to_string(esc.status)},
               {"token", to_string(esc.token)},
               {"seller", raw(seller)},
               {"buyer", raw(esc.buyer)},
               {"to_seller", to_seller},
               {"to_buyer", to_buyer}});

  const auto& pref = account(seller).payout_preference;
  if (to_seller > 0 && pref && *pref != esc.token) {
    const Amount out = convert(seller, esc.token, *pref, to_seller);
    receipt.lines.push_back({seller, esc.token, -to_seller});
    receipt.lines.push_back({seller, *pref, out});
  }
  return receipt;
}

const EscrowAccount* Ledger::escrow(SessionId session) const {
  auto it = escrows_.find(session);
  return it == escrows_.end() ? nullptr : &it->second;
}

Amount Ledger::quote(TokenKind from, TokenKind to, Amount amount) const {
  if (from == to) return amount;
  const Rate& lzs_per_lzdc = config_.ledger.lzs_per_lzdc;
  if (from == TokenKind::LZS && to == TokenKind::LZDC) return lzs_per_lzdc.inverse().apply(amount);
  if (from == TokenKind::LZDC && to == TokenKind::LZS) return lzs_per_lzdc.apply(amount);
  fail(ErrorCode::UnsupportedToken, "only LZS <-> LZDC converts");
}

Amount Ledger::convert(AccountId account_id, TokenKind from, TokenKind to, Amount amount) {
  require_positive(amount);
  const Amount out = quote(from, to, amount);
  require_funds(account_id, from, amount);
  bal(account_id, from) -= amount;
  burned_[idx(from)] += amount;
  bal(account_id, to) += out;
  minted_[idx(to)] += out;
  trace_.emit("ledger", "convert",
              {{"account", raw(account_id)},
               {"from", to_string(from)},
               {"to", to_string(to)},
               {"amount_in", amount},
               {"amount_out", out}});
  return out;
}

void Ledger::bond(AccountId id, TokenKind token, Amount amount, std::string_view purpose) {
  require_positive(amount);
  require_funds(id, token, amount);
  auto& rec = mut(id);
  rec.balances[idx(token)] -= amount;
  rec.bonded[idx(token)] += amount;
  trace_.emit("ledger", "bond",
              {{"account", raw(id)}, {"token", to_string(token)}, {"amount", amount}, {"purpose", purpose}});
}

void Ledger::unbond(AccountId id, TokenKind token, Amount amount, std::string_view purpose) {
  require_positive(amount);
  auto& rec = mut(id);
  if (rec.bonded[idx(token)] < amount) fail(ErrorCode::InsufficientFunds, "bond too small");
  rec.bonded[idx(token)] -= amount;
  rec.balances[idx(token)] += amount;
  trace_.emit("ledger", "unbond",
              {{"account", raw(id)}, {"token", to_string(token)}, {"amount", amount}, {"purpose", purpose}});
}

Amount Ledger::slash_bond(Caller caller, AccountId id, TokenKind token, Amount amount, AccountId to) {
  if (caller != Caller::arbitration && caller != Caller::governance) {
    fail(ErrorCode::UnauthorizedCaller, "bond slash");
  }
  account(to);
  auto& rec = mut(id);
  const Amount taken = std::min(amount, rec.bonded[idx(token)]);
  if (taken <= 0) return 0;
  rec.bonded[idx(token)] -= taken;
  bal(to, token) += taken;
  trace_.emit("ledger", "bond_slash",
              {{"account", raw(id)}, {"token", to_string(token)}, {"amount", taken}, {"to", raw(to)}});
  return taken;
}

ConservationReport Ledger::conservation_report() const {
  ConservationReport report{};
  for (const auto& [id, rec] : accounts_) {
    for (auto token : kAllTokens) {
      report[idx(token)].balances += rec.balance(token);
      report[idx(token)].staked += rec.bond(token);
    }
    if (rec.stake && rec.stake->held()) report[idx(TokenKind::LZS)].staked += rec.stake->amount;
  }
  for (const auto& [sid, esc] : escrows_) {
    if (esc.status == EscrowStatus::locked) report[idx(esc.token)].escrow += esc.amount;
  }
  for (auto token : kAllTokens) {
    report[idx(token)].minted = minted_[idx(token)];
    report[idx(token)].burned = burned_[idx(token)];
  }
  return report;
}

void Ledger::check_conservation() const {
  const auto report = conservation_report();
  for (auto token : kAllTokens) {
    const auto& t = report[idx(token)];
    if (!t.conserved()) {
      fail(ErrorCode::InvariantViolation,
           "conservation broken for " + std::string(to_string(token)) + ": balances " +
               std::to_string(t.balances) + " + escrow " + std::to_string(t.escrow) + " + staked " +
               std::to_string(t.staked) + " != minted " + std::to_string(t.minted) + " - burned " +
               std::to_string(t.burned));
    }
  }
  for (const auto& [id, rec] : accounts_) {
    for (auto token : kAllTokens) {
      if (rec.balance(token) < 0 || rec.bond(token) < 0) {
        fail(ErrorCode::InvariantViolation, "negative balance on account " + std::to_string(raw(id)));
      }
    }
  }
}

Amount Ledger::supply(TokenKind token) const { return minted_[idx(token)] - burned_[idx(token)]; }

json Ledger::snapshot() const {
  json accounts = json::object();
  for (const auto& [id, rec] : accounts_) {
    json balances = json::object();
    json bonds = json::object();
    for (auto token : kAllTokens) {
      balances[std::string(to_string(token))] = rec.balance(token);
      if (rec.bond(token) != 0) bonds[std::string(to_string(token))] = rec.bond(token);
    }
    json entry = {{"label", rec.label}, {"kind", to_string(rec.kind)}, {"balances", balances}, {"bonds", bonds}};
    if (rec.stake) {
      entry["stake"] = {{"amount", rec.stake->amount},
                        {"start", rec.stake->start},
                        {"duration", rec.stake->duration},
                        {"status", to_string(rec.stake->status)}};
    } else {
      entry["stake"] = nullptr;
    }
    accounts[std::to_string(raw(id))] = std::move(entry);
  }
  json totals = json::object();
  const auto report = conservation_report();
  for (auto token : kAllTokens) {
    const auto& t = report[idx(token)];
    totals[std::string(to_string(token))] = {{"balances", t.balances}, {"escrow", t.escrow},
                                             {"staked", t.staked},     {"minted", t.minted},
                                             {"burned", t.burned}};
  }
  return {{"accounts", accounts}, {"totals", totals}};
}

}  // namespace market
