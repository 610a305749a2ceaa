#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "market/scenario.hpp"

namespace market {

struct RunResult {
  std::string trace_text;  // the serialized trace, header first
  nlohmann::json summary;
  std::vector<std::string> expectation_failures;
  std::size_t rejected_ops = 0;
  bool aborted = false;  // an engine invariant failed; the trace ends with the diagnostic
  std::string abort_reason;
};

/// Runs a validated scenario to its horizon. A pure function of the
/// scenario bytes and the seed (the scenario's own unless overridden).
RunResult run_scenario(const Scenario& scenario, std::optional<std::uint64_t> seed_override = std::nullopt);

struct VerifyReport {
  bool ok = false;
  std::optional<ErrorCode> code;       // TamperedTrace, ValidationError or InvariantViolation
  std::optional<std::int64_t> bad_seq;  // first bad event; -1 is the header record
  std::string detail;
  std::size_t events = 0;
  std::size_t sessions = 0;
  std::size_t transitions = 0;
  bool replayed = false;  // the embedded scenario was re-executed and matched byte for byte

  nlohmann::json to_json() const;
};

/// Checks the hash chain, the record schema, ledger conservation at every
/// event, exchange and proposal transition legality, and terminal
/// soundness. When the header embeds the scenario, re-runs it on a fresh
/// engine and requires a byte-identical trace.
VerifyReport verify_trace(std::string_view text, bool replay = true);

/// Parses trace lines into event objects after checking the chain.
/// Throws ProtocolError(TamperedTrace) on the first bad record.
std::vector<nlohmann::json> read_trace_events(std::string_view text, nlohmann::json* header = nullptr);

/// Outcome tables recounted from a trace; with `governance`, proposal
/// lifecycle tables too.
nlohmann::json trace_report(const std::vector<nlohmann::json>& events, bool governance);
std::string render_report_text(const nlohmann::json& report);

}  // namespace market
