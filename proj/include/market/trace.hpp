#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "market/digest.hpp"
#include "market/types.hpp"

namespace market {

using json = nlohmann::json;

inline constexpr int kTraceVersion = 1;

struct TraceEvent {
  std::uint64_t seq = 0;
  Day day = 0;
  std::string module;
  std::string kind;
  json payload;
  Digest digest{};
};

/// Append-only, hash-chained event log.
///
/// Serialized as JSON lines. The first line is a header record; every line
/// ends with a "digest" member holding sha256(previous digest || line bytes
/// before ",\"digest\""). The header's own digest (chained from 32 zero
/// bytes) seeds the chain, so a change to any byte of the file is caught.
class Trace {
 public:
  explicit Trace(json header_fields = json::object());

  /// Replaces the header fields. Only legal before the first event.
  void set_header(json header_fields);

  Day today() const { return today_; }
  void set_day(Day day) { today_ = day; }

  const TraceEvent& emit(std::string_view module, std::string_view kind, json payload);

  const std::vector<TraceEvent>& events() const { return events_; }
  const std::vector<std::string>& lines() const { return lines_; }
  const std::string& header_line() const { return header_line_; }
  const json& header() const { return header_; }
  const Digest& head() const { return head_; }

  /// Whole file contents, newline-terminated.
  std::string serialize() const;
  void write(const std::filesystem::path& path) const;

  /// Splits a trace line at the digest member. Returns false when the line
  /// does not end in a well-formed digest member.
  static bool split_line(std::string_view line, std::string_view& body, std::string_view& digest_hex);

  static std::string seal(std::string_view body, const Digest& digest);

 private:
  json header_;
  std::string header_line_;
  std::vector<std::string> lines_;
  std::vector<TraceEvent> events_;
  Digest head_{};
  Day today_ = 0;
};

}  // namespace market
