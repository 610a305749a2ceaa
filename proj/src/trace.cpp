#include "market/trace.hpp"

#include <fstream>

namespace market {
namespace {

constexpr std::string_view kDigestKey = ",\"digest\":\"";

std::string body_of(const json& object) {
  std::string text = object.dump();
  text.pop_back();  // drop the closing brace; the digest member goes last
  return text;
}

}  // namespace

Trace::Trace(json header_fields) { set_header(std::move(header_fields)); }

void Trace::set_header(json header_fields) {
  if (!events_.empty()) throw std::logic_error("trace header is frozen once events exist");
  header_ = std::move(header_fields);
  if (!header_.is_object()) header_ = json::object();
  header_["trace_version"] = kTraceVersion;
  header_["hash"] = std::string(kHashName);
  header_["record"] = "header";
  const std::string body = body_of(header_);
  head_ = chain(Digest{}, body);
  header_line_ = seal(body, head_);
}

const TraceEvent& Trace::emit(std::string_view module, std::string_view kind, json payload) {
  TraceEvent ev;
  ev.seq = events_.size();
  ev.day = today_;
  ev.module = std::string(module);
  ev.kind = std::string(kind);
  ev.payload = std::move(payload);
  if (ev.payload.is_null()) ev.payload = json::object();

  json record = {{"seq", ev.seq},       {"day", ev.day},       {"module", ev.module},
                 {"kind", ev.kind},     {"payload", ev.payload}};
  const std::string body = body_of(record);
  head_ = chain(head_, body);
  ev.digest = head_;
  lines_.push_back(seal(body, head_));
  events_.push_back(std::move(ev));
  return events_.back();
}

std::string Trace::serialize() const {
  std::string out = header_line_;
  out.push_back('\n');
  for (const auto& line : lines_) {
    out += line;
    out.push_back('\n');
  }
  return out;
}

void Trace::write(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open trace output " + path.string());
  os << serialize();
}

bool Trace::split_line(std::string_view line, std::string_view& body, std::string_view& digest_hex) {
  const auto pos = line.rfind(kDigestKey);
  if (pos == std::string_view::npos) return false;
  const auto hex_start = pos + kDigestKey.size();
  // 64 hex chars, closing quote, closing brace, nothing else.
  if (line.size() != hex_start + 64 + 2) return false;
  if (line[hex_start + 64] != '"' || line[hex_start + 65] != '}') return false;
  body = line.substr(0, pos);
  digest_hex = line.substr(hex_start, 64);
  return true;
}

std::string Trace::seal(std::string_view body, const Digest& digest) {
  std::string line(body);
  line += kDigestKey;
  line += to_hex(digest);
  line += "\"}";
  return line;
}

}  // namespace market
