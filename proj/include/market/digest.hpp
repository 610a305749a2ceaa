#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace market {

/// SHA-256, used for ballot commitments and the trace hash chain.
using Digest = std::array<std::uint8_t, 32>;

inline constexpr std::string_view kHashName = "sha256";

Digest sha256(std::span<const std::uint8_t> bytes);
Digest sha256(std::string_view text);

/// sha256(prev || text), the trace chaining step.
Digest chain(const Digest& prev, std::string_view text);

std::string to_hex(std::span<const std::uint8_t> bytes);
bool from_hex(std::string_view hex, std::span<std::uint8_t> out);

}  // namespace market
