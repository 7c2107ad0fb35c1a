#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace peacock::encoding {

std::string to_hex(std::span<const uint8_t> bytes);            // lowercase, two chars per byte
std::vector<uint8_t> from_hex(std::string_view hex);           // throws Error on odd length / bad digit

std::string base64_encode(std::span<const uint8_t> bytes);
std::vector<uint8_t> base64_decode(std::string_view text);     // throws Error on bad input

// Addresses in log lines: minimal-width uppercase hex, no 0x prefix ("7EF78000", zero -> "0").
std::string address_hex(uint64_t value);
// Accepts bare uppercase/lowercase hex with or without a 0x prefix.
uint64_t parse_address(std::string_view text);

}  // namespace peacock::encoding
