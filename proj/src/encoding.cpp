#include "peacock/encoding.hpp"

#include <array>
#include <cctype>

#include "peacock/errors.hpp"

namespace peacock::encoding {

std::string to_hex(std::span<const uint8_t> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0F]);
    }
    return out;
}

static int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::vector<uint8_t> from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw Error("hex string has odd length");
    std::vector<uint8_t> out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = hex_nibble(hex[2 * i]);
        int lo = hex_nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw Error("invalid hex digit");
        out[i] = static_cast<uint8_t>((hi << 4) | lo);
    }
    return out;
}

static constexpr char b64_alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(std::span<const uint8_t> bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 3 <= bytes.size()) {
        uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out.push_back(b64_alphabet[(v >> 18) & 63]);
        out.push_back(b64_alphabet[(v >> 12) & 63]);
        out.push_back(b64_alphabet[(v >> 6) & 63]);
        out.push_back(b64_alphabet[v & 63]);
        i += 3;
    }
    std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        uint32_t v = bytes[i] << 16;
        out.push_back(b64_alphabet[(v >> 18) & 63]);
        out.push_back(b64_alphabet[(v >> 12) & 63]);
        out.append("==");
    } else if (rest == 2) {
        uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out.push_back(b64_alphabet[(v >> 18) & 63]);
        out.push_back(b64_alphabet[(v >> 12) & 63]);
        out.push_back(b64_alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

static int b64_value(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}

std::vector<uint8_t> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) throw Error("base64 length not a multiple of 4");
    std::vector<uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int vals[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            char c = text[i + k];
            if (c == '=') {
                if (i + 4 != text.size() || k < 2) throw Error("misplaced base64 padding");
                vals[k] = 0;
                ++pad;
            } else {
                if (pad > 0) throw Error("data after base64 padding");
                vals[k] = b64_value(c);
                if (vals[k] < 0) throw Error("invalid base64 character");
            }
        }
        uint32_t v = (vals[0] << 18) | (vals[1] << 12) | (vals[2] << 6) | vals[3];
        out.push_back(static_cast<uint8_t>((v >> 16) & 0xFF));
        if (pad < 2) out.push_back(static_cast<uint8_t>((v >> 8) & 0xFF));
        if (pad < 1) out.push_back(static_cast<uint8_t>(v & 0xFF));
    }
    return out;
}

std::string address_hex(uint64_t value) {
    if (value == 0) return "0";
    static constexpr char digits[] = "0123456789ABCDEF";
    char buf[16];
    int pos = 16;
    while (value != 0) {
        buf[--pos] = digits[value & 0xF];
        value >>= 4;
    }
    return std::string(buf + pos, buf + 16);
}

uint64_t parse_address(std::string_view text) {
    if (text.size() >= 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X'))
        text.remove_prefix(2);
    if (text.empty() || text.size() > 16) throw Error("invalid address: '" + std::string(text) + "'");
    uint64_t value = 0;
    for (char c : text) {
        int v = hex_nibble(c);
        if (v < 0) throw Error("invalid address: '" + std::string(text) + "'");
        value = (value << 4) | static_cast<uint64_t>(v);
    }
    return value;
}

}  // namespace peacock::encoding
