#pragma once

// Random well-formed log entries / transcripts for property tests.

#include <random>
#include <string>
#include <vector>

#include "peacock/log_entry.hpp"

namespace gen {

using peacock::log::RawLogEntry;

inline std::string random_guid(std::mt19937_64& rng) {
    static constexpr char digits[] = "0123456789ABCDEF";
    std::string out;
    for (int i = 0; i < 36; ++i) {
        if (i == 8 || i == 13 || i == 18 || i == 23)
            out.push_back('-');
        else
            out.push_back(digits[rng() % 16]);
    }
    return out;
}

inline std::string random_value(std::mt19937_64& rng, std::size_t max_len = 12) {
    static constexpr char alphabet[] =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789\\/.:-_ ";
    std::size_t len = rng() % (max_len + 1);
    std::string out;
    for (std::size_t i = 0; i < len; ++i) out.push_back(alphabet[rng() % (sizeof(alphabet) - 2)]);
    return out;
}

inline std::string random_name(std::mt19937_64& rng) {
    static constexpr char head[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    static constexpr char tail[] = "abcdefghijklmnopqrstuvwxyz0123456789";
    std::string out;
    out.push_back(head[rng() % 26]);
    std::size_t len = rng() % 8;
    for (std::size_t i = 0; i < len; ++i) out.push_back(tail[rng() % (sizeof(tail) - 1)]);
    return out;
}

inline std::vector<peacock::log::NamedValue> random_pairs(std::mt19937_64& rng, std::size_t max_n) {
    std::vector<peacock::log::NamedValue> out;
    std::size_t n = rng() % (max_n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        auto name = random_name(rng);
        if (name == "RetStatus") name = "Ret";  // reserved trailing pair in Exit records
        out.push_back({name, random_value(rng)});
    }
    return out;
}

inline RawLogEntry random_entry(std::mt19937_64& rng, uint64_t lid) {
    RawLogEntry e;
    e.lid = lid;
    e.t = rng() % 4000000000ULL;
    e.cid = rng() % 500;
    switch (rng() % 6) {
        case 0: {
            peacock::log::HeaderBody h;
            h.session_id = random_guid(rng);
            h.vendor = "Vendor " + random_value(rng, 6);
            h.version = random_value(rng, 6);
            h.release_date = "2024-05-01";
            e.body = h;
            break;
        }
        case 1: {
            peacock::log::CheckCallerBody c;
            switch (rng() % 3) {
                case 0:
                    c.kind = peacock::log::CallerKind::Guid;
                    c.identity = random_guid(rng);
                    break;
                case 1:
                    c.kind = peacock::log::CallerKind::Path;
                    c.identity = "\\EFI\\" + random_name(rng) + "\\" + random_name(rng) + ".efi";
                    break;
                default:
                    c.kind = peacock::log::CallerKind::Unknown;
                    c.identity = "Unknown";
                    break;
            }
            c.start_address = rng();
            c.end_address = rng();
            e.body = c;
            break;
        }
        case 2: {
            peacock::log::EnterBody b;
            b.service = random_name(rng);
            b.service_address = rng() % 0xFFFFFFFF;
            b.args = random_pairs(rng, 4);
            e.body = b;
            break;
        }
        case 3: {
            peacock::log::ExitBody b;
            b.service = random_name(rng);
            b.service_address = rng() % 0xFFFFFFFF;
            b.outs = random_pairs(rng, 3);
            b.ret_status = (rng() % 2) ? "Success" : "Not Found";
            e.body = b;
            break;
        }
        case 4: {
            peacock::log::HookCheckBody b;
            b.service = random_name(rng);
            b.hooked_by = "\\EFI\\" + random_name(rng) + ".efi";
            b.whitelisted = rng() % 2;
            e.body = b;
            break;
        }
        default: {
            peacock::log::HaltBody b;
            b.reason = "unauthorized hook on " + random_name(rng);
            e.body = b;
            break;
        }
    }
    return e;
}

inline std::vector<std::string> random_transcript(std::mt19937_64& rng, std::size_t n_lines) {
    std::vector<std::string> lines;
    lines.reserve(n_lines);
    for (std::size_t i = 0; i < n_lines; ++i)
        lines.push_back(peacock::log::format_entry(random_entry(rng, i + 1)));
    return lines;
}

}  // namespace gen
