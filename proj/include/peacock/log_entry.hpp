#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "peacock/crypto.hpp"

namespace peacock::log {

// One "Name:'value'" pair as it appears in Enter/Exit records. Order matters.
struct NamedValue {
    std::string name;
    std::string value;
    bool operator==(const NamedValue&) const = default;
};

struct HeaderBody {
    std::string session_id;
    std::string vendor;
    std::string version;
    std::string release_date;
    bool operator==(const HeaderBody&) const = default;
};

enum class CallerKind { Guid, Path, Unknown };

struct CheckCallerBody {
    CallerKind kind = CallerKind::Guid;
    std::string identity;
    uint64_t start_address = 0;
    uint64_t end_address = 0;
    bool operator==(const CheckCallerBody&) const = default;
};

struct EnterBody {
    std::string service;
    uint64_t service_address = 0;
    std::vector<NamedValue> args;
    bool operator==(const EnterBody&) const = default;
};

struct ExitBody {
    std::string service;
    uint64_t service_address = 0;
    std::vector<NamedValue> outs;
    std::string ret_status;
    bool operator==(const ExitBody&) const = default;
};

struct HookCheckBody {
    std::string service;
    std::string hooked_by;
    bool whitelisted = false;
    bool operator==(const HookCheckBody&) const = default;
};

struct HaltBody {
    std::string reason;
    bool operator==(const HaltBody&) const = default;
};

using EntryBody =
    std::variant<HeaderBody, CheckCallerBody, EnterBody, ExitBody, HookCheckBody, HaltBody>;

struct RawLogEntry {
    uint64_t lid = 0;
    uint64_t t = 0;
    uint64_t cid = 0;
    EntryBody body;
    bool operator==(const RawLogEntry&) const = default;
};

// Renders the entry as one physical line:
//   (LID:267) (T:3897972787) (CID:147) Enter LocateProtocol - Service Address:'7F6AEB0E', ...
// Throws Error if a value contains a single quote (not representable).
std::string format_entry(const RawLogEntry& entry);

// Strict inverse of format_entry. Throws MalformedLine{offset, expected} on any deviation.
RawLogEntry parse_entry(std::string_view line);

// --- hash chain -------------------------------------------------------------
// PCR-style folding over log lines: state <- SHA256(state || SHA256(line)).
// Line bytes exclude the '\n' separator.

struct ChainState {
    crypto::Digest32 pcr{};  // initial state: 32 zero bytes
    bool operator==(const ChainState&) const = default;
};

ChainState chain_step(const ChainState& state, std::string_view line);
ChainState chain_evaluate(std::span<const std::string> lines, ChainState initial = {});

// Splits exported log text into lines; tolerates one trailing '\n'.
std::vector<std::string> split_lines(std::string_view text);

}  // namespace peacock::log
