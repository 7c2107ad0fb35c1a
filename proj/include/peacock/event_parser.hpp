#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace peacock::events {

// The fifteen-field structured record the server derives from one Enter
// record of a verified transcript.
struct ParsedEvent {
    std::string original_log;          // raw Enter line, byte-exact
    uint64_t uefi_timestamp = 0;
    std::string event_type;            // service name
    std::string caller;                // GUID or path, "Unknown" when unresolved
    std::string caller_start_address;  // uppercase hex, no prefix
    std::string caller_end_address;
    bool hooked_service = false;
    std::string hooked_by_driver;
    bool whitelisted_hooking_driver = false;
    std::string status;                // CID-matched Exit status, or "Incomplete"
    std::string args;                  // canonical "Name:'value', ..." text
    std::string service_address;
    std::string session_id;
    uint64_t log_id = 0;
    uint64_t call_id = 0;
};

std::string event_to_ndjson(const ParsedEvent& e);
ParsedEvent event_from_ndjson(const std::string& line);

// Transforms a raw transcript into one ParsedEvent per Enter record:
// status/outs joined by CID, caller fields from caller-identification records
// (events attach to the most recently identified caller), hook fields from
// the HookCheck state active at each event. Call only on verified logs;
// malformed lines surface as MalformedLine.
std::vector<ParsedEvent> parse_log(const std::string& raw_log, const std::string& device_id);

}  // namespace peacock::events
