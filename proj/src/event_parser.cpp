#include "peacock/event_parser.hpp"

#include <map>
#include <variant>

#include <nlohmann/json.hpp>

#include "peacock/encoding.hpp"
#include "peacock/errors.hpp"
#include "peacock/log_entry.hpp"

namespace peacock::events {

namespace {

using json = nlohmann::ordered_json;

std::string render_args(const std::vector<log::NamedValue>& args) {
    std::string out;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out += ", ";
        out += args[i].name + ":'" + args[i].value + "'";
    }
    return out;
}

struct HookState {
    bool hooked = false;
    std::string hooked_by;
    bool whitelisted = false;
};

}  // namespace

std::string event_to_ndjson(const ParsedEvent& e) {
    json j;
    j["original_log"] = e.original_log;
    j["uefi_timestamp"] = e.uefi_timestamp;
    j["event_type"] = e.event_type;
    j["caller"] = e.caller;
    j["caller_start_address"] = e.caller_start_address;
    j["caller_end_address"] = e.caller_end_address;
    j["hooked_service"] = e.hooked_service;
    j["hooked_by_driver"] = e.hooked_by_driver;
    j["whitelisted_hooking_driver"] = e.whitelisted_hooking_driver;
    j["status"] = e.status;
    j["args"] = e.args;
    j["service_address"] = e.service_address;
    j["session_id"] = e.session_id;
    j["log_id"] = e.log_id;
    j["call_id"] = e.call_id;
    return j.dump();
}

ParsedEvent event_from_ndjson(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw Error(std::string("invalid event JSON: ") + e.what());
    }
    try {
        ParsedEvent e;
        e.original_log = j.at("original_log").get<std::string>();
        e.uefi_timestamp = j.at("uefi_timestamp").get<uint64_t>();
        e.event_type = j.at("event_type").get<std::string>();
        e.caller = j.at("caller").get<std::string>();
        e.caller_start_address = j.at("caller_start_address").get<std::string>();
        e.caller_end_address = j.at("caller_end_address").get<std::string>();
        e.hooked_service = j.at("hooked_service").get<bool>();
        e.hooked_by_driver = j.at("hooked_by_driver").get<std::string>();
        e.whitelisted_hooking_driver = j.at("whitelisted_hooking_driver").get<bool>();
        e.status = j.at("status").get<std::string>();
        e.args = j.at("args").get<std::string>();
        e.service_address = j.at("service_address").get<std::string>();
        e.session_id = j.at("session_id").get<std::string>();
        e.log_id = j.at("log_id").get<uint64_t>();
        e.call_id = j.at("call_id").get<uint64_t>();
        return e;
    } catch (const json::exception& e) {
        throw Error(std::string("invalid event document: ") + e.what());
    }
}

std::vector<ParsedEvent> parse_log(const std::string& raw_log, const std::string& /*device_id*/) {
    auto lines = log::split_lines(raw_log);

    std::string session_id;
    struct CallerInfo {
        std::string identity;
        std::string start_hex;
        std::string end_hex;
    };
    CallerInfo current_caller{"Unknown", "0", "0"};
    std::map<std::string, HookState> hook_state;  // service -> active hook

    std::vector<ParsedEvent> out;
    std::map<uint64_t, std::size_t> open_calls;  // cid -> event index awaiting its Exit

    for (const auto& line : lines) {
        log::RawLogEntry entry = log::parse_entry(line);

        if (const auto* h = std::get_if<log::HeaderBody>(&entry.body)) {
            session_id = h->session_id;
        } else if (const auto* cc = std::get_if<log::CheckCallerBody>(&entry.body)) {
            current_caller = {cc->identity, encoding::address_hex(cc->start_address),
                              encoding::address_hex(cc->end_address)};
        } else if (const auto* hc = std::get_if<log::HookCheckBody>(&entry.body)) {
            hook_state[hc->service] = {true, hc->hooked_by, hc->whitelisted};
        } else if (const auto* e = std::get_if<log::EnterBody>(&entry.body)) {
            ParsedEvent ev;
            ev.original_log = line;
            ev.uefi_timestamp = entry.t;
            ev.event_type = e->service;
            ev.caller = current_caller.identity;
            ev.caller_start_address = current_caller.start_hex;
            ev.caller_end_address = current_caller.end_hex;
            if (auto it = hook_state.find(e->service); it != hook_state.end()) {
                ev.hooked_service = it->second.hooked;
                ev.hooked_by_driver = it->second.hooked_by;
                ev.whitelisted_hooking_driver = it->second.whitelisted;
            }
            ev.status = "Incomplete";
            ev.args = render_args(e->args);
            ev.service_address = encoding::address_hex(e->service_address);
            ev.session_id = session_id;
            ev.log_id = entry.lid;
            ev.call_id = entry.cid;
            open_calls[entry.cid] = out.size();
            out.push_back(std::move(ev));
        } else if (const auto* x = std::get_if<log::ExitBody>(&entry.body)) {
            if (auto it = open_calls.find(entry.cid); it != open_calls.end()) {
                out[it->second].status = x->ret_status;
                open_calls.erase(it);
            }
        }
        // Halt records carry no event payload.
    }
    return out;
}

}  // namespace peacock::events
