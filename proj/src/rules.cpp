#include "peacock/rules.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "peacock/errors.hpp"

namespace peacock::rules {

namespace {

using json = nlohmann::ordered_json;

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool ci_equals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (lower(a[i]) != lower(b[i])) return false;
    return true;
}

constexpr std::string_view kFields[] = {
    "original_log",     "uefi_timestamp",
    "event_type",       "caller",
    "caller_start_address", "caller_end_address",
    "hooked_service",   "hooked_by_driver",
    "whitelisted_hooking_driver", "status",
    "args",             "service_address",
    "session_id",       "log_id",
    "call_id",
};

Op op_from_text(const std::string& text, const std::string& path) {
    if (text == "eq") return Op::Eq;
    if (text == "neq") return Op::Neq;
    if (text == "glob") return Op::Glob;
    if (text == "exists") return Op::Exists;
    throw RuleSchemaError(path, "unknown op '" + text + "' (expected eq/neq/glob/exists)");
}

Node compile_node(const json& j, const std::string& path) {
    if (!j.is_object()) throw RuleSchemaError(path, "where node must be an object");

    Node node;
    if (j.contains("all") || j.contains("any")) {
        bool is_all = j.contains("all");
        if (j.size() != 1)
            throw RuleSchemaError(path, "combinator node must have exactly one key");
        node.kind = is_all ? Node::Kind::All : Node::Kind::Any;
        const auto& arr = j.at(is_all ? "all" : "any");
        if (!arr.is_array()) throw RuleSchemaError(path, "combinator body must be an array");
        std::size_t i = 0;
        for (const auto& child : arr) {
            node.children.push_back(
                compile_node(child, path + (is_all ? ".all[" : ".any[") + std::to_string(i) + "]"));
            ++i;
        }
        return node;
    }
    if (j.contains("not")) {
        if (j.size() != 1) throw RuleSchemaError(path, "not node must have exactly one key");
        node.kind = Node::Kind::Not;
        node.children.push_back(compile_node(j.at("not"), path + ".not"));
        return node;
    }
    if (j.empty()) return node;  // vacuous: matches all

    node.kind = Node::Kind::Pred;
    if (!j.contains("field")) throw RuleSchemaError(path, "predicate missing 'field'");
    if (!j.contains("op")) throw RuleSchemaError(path, "predicate missing 'op'");
    node.pred.field = j.at("field").get<std::string>();
    if (!is_event_field(node.pred.field))
        throw RuleSchemaError(path + ".field", "unknown event field '" + node.pred.field + "'");
    node.pred.op = op_from_text(j.at("op").get<std::string>(), path + ".op");
    if (node.pred.op != Op::Exists) {
        if (!j.contains("value")) throw RuleSchemaError(path, "predicate missing 'value'");
        const auto& v = j.at("value");
        if (v.is_string())
            node.pred.value = v.get<std::string>();
        else if (v.is_boolean())
            node.pred.value = v.get<bool>() ? "true" : "false";
        else if (v.is_number_unsigned())
            node.pred.value = std::to_string(v.get<uint64_t>());
        else
            throw RuleSchemaError(path + ".value", "value must be a string, bool, or integer");
    }
    for (const auto& [key, _] : j.items())
        if (key != "field" && key != "op" && key != "value")
            throw RuleSchemaError(path + "." + key, "unknown predicate key");
    return node;
}

bool eval_node(const Node& node, const events::ParsedEvent& e) {
    switch (node.kind) {
        case Node::Kind::All:
            return std::all_of(node.children.begin(), node.children.end(),
                               [&](const Node& n) { return eval_node(n, e); });
        case Node::Kind::Any:
            return std::any_of(node.children.begin(), node.children.end(),
                               [&](const Node& n) { return eval_node(n, e); });
        case Node::Kind::Not:
            return !eval_node(node.children.front(), e);
        case Node::Kind::Pred: {
            std::string value = event_field(e, node.pred.field);
            switch (node.pred.op) {
                case Op::Eq: return ci_equals(value, node.pred.value);
                case Op::Neq: return !ci_equals(value, node.pred.value);
                case Op::Glob: return match_glob(node.pred.value, value);
                case Op::Exists: return !value.empty();
            }
        }
    }
    return false;
}

DetectionRule compile_rule_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw RuleSchemaError(path, "rule must be an object");
    DetectionRule rule;
    if (!j.contains("name")) throw RuleSchemaError(path, "rule missing 'name'");
    rule.name = j.at("name").get<std::string>();
    if (!j.contains("severity")) throw RuleSchemaError(path + ".severity", "rule missing 'severity'");
    rule.severity = severity_from_text(j.at("severity").get<std::string>());
    rule.description = j.value("description", std::string{});
    if (j.contains("where")) rule.where = compile_node(j.at("where"), path + ".where");
    if (j.contains("group_by")) {
        for (const auto& f : j.at("group_by")) {
            std::string field = f.get<std::string>();
            if (!is_event_field(field))
                throw RuleSchemaError(path + ".group_by", "unknown event field '" + field + "'");
            rule.group_by.push_back(std::move(field));
        }
    }
    if (j.contains("burst")) {
        const auto& b = j.at("burst");
        BurstSpec burst;
        burst.window_ticks = b.value("window_ticks", uint64_t{10000});
        burst.min_count = b.value("min_count", std::size_t{3});
        if (burst.min_count == 0) throw RuleSchemaError(path + ".burst", "min_count must be >= 1");
        rule.burst = burst;
    }
    for (const auto& [key, _] : j.items())
        if (key != "name" && key != "severity" && key != "description" && key != "where" &&
            key != "group_by" && key != "burst")
            throw RuleSchemaError(path + "." + key, "unknown rule key");
    return rule;
}

}  // namespace

Severity severity_from_text(std::string_view text) {
    if (text == "info") return Severity::Info;
    if (text == "medium") return Severity::Medium;
    if (text == "high") return Severity::High;
    if (text == "critical") return Severity::Critical;
    throw RuleSchemaError("severity", "unknown severity '" + std::string(text) + "'");
}

std::string_view severity_text(Severity s) {
    switch (s) {
        case Severity::Info: return "info";
        case Severity::Medium: return "medium";
        case Severity::High: return "high";
        case Severity::Critical: return "critical";
    }
    return "info";
}

bool severity_at_least(Severity s, Severity threshold) {
    return static_cast<int>(s) >= static_cast<int>(threshold);
}

bool match_glob(std::string_view pattern, std::string_view value) {
    // Two-pointer match with star backtracking, case-insensitive.
    std::size_t p = 0, v = 0;
    std::size_t star = std::string_view::npos, star_v = 0;
    while (v < value.size()) {
        if (p < pattern.size() &&
            (pattern[p] == '?' || lower(pattern[p]) == lower(value[v]))) {
            ++p;
            ++v;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            star_v = v;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            v = ++star_v;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

bool is_event_field(std::string_view field) {
    return std::find(std::begin(kFields), std::end(kFields), field) != std::end(kFields);
}

std::string event_field(const events::ParsedEvent& e, std::string_view field) {
    if (field == "original_log") return e.original_log;
    if (field == "uefi_timestamp") return std::to_string(e.uefi_timestamp);
    if (field == "event_type") return e.event_type;
    if (field == "caller") return e.caller;
    if (field == "caller_start_address") return e.caller_start_address;
    if (field == "caller_end_address") return e.caller_end_address;
    if (field == "hooked_service") return e.hooked_service ? "true" : "false";
    if (field == "hooked_by_driver") return e.hooked_by_driver;
    if (field == "whitelisted_hooking_driver") return e.whitelisted_hooking_driver ? "true" : "false";
    if (field == "status") return e.status;
    if (field == "args") return e.args;
    if (field == "service_address") return e.service_address;
    if (field == "session_id") return e.session_id;
    if (field == "log_id") return std::to_string(e.log_id);
    if (field == "call_id") return std::to_string(e.call_id);
    throw RuleSchemaError(std::string(field), "unknown event field");
}

DetectionRule compile_rule(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw RuleSchemaError("$", std::string("invalid JSON: ") + e.what());
    }
    return compile_rule_json(j, "$");
}

std::vector<DetectionRule> compile_rules(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw RuleSchemaError("$", std::string("invalid JSON: ") + e.what());
    }
    std::vector<DetectionRule> rules;
    if (j.is_array()) {
        std::size_t i = 0;
        for (const auto& item : j)
            rules.push_back(compile_rule_json(item, "$[" + std::to_string(i++) + "]"));
    } else {
        rules.push_back(compile_rule_json(j, "$"));
    }
    return rules;
}

std::vector<DetectionRule> load_rules_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw IoError("rules directory not found: " + dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<DetectionRule> rules;
    for (const auto& file : files) {
        std::ifstream in(file);
        if (!in) throw IoError("cannot read rule file: " + file.string());
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        try {
            auto batch = compile_rules(text);
            rules.insert(rules.end(), std::make_move_iterator(batch.begin()),
                         std::make_move_iterator(batch.end()));
        } catch (const RuleSchemaError& e) {
            throw RuleSchemaError(file.filename().string() + ":" + e.path, e.message);
        }
    }
    return rules;
}

bool rule_matches(const DetectionRule& rule, const events::ParsedEvent& e) {
    return eval_node(rule.where, e);
}

std::vector<Alert> evaluate(std::span<const DetectionRule> rules,
                            std::span<const events::ParsedEvent> events,
                            const std::string& device_id, const std::string& session_id) {
    std::vector<Alert> alerts;
    for (const auto& rule : rules) {
        std::map<std::vector<std::pair<std::string, std::string>>, std::vector<std::size_t>> groups;
        for (std::size_t i = 0; i < events.size(); ++i) {
            if (!rule_matches(rule, events[i])) continue;
            std::vector<std::pair<std::string, std::string>> key;
            key.reserve(rule.group_by.size());
            for (const auto& f : rule.group_by) key.emplace_back(f, event_field(events[i], f));
            groups[std::move(key)].push_back(i);
        }

        if (rule.burst) {
            for (auto it = groups.begin(); it != groups.end();) {
                auto ticks_of = [&](std::size_t idx) { return events[idx].uefi_timestamp; };
                std::vector<uint64_t> ticks;
                ticks.reserve(it->second.size());
                for (auto idx : it->second) ticks.push_back(ticks_of(idx));
                std::sort(ticks.begin(), ticks.end());
                bool bursty = false;
                std::size_t need = rule.burst->min_count;
                for (std::size_t i = 0; i + need <= ticks.size(); ++i)
                    if (ticks[i + need - 1] - ticks[i] <= rule.burst->window_ticks) {
                        bursty = true;
                        break;
                    }
                it = bursty ? std::next(it) : groups.erase(it);
            }
        }

        if (groups.empty()) continue;
        Alert alert;
        alert.rule = rule.name;
        alert.severity = rule.severity;
        alert.device_id = device_id;
        alert.session_id = session_id;
        for (auto& [key, indices] : groups) alert.groups.push_back({key, indices.size()});
        std::sort(alert.groups.begin(), alert.groups.end(),
                  [](const AlertGroup& a, const AlertGroup& b) {
                      if (a.count != b.count) return a.count > b.count;
                      return a.keys < b.keys;
                  });
        alerts.push_back(std::move(alert));
    }
    return alerts;
}

std::string alert_to_ndjson(const Alert& a) {
    json j;
    j["rule"] = a.rule;
    j["severity"] = std::string(severity_text(a.severity));
    j["device_id"] = a.device_id;
    j["session_id"] = a.session_id;
    j["groups"] = json::array();
    for (const auto& g : a.groups) {
        json keys = json::object();
        for (const auto& [field, value] : g.keys) keys[field] = value;
        j["groups"].push_back({{"keys", std::move(keys)}, {"count", g.count}});
    }
    return j.dump();
}

const std::vector<DetectionRule>& builtin_rules() {
    static const std::vector<DetectionRule> corpus = [] {
        // Raw string below is JSON; backslashes in glob patterns are escaped
        // once for JSON, so "\\EFI*" is the pattern \EFI*.
        static constexpr char kCorpus[] = R"RULES([
{
  "name": "R1-esp-service-hook",
  "severity": "high",
  "description": "Service table hooking by a driver loaded from the EFI System Partition",
  "where": {"all": [
    {"field": "hooked_service", "op": "eq", "value": "true"},
    {"field": "hooked_by_driver", "op": "glob", "value": "\\EFI*"},
    {"field": "whitelisted_hooking_driver", "op": "eq", "value": "false"}
  ]},
  "group_by": ["caller", "caller_start_address", "caller_end_address", "hooked_by_driver", "whitelisted_hooking_driver"]
},
{
  "name": "R2-grub-on-windows",
  "severity": "high",
  "description": "LoadImage/StartImage events involving grubx64.efi in a Windows boot sequence",
  "where": {"all": [
    {"any": [
      {"field": "event_type", "op": "eq", "value": "LoadImage"},
      {"field": "event_type", "op": "eq", "value": "StartImage"}
    ]},
    {"field": "args", "op": "glob", "value": "*grubx64.efi*"}
  ]},
  "group_by": ["caller", "args", "status", "event_type"]
},
{
  "name": "R3-ready-to-boot-registration",
  "severity": "high",
  "description": "READY_TO_BOOT event callback registration by a non-whitelisted component",
  "where": {"all": [
    {"field": "event_type", "op": "eq", "value": "CreateEventEx"},
    {"field": "args", "op": "glob", "value": "*7CE88FB3-4BD7-4679-87A8-A8D8DEE50D2B*"},
    {"not": {"any": [
      {"field": "caller", "op": "eq", "value": "6D33944A-EC75-4855-A54D-809C75241F6C"}
    ]}}
  ]},
  "group_by": ["caller", "args"]
},
{
  "name": "R4-fta-nvram-marker",
  "severity": "high",
  "description": "Creation or access of the short-named fTA NVRAM infection marker",
  "where": {"all": [
    {"any": [
      {"field": "event_type", "op": "eq", "value": "GetVariable"},
      {"field": "event_type", "op": "eq", "value": "SetVariable"}
    ]},
    {"field": "args", "op": "glob", "value": "*VariableName:'fTA'*"}
  ]},
  "group_by": ["caller", "event_type", "args", "status"]
},
{
  "name": "R5-unauthorized-hook",
  "severity": "critical",
  "description": "Service call through a table entry hooked by a non-whitelisted component",
  "where": {"all": [
    {"field": "hooked_service", "op": "eq", "value": "true"},
    {"field": "whitelisted_hooking_driver", "op": "eq", "value": "false"}
  ]},
  "group_by": ["event_type", "hooked_by_driver"]
},
{
  "name": "R6-moklist-write",
  "severity": "high",
  "description": "MokList NVRAM variable written by a caller outside the MOK management allowlist",
  "where": {"all": [
    {"field": "event_type", "op": "eq", "value": "SetVariable"},
    {"field": "args", "op": "glob", "value": "*VariableName:'MokList'*"},
    {"not": {"any": [
      {"field": "caller", "op": "eq", "value": "\\EFI\\ubuntu\\shimx64.efi"},
      {"field": "caller", "op": "eq", "value": "\\EFI\\ubuntu\\mmx64.efi"}
    ]}}
  ]},
  "group_by": ["caller", "args"]
},
{
  "name": "R7-nonstandard-esp-dir",
  "severity": "high",
  "description": "Windows boot binaries loaded from a nonstandard ESP directory such as ESP:\\system32\\",
  "where": {"all": [
    {"any": [
      {"field": "event_type", "op": "eq", "value": "LoadImage"},
      {"field": "event_type", "op": "eq", "value": "StartImage"}
    ]},
    {"field": "args", "op": "glob", "value": "*\\system32\\*"}
  ]},
  "group_by": ["caller", "args"]
},
{
  "name": "R8-vbs-policy-disable",
  "severity": "high",
  "description": "VbsPolicyDisable NVRAM variable written during boot",
  "where": {"all": [
    {"field": "event_type", "op": "eq", "value": "SetVariable"},
    {"field": "args", "op": "glob", "value": "*VariableName:'VbsPolicyDisable'*"}
  ]},
  "group_by": ["caller", "args"]
},
{
  "name": "R9-diskio-enumeration-burst",
  "severity": "medium",
  "description": "Rapid DiskIo/BlockIo protocol enumeration by one caller (default: >=3 events within 10000 ticks)",
  "where": {"all": [
    {"any": [
      {"field": "event_type", "op": "eq", "value": "LocateHandleBuffer"},
      {"field": "event_type", "op": "eq", "value": "OpenProtocol"}
    ]},
    {"any": [
      {"field": "args", "op": "glob", "value": "*964E5B21-6459-11D2-8E39-00A0C969723B*"},
      {"field": "args", "op": "glob", "value": "*CE345171-BA0B-11D2-8E4F-00A0C969723B*"}
    ]}
  ]},
  "group_by": ["caller"],
  "burst": {"window_ticks": 10000, "min_count": 3}
},
{
  "name": "R10-esp-origin-image",
  "severity": "info",
  "description": "Image loaded or started from the EFI System Partition (legitimate bootloaders also match)",
  "where": {"all": [
    {"any": [
      {"field": "event_type", "op": "eq", "value": "LoadImage"},
      {"field": "event_type", "op": "eq", "value": "StartImage"}
    ]},
    {"any": [
      {"field": "args", "op": "glob", "value": "*Path:'\\EFI\\*"},
      {"field": "args", "op": "glob", "value": "*Path:'ESP:*"}
    ]}
  ]},
  "group_by": ["caller", "args"]
}
])RULES";
        return compile_rules(kCorpus);
    }();
    return corpus;
}

}  // namespace peacock::rules
