#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "peacock/event_parser.hpp"

namespace peacock::rules {

enum class Severity { Info, Medium, High, Critical };

Severity severity_from_text(std::string_view text);  // throws RuleSchemaError
std::string_view severity_text(Severity s);
bool severity_at_least(Severity s, Severity threshold);

enum class Op { Eq, Neq, Glob, Exists };

struct Predicate {
    std::string field;
    Op op = Op::Eq;
    std::string value;
};

// Boolean tree over predicates: all/any/not combinators, leaves are predicates.
struct Node {
    enum class Kind { All, Any, Not, Pred };
    Kind kind = Kind::All;
    std::vector<Node> children;  // All/Any: 0..n, Not: exactly 1
    Predicate pred;              // for Kind::Pred
};

// A rate clause: a group alerts only if some window of `window_ticks`
// contains at least `min_count` of its matched events.
struct BurstSpec {
    uint64_t window_ticks = 10000;
    std::size_t min_count = 3;
};

struct DetectionRule {
    std::string name;
    Severity severity = Severity::Info;
    Node where;                         // empty All node matches every event
    std::vector<std::string> group_by;  // ordered ParsedEvent field names
    std::string description;
    std::optional<BurstSpec> burst;
};

struct AlertGroup {
    std::vector<std::pair<std::string, std::string>> keys;  // field -> value, group_by order
    std::size_t count = 0;
};

struct Alert {
    std::string rule;
    Severity severity = Severity::Info;
    std::string device_id;
    std::string session_id;
    std::vector<AlertGroup> groups;  // count-descending, then keys lexicographic
};

// Case-insensitive glob: '*' matches any run (including across separators),
// '?' matches exactly one character.
bool match_glob(std::string_view pattern, std::string_view value);

// ParsedEvent field access by name; integers render decimal, flags as
// "true"/"false". Throws RuleSchemaError for unknown fields.
std::string event_field(const events::ParsedEvent& e, std::string_view field);
bool is_event_field(std::string_view field);

DetectionRule compile_rule(const std::string& json_text);
std::vector<DetectionRule> compile_rules(const std::string& json_text);  // object or array
std::vector<DetectionRule> load_rules_dir(const std::string& dir);

bool rule_matches(const DetectionRule& rule, const events::ParsedEvent& e);

std::vector<Alert> evaluate(std::span<const DetectionRule> rules,
                            std::span<const events::ParsedEvent> events,
                            const std::string& device_id, const std::string& session_id);

// The embedded corpus: R1..R10 covering the four bootkit behavior profiles
// plus the generic hook / NVRAM / ESP-origin detections.
const std::vector<DetectionRule>& builtin_rules();

std::string alert_to_ndjson(const Alert& a);

}  // namespace peacock::rules
