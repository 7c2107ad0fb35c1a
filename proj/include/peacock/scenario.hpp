#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "peacock/log_entry.hpp"
#include "peacock/sim.hpp"

namespace peacock::sim {

struct Action {
    enum class Type {
        LoadImage,
        InvokeService,
        ExternalHook,
        SetVariable,
        GetVariable,
        CreateEventEx,
        DropEspFile,
    };
    Type type = Type::InvokeService;
    std::string actor;  // image identity of the acting component

    // LoadImage
    std::string target;
    // InvokeService
    std::string service;
    std::vector<log::NamedValue> args;
    std::optional<std::string> forced_status;
    // ExternalHook
    bool recompute_crc = true;
    // Set/GetVariable
    std::string variable_name;
    std::string vendor_guid;
    std::string data;
    // CreateEventEx
    std::string group_guid;
    // DropEspFile
    std::string path;
    std::string content;
};

struct Scenario {
    std::string name;
    FirmwareMeta firmware_meta;
    uint64_t tick_start = 0;
    uint64_t tick_stride = 997;
    std::vector<ImageDescriptor> images;
    std::vector<Action> actions;
};

// Parses the documented scenario JSON schema (see docs/scenario-format.md).
// Throws ScenarioFormatError / ScenarioReferenceError on invalid documents.
Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& scenario);

// Built-in scenario corpus; identical content ships under scenarios/.
std::vector<std::string> builtin_scenario_names();
const std::string& builtin_scenario_json(const std::string& name);  // throws Error if unknown
Scenario load_builtin_scenario(const std::string& name);

}  // namespace peacock::sim
