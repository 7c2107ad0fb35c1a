#include "peacock/runner.hpp"

#include <algorithm>
#include <map>

#include "peacock/encoding.hpp"
#include "peacock/errors.hpp"

namespace peacock::sim {

namespace {

// Argument schemas for the services modeled after the appendix descriptions;
// anything else accepts an opaque key/value list.
const std::map<std::string, std::vector<std::string>, std::less<>>& arg_schemas() {
    static const std::map<std::string, std::vector<std::string>, std::less<>> schemas = {
        {"CreateEvent", {"Type", "NotifyFunction", "NotifyContext", "TPL"}},
        {"CreateEventEx", {"Type", "NotifyFunction", "NotifyContext", "TPL", "EventGroup"}},
        {"LocateProtocol", {"Protocol", "Registration", "Interface"}},
        {"LocateDevicePath", {"Protocol", "DevicePath", "Device"}},
        {"HandleProtocol", {"Handle", "Protocol"}},
        {"OpenProtocol", {"Handle", "Protocol", "Interface", "Attributes"}},
        {"RegisterProtocolNotify", {"Protocol", "Event", "Registration"}},
        {"GetVariable", {"VariableName", "VendorGuid", "DataSize"}},
        {"SetVariable", {"VariableName", "VendorGuid", "Attributes", "DataSize", "Data"}},
        {"LoadImage", {"Path", "ParentImage", "BootPolicy"}},
        {"StartImage", {"ImageHandle", "Path"}},
    };
    return schemas;
}

void validate_args(const std::string& service, std::span<const log::NamedValue> args) {
    auto it = arg_schemas().find(service);
    if (it == arg_schemas().end()) return;
    for (const auto& nv : args) {
        if (std::find(it->second.begin(), it->second.end(), nv.name) == it->second.end())
            throw ScenarioFormatError("service " + service + " has no argument named " + nv.name);
    }
}

const log::NamedValue* find_arg(std::span<const log::NamedValue> args, std::string_view name) {
    for (const auto& nv : args)
        if (nv.name == name) return &nv;
    return nullptr;
}

// Built-in pass-through behavior: deterministic outs plus the environment
// side effects (NVRAM, event registrations).
agent::InvokeOutcome pass_through(SimEnvironment& env, const ImageDescriptor* caller,
                                  const std::string& service,
                                  std::span<const log::NamedValue> args,
                                  const std::optional<std::string>& forced_status) {
    agent::InvokeOutcome out;
    bool success = !forced_status || *forced_status == "Success";
    auto synth = [&] { return encoding::address_hex(env.next_object_address()); };

    if (service == "GetVariable") {
        const auto* name = find_arg(args, "VariableName");
        const auto* guid = find_arg(args, "VendorGuid");
        auto it = (name && guid) ? env.nvram.find({name->value, guid->value}) : env.nvram.end();
        if (!forced_status) success = it != env.nvram.end();
        if (success && it != env.nvram.end()) {
            out.outs = {{"DataSize", std::to_string(it->second.size())}, {"Data", it->second}};
        } else {
            out.outs = {{"DataSize", "0"}};
            if (!forced_status) out.status = "Not Found";
        }
    } else if (service == "SetVariable") {
        if (success) {
            const auto* name = find_arg(args, "VariableName");
            const auto* guid = find_arg(args, "VendorGuid");
            const auto* data = find_arg(args, "Data");
            if (name && guid) env.nvram[{name->value, guid->value}] = data ? data->value : "";
        }
    } else if (service == "CreateEvent" || service == "CreateEventEx") {
        if (success) {
            if (const auto* group = find_arg(args, "EventGroup"))
                env.event_registrations.push_back(
                    {group->value, caller ? caller->identity : "Unknown"});
            out.outs = {{"Event", synth()}};
        }
    } else if (service == "LoadImage") {
        if (success) out.outs = {{"ImageHandle", synth()}};
    } else if (service == "LocateProtocol" || service == "HandleProtocol" ||
               service == "OpenProtocol") {
        out.outs = {{"Interface", success ? synth() : "0"}};
    } else if (service == "LocateHandleBuffer") {
        if (success) out.outs = {{"NoHandles", "2"}, {"Buffer", synth()}};
        else out.outs = {{"NoHandles", "0"}};
    }

    if (forced_status) out.status = *forced_status;
    return out;
}

struct ChainWalk {
    SimEnvironment& env;
    agent::Agent* agent;
    const ImageDescriptor* caller;
    const std::string& service;
    std::span<const log::NamedValue> args;
    const std::optional<std::string>& forced_status;
    bool proxy_logged = false;

    agent::InvokeOutcome dispatch(HandlerId id) {
        const Handler& h = env.handler(id);
        switch (h.kind) {
            case Handler::Kind::External:
                // External hooks observe and forward; result forcing is
                // modeled at the invocation, not the hook.
                return dispatch(*h.forward);
            case Handler::Kind::AgentProxy: {
                HandlerId next = *h.forward;
                if (!agent || proxy_logged) return dispatch(next);
                proxy_logged = true;
                uint64_t service_address = env.handler(next).address;
                return agent->intercept(env, caller, service, service_address, args,
                                        [&] { return dispatch(next); });
            }
            case Handler::Kind::PassThrough:
                return pass_through(env, caller, service, args, forced_status);
        }
        throw Error("invalid handler kind");
    }
};

const ImageDescriptor* require_loaded(SimEnvironment& env, const std::string& identity) {
    const ImageDescriptor* img = env.find_loaded(identity);
    if (!img) throw ScenarioReferenceError("image not loaded: " + identity);
    return img;
}

}  // namespace

agent::InvokeOutcome invoke_service(SimEnvironment& env, agent::Agent* agent,
                                    const ImageDescriptor* caller, const std::string& service,
                                    std::vector<log::NamedValue> args,
                                    const std::optional<std::string>& forced_status) {
    ServiceTable& table = env.table_for(service);
    ServiceSlot* slot = table.find(service);
    if (!slot) throw UnknownService(service);
    validate_args(service, args);
    ChainWalk walk{env, agent, caller, service, args, forced_status};
    return walk.dispatch(slot->current_target);
}

RunResult run_scenario(SimEnvironment& env, const Scenario& scenario, agent::Agent* agent) {
    if (agent && !agent->installed())
        throw Error("agent must be installed before the scenario executes");

    // Firmware-volume images are platform core: present before any action.
    for (const auto& img : scenario.images)
        if (img.origin == Origin::FirmwareVolume && !env.find_loaded(img.identity))
            env.loaded_images.push_back(img);

    RunResult result;
    for (const auto& action : scenario.actions) {
        if (env.halted) break;
        const ImageDescriptor* actor = require_loaded(env, action.actor);

        switch (action.type) {
            case Action::Type::LoadImage: {
                const ImageDescriptor* target = nullptr;
                for (const auto& img : scenario.images)
                    if (img.identity == action.target) target = &img;
                if (!target)
                    throw ScenarioReferenceError("LoadImage target undeclared: " + action.target);
                std::vector<log::NamedValue> args = {{"Path", target->identity},
                                                     {"ParentImage", actor->identity}};
                auto outcome = invoke_service(env, agent, actor, "LoadImage", std::move(args),
                                              action.forced_status);
                if (outcome.status == "Success" && !env.find_loaded(target->identity))
                    env.loaded_images.push_back(*target);
                result.outcomes.push_back(std::move(outcome));
                break;
            }
            case Action::Type::InvokeService:
                result.outcomes.push_back(invoke_service(env, agent, actor, action.service,
                                                         action.args, action.forced_status));
                break;
            case Action::Type::ExternalHook:
                apply_external_hook(env, action.service, actor->identity, action.recompute_crc);
                break;
            case Action::Type::SetVariable: {
                std::vector<log::NamedValue> args = {
                    {"VariableName", action.variable_name},
                    {"VendorGuid", action.vendor_guid},
                    {"Attributes", "NV+BS+RT"},
                    {"DataSize", std::to_string(action.data.size())},
                    {"Data", action.data}};
                result.outcomes.push_back(invoke_service(env, agent, actor, "SetVariable",
                                                         std::move(args), action.forced_status));
                break;
            }
            case Action::Type::GetVariable: {
                std::vector<log::NamedValue> args = {{"VariableName", action.variable_name},
                                                     {"VendorGuid", action.vendor_guid}};
                result.outcomes.push_back(invoke_service(env, agent, actor, "GetVariable",
                                                         std::move(args), action.forced_status));
                break;
            }
            case Action::Type::CreateEventEx: {
                std::vector<log::NamedValue> args = {
                    {"Type", "EVT_NOTIFY_SIGNAL"},
                    {"NotifyFunction", encoding::address_hex(actor->start_address + 0x400)},
                    {"NotifyContext", "0"},
                    {"TPL", "TPL_CALLBACK"},
                    {"EventGroup", action.group_guid}};
                result.outcomes.push_back(invoke_service(env, agent, actor, "CreateEventEx",
                                                         std::move(args), action.forced_status));
                break;
            }
            case Action::Type::DropEspFile:
                env.esp_files[action.path] = action.content;
                break;
        }

        if (agent) agent->check_hook_integrity(env);
    }

    if (agent) {
        result.transcript = agent->transcript();
        result.lines = agent->transcript_lines();
    }
    result.halted = env.halted;
    return result;
}

}  // namespace peacock::sim
