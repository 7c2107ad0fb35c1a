#include "peacock/scenario.hpp"

#include <nlohmann/json.hpp>

#include "peacock/encoding.hpp"
#include "peacock/errors.hpp"

namespace peacock::sim {

namespace {

using json = nlohmann::ordered_json;

Origin origin_from_text(const std::string& text) {
    if (text == "FirmwareVolume") return Origin::FirmwareVolume;
    if (text == "ESP") return Origin::Esp;
    if (text == "OpROM") return Origin::OpRom;
    if (text == "Shell") return Origin::Shell;
    throw ScenarioFormatError("unknown image origin: " + text);
}

std::string origin_to_text(Origin origin) {
    switch (origin) {
        case Origin::FirmwareVolume: return "FirmwareVolume";
        case Origin::Esp: return "ESP";
        case Origin::OpRom: return "OpROM";
        case Origin::Shell: return "Shell";
    }
    throw Error("invalid origin");
}

uint64_t address_field(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_number_unsigned()) return v.get<uint64_t>();
    if (v.is_string()) return encoding::parse_address(v.get<std::string>());
    throw ScenarioFormatError(std::string(key) + " must be a hex string or unsigned number");
}

Action::Type action_type_from_text(const std::string& text) {
    if (text == "LoadImage") return Action::Type::LoadImage;
    if (text == "InvokeService") return Action::Type::InvokeService;
    if (text == "ExternalHook") return Action::Type::ExternalHook;
    if (text == "SetVariable") return Action::Type::SetVariable;
    if (text == "GetVariable") return Action::Type::GetVariable;
    if (text == "CreateEventEx") return Action::Type::CreateEventEx;
    if (text == "DropEspFile") return Action::Type::DropEspFile;
    throw ScenarioFormatError("unknown action type: " + text);
}

std::string action_type_to_text(Action::Type type) {
    switch (type) {
        case Action::Type::LoadImage: return "LoadImage";
        case Action::Type::InvokeService: return "InvokeService";
        case Action::Type::ExternalHook: return "ExternalHook";
        case Action::Type::SetVariable: return "SetVariable";
        case Action::Type::GetVariable: return "GetVariable";
        case Action::Type::CreateEventEx: return "CreateEventEx";
        case Action::Type::DropEspFile: return "DropEspFile";
    }
    throw Error("invalid action type");
}

}  // namespace

Scenario scenario_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ScenarioFormatError(std::string("invalid scenario JSON: ") + e.what());
    }

    Scenario s;
    try {
        s.name = j.at("name").get<std::string>();
        const auto& meta = j.at("firmware_meta");
        s.firmware_meta.vendor = meta.at("vendor").get<std::string>();
        s.firmware_meta.version = meta.at("version").get<std::string>();
        s.firmware_meta.release_date = meta.at("release_date").get<std::string>();
        s.tick_start = j.value("tick_start", uint64_t{0});
        s.tick_stride = j.value("tick_stride", uint64_t{997});
        if (s.tick_stride == 0) throw ScenarioFormatError("tick_stride must be positive");

        for (const auto& img : j.at("images")) {
            ImageDescriptor d;
            d.identity = img.at("identity").get<std::string>();
            d.origin = origin_from_text(img.at("origin").get<std::string>());
            d.start_address = address_field(img, "start_address");
            d.end_address = address_field(img, "end_address");
            if (d.start_address >= d.end_address)
                throw ScenarioFormatError("image " + d.identity + ": start_address must be < end_address");
            s.images.push_back(std::move(d));
        }

        for (const auto& a : j.at("actions")) {
            Action act;
            act.type = action_type_from_text(a.at("type").get<std::string>());
            act.actor = a.at("actor").get<std::string>();
            switch (act.type) {
                case Action::Type::LoadImage:
                    act.target = a.at("image").get<std::string>();
                    if (a.contains("forced_status"))
                        act.forced_status = a.at("forced_status").get<std::string>();
                    break;
                case Action::Type::InvokeService:
                    act.service = a.at("service").get<std::string>();
                    if (a.contains("args"))
                        for (const auto& [name, value] : a.at("args").items())
                            act.args.push_back({name, value.get<std::string>()});
                    if (a.contains("forced_status"))
                        act.forced_status = a.at("forced_status").get<std::string>();
                    break;
                case Action::Type::ExternalHook:
                    act.service = a.at("service").get<std::string>();
                    act.recompute_crc = a.value("recompute_crc", true);
                    break;
                case Action::Type::SetVariable:
                    act.variable_name = a.at("name").get<std::string>();
                    act.vendor_guid = a.at("vendor_guid").get<std::string>();
                    act.data = a.value("data", std::string{});
                    if (a.contains("forced_status"))
                        act.forced_status = a.at("forced_status").get<std::string>();
                    break;
                case Action::Type::GetVariable:
                    act.variable_name = a.at("name").get<std::string>();
                    act.vendor_guid = a.at("vendor_guid").get<std::string>();
                    if (a.contains("forced_status"))
                        act.forced_status = a.at("forced_status").get<std::string>();
                    break;
                case Action::Type::CreateEventEx:
                    act.group_guid = a.at("group_guid").get<std::string>();
                    break;
                case Action::Type::DropEspFile:
                    act.path = a.at("path").get<std::string>();
                    act.content = a.value("content", std::string{});
                    break;
            }
            s.actions.push_back(std::move(act));
        }
    } catch (const json::exception& e) {
        throw ScenarioFormatError(std::string("invalid scenario document: ") + e.what());
    }

    // Every actor (and every hook/load reference) must name a declared image.
    auto declared = [&](const std::string& identity) {
        for (const auto& img : s.images)
            if (img.identity == identity) return true;
        return false;
    };
    for (const auto& act : s.actions) {
        if (!declared(act.actor))
            throw ScenarioReferenceError("scenario '" + s.name + "': actor references undeclared image: " +
                                         act.actor);
        if (act.type == Action::Type::LoadImage && !declared(act.target))
            throw ScenarioReferenceError("scenario '" + s.name + "': LoadImage target undeclared: " +
                                         act.target);
    }
    return s;
}

std::string scenario_to_json(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["firmware_meta"] = {{"vendor", s.firmware_meta.vendor},
                          {"version", s.firmware_meta.version},
                          {"release_date", s.firmware_meta.release_date}};
    j["tick_start"] = s.tick_start;
    j["tick_stride"] = s.tick_stride;
    j["images"] = json::array();
    for (const auto& img : s.images) {
        json o;
        o["identity"] = img.identity;
        o["origin"] = origin_to_text(img.origin);
        o["start_address"] = "0x" + encoding::address_hex(img.start_address);
        o["end_address"] = "0x" + encoding::address_hex(img.end_address);
        j["images"].push_back(std::move(o));
    }
    j["actions"] = json::array();
    for (const auto& act : s.actions) {
        json o;
        o["type"] = action_type_to_text(act.type);
        o["actor"] = act.actor;
        switch (act.type) {
            case Action::Type::LoadImage:
                o["image"] = act.target;
                break;
            case Action::Type::InvokeService: {
                o["service"] = act.service;
                json args = json::object();
                for (const auto& nv : act.args) args[nv.name] = nv.value;
                o["args"] = std::move(args);
                break;
            }
            case Action::Type::ExternalHook:
                o["service"] = act.service;
                o["recompute_crc"] = act.recompute_crc;
                break;
            case Action::Type::SetVariable:
                o["name"] = act.variable_name;
                o["vendor_guid"] = act.vendor_guid;
                o["data"] = act.data;
                break;
            case Action::Type::GetVariable:
                o["name"] = act.variable_name;
                o["vendor_guid"] = act.vendor_guid;
                break;
            case Action::Type::CreateEventEx:
                o["group_guid"] = act.group_guid;
                break;
            case Action::Type::DropEspFile:
                o["path"] = act.path;
                o["content"] = act.content;
                break;
        }
        if (act.forced_status) o["forced_status"] = *act.forced_status;
        j["actions"].push_back(std::move(o));
    }
    return j.dump(2);
}

Scenario load_builtin_scenario(const std::string& name) {
    return scenario_from_json(builtin_scenario_json(name));
}

}  // namespace peacock::sim
