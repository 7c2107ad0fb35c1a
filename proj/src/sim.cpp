#include "peacock/sim.hpp"

#include <array>

#include "peacock/crc32.hpp"
#include "peacock/errors.hpp"

namespace peacock::sim {

namespace {

using enum TableKind;
using enum ServiceCategory;

// UEFI 2.10-style inventory at the category counts of the boot/runtime service
// tables (45 + 20). Real UEFI service names first; the remaining slots use
// adjacent names from the wider ecosystem (the reserved boot-table member,
// the image entry point, EDK II variable-policy entry points, PI status-code
// reporting).
constexpr std::array<ServiceInfo, 65> kInventory = {{
    // Event, Timer, and Task Priority Services (9)
    {"RaiseTPL", Boot, EventTimerTpl},
    {"RestoreTPL", Boot, EventTimerTpl},
    {"CreateEvent", Boot, EventTimerTpl},
    {"SetTimer", Boot, EventTimerTpl},
    {"WaitForEvent", Boot, EventTimerTpl},
    {"SignalEvent", Boot, EventTimerTpl},
    {"CloseEvent", Boot, EventTimerTpl},
    {"CheckEvent", Boot, EventTimerTpl},
    {"CreateEventEx", Boot, EventTimerTpl},
    // Memory Allocation Services (5)
    {"AllocatePages", Boot, MemoryAllocation},
    {"FreePages", Boot, MemoryAllocation},
    {"GetMemoryMap", Boot, MemoryAllocation},
    {"AllocatePool", Boot, MemoryAllocation},
    {"FreePool", Boot, MemoryAllocation},
    // Protocol Handler Services (18)
    {"InstallProtocolInterface", Boot, ProtocolHandler},
    {"ReinstallProtocolInterface", Boot, ProtocolHandler},
    {"UninstallProtocolInterface", Boot, ProtocolHandler},
    {"HandleProtocol", Boot, ProtocolHandler},
    {"Reserved", Boot, ProtocolHandler},
    {"RegisterProtocolNotify", Boot, ProtocolHandler},
    {"LocateHandle", Boot, ProtocolHandler},
    {"LocateDevicePath", Boot, ProtocolHandler},
    {"ConnectController", Boot, ProtocolHandler},
    {"DisconnectController", Boot, ProtocolHandler},
    {"OpenProtocol", Boot, ProtocolHandler},
    {"CloseProtocol", Boot, ProtocolHandler},
    {"OpenProtocolInformation", Boot, ProtocolHandler},
    {"ProtocolsPerHandle", Boot, ProtocolHandler},
    {"LocateHandleBuffer", Boot, ProtocolHandler},
    {"LocateProtocol", Boot, ProtocolHandler},
    {"InstallMultipleProtocolInterfaces", Boot, ProtocolHandler},
    {"UninstallMultipleProtocolInterfaces", Boot, ProtocolHandler},
    // Image Services (6)
    {"LoadImage", Boot, Image},
    {"StartImage", Boot, Image},
    {"UnloadImage", Boot, Image},
    {"ImageEntryPoint", Boot, Image},
    {"Exit", Boot, Image},
    {"ExitBootServices", Boot, Image},
    // Miscellaneous Boot Services (7)
    {"SetWatchdogTimer", Boot, MiscBoot},
    {"Stall", Boot, MiscBoot},
    {"CopyMem", Boot, MiscBoot},
    {"SetMem", Boot, MiscBoot},
    {"GetNextMonotonicCount", Boot, MiscBoot},
    {"InstallConfigurationTable", Boot, MiscBoot},
    {"CalculateCrc32", Boot, MiscBoot},
    // Variable Services (8)
    {"GetVariable", Runtime, Variable},
    {"GetNextVariableName", Runtime, Variable},
    {"SetVariable", Runtime, Variable},
    {"QueryVariableInfo", Runtime, Variable},
    {"RegisterVariablePolicy", Runtime, Variable},
    {"LockVariablePolicy", Runtime, Variable},
    {"IsVariablePolicyEnabled", Runtime, Variable},
    {"RequestToLockVariable", Runtime, Variable},
    // Time Services (4)
    {"GetTime", Runtime, Time},
    {"SetTime", Runtime, Time},
    {"GetWakeupTime", Runtime, Time},
    {"SetWakeupTime", Runtime, Time},
    // Virtual Memory Services (2)
    {"SetVirtualAddressMap", Runtime, VirtualMemory},
    {"ConvertPointer", Runtime, VirtualMemory},
    // Miscellaneous Runtime Services (6)
    {"GetNextHighMonotonicCount", Runtime, MiscRuntime},
    {"ResetSystem", Runtime, MiscRuntime},
    {"UpdateCapsule", Runtime, MiscRuntime},
    {"QueryCapsuleCapabilities", Runtime, MiscRuntime},
    {"ReportStatusCode", Runtime, MiscRuntime},
    {"GetSystemConfigurationTable", Runtime, MiscRuntime},
}};

constexpr uint64_t kPassThroughBase = 0x7F6A0000;
constexpr uint64_t kHandlerSpacing = 0x40;

}  // namespace

std::span<const ServiceInfo> service_inventory() { return kInventory; }

const ServiceInfo* find_service(std::string_view name) {
    for (const auto& info : kInventory)
        if (info.name == name) return &info;
    return nullptr;
}

ServiceSlot* ServiceTable::find(std::string_view service) {
    for (auto& [name, slot] : entries)
        if (name == service) return &slot;
    return nullptr;
}

const ServiceSlot* ServiceTable::find(std::string_view service) const {
    for (const auto& [name, slot] : entries)
        if (name == service) return &slot;
    return nullptr;
}

bool ImageDescriptor::is_guid_identity() const {
    if (identity.size() != 36) return false;
    for (std::size_t i = 0; i < 36; ++i) {
        char c = identity[i];
        if (i == 8 || i == 13 || i == 18 || i == 23) {
            if (c != '-') return false;
        } else if (!((c >= '0' && c <= '9') || (c >= 'A' && c <= 'F'))) {
            return false;
        }
    }
    return true;
}

uint64_t SimEnvironment::next_object_address() {
    return 0x7FE00000 + (object_address_counter++) * 0x60;
}

uint64_t SimEnvironment::take_tick() {
    uint64_t now = tick;
    tick += tick_stride;
    return now;
}

ServiceTable& SimEnvironment::table_for(std::string_view service) {
    const ServiceInfo* info = find_service(service);
    if (!info) throw UnknownService(std::string(service));
    return info->table == TableKind::Boot ? boot_table : runtime_table;
}

HandlerId SimEnvironment::add_handler(Handler h) {
    handlers.push_back(std::move(h));
    return static_cast<HandlerId>(handlers.size() - 1);
}

const ImageDescriptor* SimEnvironment::find_loaded(std::string_view identity) const {
    for (const auto& img : loaded_images)
        if (img.identity == identity) return &img;
    return nullptr;
}

SimEnvironment build_environment(FirmwareMeta meta) {
    SimEnvironment env;
    env.firmware_meta = std::move(meta);
    env.boot_table.kind = TableKind::Boot;
    env.runtime_table.kind = TableKind::Runtime;

    uint64_t index = 0;
    for (const auto& info : kInventory) {
        Handler builtin;
        builtin.kind = Handler::Kind::PassThrough;
        builtin.address = kPassThroughBase + index * kHandlerSpacing;
        HandlerId id = env.add_handler(std::move(builtin));
        auto& table = info.table == TableKind::Boot ? env.boot_table : env.runtime_table;
        table.entries.emplace_back(std::string(info.name), ServiceSlot{id, id});
        ++index;
    }
    refresh_table_crc(env.boot_table);
    refresh_table_crc(env.runtime_table);
    return env;
}

uint32_t compute_table_crc32(const ServiceTable& table) {
    std::vector<uint8_t> body;
    for (const auto& [name, slot] : table.entries) {
        body.insert(body.end(), name.begin(), name.end());
        uint64_t target = slot.current_target;
        for (int i = 0; i < 8; ++i) body.push_back(static_cast<uint8_t>(target >> (8 * i)));
    }
    return crc32::compute(body);
}

bool table_crc_valid(const ServiceTable& table) {
    return table.header_crc32 == compute_table_crc32(table);
}

void refresh_table_crc(ServiceTable& table) { table.header_crc32 = compute_table_crc32(table); }

void apply_external_hook(SimEnvironment& env, std::string_view service,
                         const std::string& by_image, bool recompute_crc) {
    ServiceTable& table = env.table_for(service);
    ServiceSlot* slot = table.find(service);
    if (!slot) throw UnknownService(std::string(service));
    const ImageDescriptor* img = env.find_loaded(by_image);
    if (!img) throw ScenarioReferenceError("hooking image not loaded: " + by_image);

    Handler hook;
    hook.kind = Handler::Kind::External;
    hook.owner = by_image;
    hook.forward = slot->current_target;
    hook.address = img->start_address + 0x100 + env.handlers.size() * kHandlerSpacing;
    slot->current_target = env.add_handler(std::move(hook));
    if (recompute_crc) refresh_table_crc(table);
}

void remove_external_hook(SimEnvironment& env, std::string_view service, bool recompute_crc) {
    ServiceTable& table = env.table_for(service);
    ServiceSlot* slot = table.find(service);
    if (!slot) throw UnknownService(std::string(service));
    const Handler& top = env.handler(slot->current_target);
    if (top.kind != Handler::Kind::External || !top.forward)
        throw Error("no external hook installed on " + std::string(service));
    slot->current_target = *top.forward;
    if (recompute_crc) refresh_table_crc(table);
}

}  // namespace peacock::sim
