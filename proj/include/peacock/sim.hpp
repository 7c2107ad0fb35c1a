#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "peacock/log_entry.hpp"

namespace peacock::sim {

enum class TableKind { Boot, Runtime };

enum class ServiceCategory {
    EventTimerTpl,
    MemoryAllocation,
    ProtocolHandler,
    Image,
    MiscBoot,
    Variable,
    Time,
    VirtualMemory,
    MiscRuntime,
};

struct ServiceInfo {
    std::string_view name;
    TableKind table;
    ServiceCategory category;
};

// The full simulated UEFI 2.10-style inventory: 45 boot services
// (9 event/timer/TPL, 5 memory, 18 protocol handler, 6 image, 7 misc)
// and 20 runtime services (8 variable, 4 time, 2 virtual memory, 6 misc).
std::span<const ServiceInfo> service_inventory();
const ServiceInfo* find_service(std::string_view name);

using HandlerId = uint32_t;

struct Handler {
    enum class Kind { PassThrough, AgentProxy, External };
    Kind kind = Kind::PassThrough;
    std::string owner;                  // image identity for External handlers
    std::optional<HandlerId> forward;   // next handler in the chain
    uint64_t address = 0;
};

struct ServiceSlot {
    HandlerId current_target = 0;
    HandlerId original_target = 0;
    bool operator==(const ServiceSlot&) const = default;
};

struct ServiceTable {
    TableKind kind = TableKind::Boot;
    uint32_t header_crc32 = 0;
    std::vector<std::pair<std::string, ServiceSlot>> entries;  // specification order

    ServiceSlot* find(std::string_view service);
    const ServiceSlot* find(std::string_view service) const;
    bool operator==(const ServiceTable&) const = default;
};

enum class Origin { FirmwareVolume, Esp, OpRom, Shell };

struct ImageDescriptor {
    std::string identity;  // canonical uppercase GUID text or ESP file path
    Origin origin = Origin::FirmwareVolume;
    uint64_t start_address = 0;
    uint64_t end_address = 0;
    bool is_guid_identity() const;
    bool operator==(const ImageDescriptor&) const = default;
};

struct EventRegistration {
    std::string group_guid;
    std::string registrant;
};

struct FirmwareMeta {
    std::string vendor;
    std::string version;
    std::string release_date;
};

struct SimEnvironment {
    FirmwareMeta firmware_meta;
    ServiceTable boot_table;
    ServiceTable runtime_table;
    std::vector<Handler> handlers;  // HandlerId indexes into this registry
    std::vector<ImageDescriptor> loaded_images;
    std::map<std::pair<std::string, std::string>, std::string> nvram;  // (name, vendor guid)
    std::map<std::string, std::string> esp_files;
    std::vector<EventRegistration> event_registrations;
    uint64_t tick = 0;
    uint64_t tick_stride = 997;
    bool halted = false;

    // Monotonic source for synthesized handle/interface addresses, so runs are
    // reproducible with or without the agent installed.
    uint64_t next_object_address();
    uint64_t object_address_counter = 0;

    uint64_t take_tick();  // current tick, then advance by stride

    ServiceTable& table_for(std::string_view service);
    Handler& handler(HandlerId id) { return handlers[id]; }
    const Handler& handler(HandlerId id) const { return handlers[id]; }
    HandlerId add_handler(Handler h);

    const ImageDescriptor* find_loaded(std::string_view identity) const;
};

SimEnvironment build_environment(FirmwareMeta meta);

// CRC-32 over the canonical serialization of one table: service names in
// inventory order, each followed by its current_target as 8-byte LE.
uint32_t compute_table_crc32(const ServiceTable& table);
bool table_crc_valid(const ServiceTable& table);
void refresh_table_crc(ServiceTable& table);

// Installs an external (non-agent) hook on top of the service's current chain.
void apply_external_hook(SimEnvironment& env, std::string_view service,
                         const std::string& by_image, bool recompute_crc);
// Pops the top external hook, restoring the previous target.
void remove_external_hook(SimEnvironment& env, std::string_view service, bool recompute_crc);

}  // namespace peacock::sim
