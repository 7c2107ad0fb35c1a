#include "peacock/agent.hpp"

#include <random>

#include <nlohmann/json.hpp>

#include "peacock/encoding.hpp"
#include "peacock/errors.hpp"

namespace peacock::agent {

namespace {

using json = nlohmann::ordered_json;

constexpr uint64_t kProxyBase = 0x7E100000;
constexpr uint64_t kProxySpacing = 0x40;

std::string session_uuid_from_seed(uint64_t seed) {
    std::mt19937_64 rng(seed);
    uint8_t bytes[16];
    for (int i = 0; i < 16; i += 8) {
        uint64_t v = rng();
        for (int k = 0; k < 8; ++k) bytes[i + k] = static_cast<uint8_t>(v >> (8 * k));
    }
    bytes[6] = static_cast<uint8_t>((bytes[6] & 0x0F) | 0x40);  // version 4
    bytes[8] = static_cast<uint8_t>((bytes[8] & 0x3F) | 0x80);  // RFC 4122 variant
    static constexpr char digits[] = "0123456789ABCDEF";
    std::string out;
    for (int i = 0; i < 16; ++i) {
        if (i == 4 || i == 6 || i == 8 || i == 10) out.push_back('-');
        out.push_back(digits[bytes[i] >> 4]);
        out.push_back(digits[bytes[i] & 0x0F]);
    }
    return out;
}

}  // namespace

AgentConfig agent_config_from_json(const std::string& text) {
    json j = json::parse(text);
    AgentConfig cfg;
    if (j.contains("whitelist"))
        for (const auto& v : j.at("whitelist")) cfg.whitelist.push_back(v.get<std::string>());
    std::string policy = j.value("policy", std::string("fail-open"));
    if (policy == "fail-secure")
        cfg.policy = Policy::FailSecure;
    else if (policy == "fail-open")
        cfg.policy = Policy::FailOpen;
    else
        throw Error("agent config: policy must be 'fail-secure' or 'fail-open'");
    cfg.pcr_index = j.value("pcr_index", 23);
    if (cfg.pcr_index < 0 || cfg.pcr_index >= tpm::kPcrCount) throw InvalidPcrIndex(cfg.pcr_index);
    if (j.contains("monitored_services")) {
        std::vector<std::string> monitored;
        for (const auto& v : j.at("monitored_services")) monitored.push_back(v.get<std::string>());
        cfg.monitored_services = std::move(monitored);
    }
    return cfg;
}

std::string agent_config_to_json(const AgentConfig& config) {
    json j;
    j["whitelist"] = config.whitelist;
    j["policy"] = config.policy == Policy::FailSecure ? "fail-secure" : "fail-open";
    j["pcr_index"] = config.pcr_index;
    if (config.monitored_services) j["monitored_services"] = *config.monitored_services;
    return j.dump(2);
}

const HookRecord* HookSet::find(std::string_view service) const {
    for (const auto& r : records)
        if (r.service == service) return &r;
    return nullptr;
}

Agent::Agent(tpm::SoftTpm& tpm, AgentConfig config, uint64_t seed)
    : tpm_(tpm), config_(std::move(config)), session_id_(session_uuid_from_seed(seed)) {
    if (config_.pcr_index < 0 || config_.pcr_index >= tpm::kPcrCount)
        throw InvalidPcrIndex(config_.pcr_index);
}

bool Agent::monitored(std::string_view service) const {
    if (!config_.monitored_services) return true;
    for (const auto& s : *config_.monitored_services)
        if (s == service) return true;
    return false;
}

bool Agent::whitelisted(const std::string& identity) const {
    for (const auto& w : config_.whitelist)
        if (w == identity) return true;
    return false;
}

crypto::Digest32 Agent::measure_entry(tpm::SoftTpm& tpm, int pcr_index, const std::string& line) {
    return tpm.pcr_extend(pcr_index, crypto::sha256(line));
}

void Agent::emit(log::EntryBody body, uint64_t tick, uint64_t cid) {
    log::RawLogEntry entry;
    entry.lid = next_lid_++;
    entry.t = tick;
    entry.cid = cid;
    entry.body = std::move(body);
    std::string line = log::format_entry(entry);
    measure_entry(tpm_, config_.pcr_index, line);
    transcript_.push_back(std::move(entry));
    lines_.push_back(std::move(line));
}

HookSet& Agent::install_hooks(sim::SimEnvironment& env) {
    if (installed_) throw AlreadyInstalled();

    uint64_t index = 0;
    for (auto* table : {&env.boot_table, &env.runtime_table}) {
        for (auto& [name, slot] : table->entries) {
            ++index;
            if (!monitored(name)) continue;
            sim::Handler proxy;
            proxy.kind = sim::Handler::Kind::AgentProxy;
            proxy.forward = slot.current_target;
            proxy.address = kProxyBase + index * kProxySpacing;
            sim::HandlerId proxy_id = env.add_handler(std::move(proxy));
            hooks_.records.push_back({name, slot.current_target, proxy_id});
            slot.current_target = proxy_id;
        }
        sim::refresh_table_crc(*table);
    }
    installed_ = true;

    log::HeaderBody header;
    header.session_id = session_id_;
    header.vendor = env.firmware_meta.vendor;
    header.version = env.firmware_meta.version;
    header.release_date = env.firmware_meta.release_date;
    emit(std::move(header), env.take_tick(), 0);
    return hooks_;
}

InvokeOutcome Agent::intercept(sim::SimEnvironment& env, const sim::ImageDescriptor* caller,
                               const std::string& service, uint64_t service_address,
                               std::span<const log::NamedValue> args, const ForwardFn& forward) {
    uint64_t cid = next_cid_++;

    std::string caller_key = caller ? caller->identity : "Unknown";
    if (!seen_callers_.contains(caller_key)) {
        seen_callers_.insert(caller_key);
        log::CheckCallerBody cc;
        if (!caller) {
            cc.kind = log::CallerKind::Unknown;
            cc.identity = "Unknown";
        } else {
            cc.kind = caller->is_guid_identity() ? log::CallerKind::Guid : log::CallerKind::Path;
            cc.identity = caller->identity;
            cc.start_address = caller->start_address;
            cc.end_address = caller->end_address;
        }
        emit(std::move(cc), env.take_tick(), cid);
    }

    log::EnterBody enter;
    enter.service = service;
    enter.service_address = service_address;
    enter.args.assign(args.begin(), args.end());
    emit(std::move(enter), env.take_tick(), cid);

    ++in_flight_;
    InvokeOutcome outcome;
    try {
        outcome = forward();
    } catch (...) {
        --in_flight_;
        throw;
    }
    --in_flight_;

    log::ExitBody exit_body;
    exit_body.service = service;
    exit_body.service_address = service_address;
    exit_body.outs = outcome.outs;
    exit_body.ret_status = outcome.status;
    emit(std::move(exit_body), env.take_tick(), cid);
    return outcome;
}

std::vector<IntegrityVerdict> Agent::check_hook_integrity(sim::SimEnvironment& env) {
    std::vector<IntegrityVerdict> verdicts;
    if (!installed_) return verdicts;

    for (auto* table : {&env.boot_table, &env.runtime_table}) {
        for (auto& [name, slot] : table->entries) {
            if (!monitored(name)) continue;
            const sim::Handler& top = env.handler(slot.current_target);
            if (top.kind == sim::Handler::Kind::AgentProxy) continue;

            std::string hooked_by =
                top.kind == sim::Handler::Kind::External ? top.owner : "Unknown";
            bool allowed = whitelisted(hooked_by);
            verdicts.push_back({name, hooked_by, allowed});

            if (allowed) {
                // Re-establish monitoring above the authorized hook; the
                // displaced proxy stays in the chain and stays silent.
                sim::Handler proxy;
                proxy.kind = sim::Handler::Kind::AgentProxy;
                proxy.forward = slot.current_target;
                proxy.address = kProxyBase + env.handlers.size() * kProxySpacing;
                sim::HandlerId proxy_id = env.add_handler(std::move(proxy));
                slot.current_target = proxy_id;
                sim::refresh_table_crc(*table);
                for (auto& rec : hooks_.records)
                    if (rec.service == name) rec.proxy = proxy_id;
            }

            log::HookCheckBody hc;
            hc.service = name;
            hc.hooked_by = hooked_by;
            hc.whitelisted = allowed;
            emit(std::move(hc), env.take_tick(), 0);

            if (!allowed && config_.policy == Policy::FailSecure) {
                env.halted = true;
                log::HaltBody halt;
                halt.reason = "unauthorized hook on " + name + " by " + hooked_by;
                emit(std::move(halt), env.take_tick(), 0);
                return verdicts;
            }
        }
    }
    return verdicts;
}

std::string Agent::finalize_and_export(sim::SimEnvironment& env) const {
    std::string content;
    for (std::size_t i = 0; i < lines_.size(); ++i) {
        if (i) content += '\n';
        content += lines_[i];
    }
    env.esp_files[kEspLogPath] = std::move(content);
    return kEspLogPath;
}

crypto::Digest32 Agent::pcr_value() const { return tpm_.pcr_read(config_.pcr_index); }

// Free-standing form of the measurement step: format, hash, extend.
crypto::Digest32 measure_entry(tpm::SoftTpm& tpm, int pcr_index, const log::RawLogEntry& entry) {
    return tpm.pcr_extend(pcr_index, crypto::sha256(log::format_entry(entry)));
}

}  // namespace peacock::agent
