#pragma once

#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "peacock/log_entry.hpp"
#include "peacock/sim.hpp"
#include "peacock/soft_tpm.hpp"

namespace peacock::agent {

enum class Policy { FailSecure, FailOpen };

struct AgentConfig {
    std::vector<std::string> whitelist;  // image identities authorized to hook
    Policy policy = Policy::FailOpen;
    std::optional<std::vector<std::string>> monitored_services;
    int pcr_index = 23;
};

AgentConfig agent_config_from_json(const std::string& text);
std::string agent_config_to_json(const AgentConfig& config);

struct HookRecord {
    std::string service;
    sim::HandlerId original_target = 0;
    sim::HandlerId proxy = 0;
};

struct HookSet {
    std::vector<HookRecord> records;
    const HookRecord* find(std::string_view service) const;
};

struct IntegrityVerdict {
    std::string service;
    std::string hooked_by;
    bool whitelisted = false;
};

struct InvokeOutcome {
    std::vector<log::NamedValue> outs;
    std::string status = "Success";
};

using ForwardFn = std::function<InvokeOutcome()>;

inline constexpr char kEspLogPath[] = "\\EFI\\peacock\\boot.log";

// The simulated Peacock UEFI agent. Owns the session transcript; every record
// is measured into the soft TPM's PCR before the next one is produced.
class Agent {
  public:
    Agent(tpm::SoftTpm& tpm, AgentConfig config, uint64_t seed);

    // Proxies every table slot (or the monitored subset), captures original
    // targets, and emits the measured header record. Throws AlreadyInstalled.
    HookSet& install_hooks(sim::SimEnvironment& env);
    bool installed() const { return installed_; }

    // Proxy behavior for one service invocation: CheckCaller on a caller's
    // first call, Enter, forward to the original chain, Exit. Returns the
    // forwarded outcome unmodified. `caller` may be null (logged as Unknown).
    InvokeOutcome intercept(sim::SimEnvironment& env, const sim::ImageDescriptor* caller,
                            const std::string& service, uint64_t service_address,
                            std::span<const log::NamedValue> args, const ForwardFn& forward);

    // Scans both tables for non-proxy targets. Whitelisted hooks are chained
    // under a fresh proxy; non-whitelisted ones raise a HookCheck alert record
    // and, under FailSecure, halt the environment with a Halt record.
    std::vector<IntegrityVerdict> check_hook_integrity(sim::SimEnvironment& env);

    // Serializes the transcript to the fixed ESP path; returns that path.
    std::string finalize_and_export(sim::SimEnvironment& env) const;

    const AgentConfig& config() const { return config_; }
    const std::string& session_id() const { return session_id_; }
    const std::vector<log::RawLogEntry>& transcript() const { return transcript_; }
    std::vector<std::string> transcript_lines() const { return lines_; }
    crypto::Digest32 pcr_value() const;

    // True while an invocation is already being logged; lets a re-installed
    // proxy deeper in a whitelisted hook chain forward without double-logging.
    bool invocation_in_flight() const { return in_flight_ > 0; }

  private:
    void emit(log::EntryBody body, uint64_t tick, uint64_t cid);
    static crypto::Digest32 measure_entry(tpm::SoftTpm& tpm, int pcr_index,
                                          const std::string& line);
    bool monitored(std::string_view service) const;
    bool whitelisted(const std::string& identity) const;

    tpm::SoftTpm& tpm_;
    AgentConfig config_;
    std::string session_id_;
    HookSet hooks_;
    bool installed_ = false;
    uint64_t next_lid_ = 1;
    uint64_t next_cid_ = 1;
    int in_flight_ = 0;
    std::set<std::string> seen_callers_;
    std::vector<log::RawLogEntry> transcript_;
    std::vector<std::string> lines_;

    friend class AgentTestAccess;
};

// One measurement step outside an agent: m = SHA-256 of the entry's exact
// line bytes, PCR[index] <- SHA-256(old || m). Returns the new PCR value.
crypto::Digest32 measure_entry(tpm::SoftTpm& tpm, int pcr_index, const log::RawLogEntry& entry);

}  // namespace peacock::agent
