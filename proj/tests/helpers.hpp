#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "peacock/agent.hpp"
#include "peacock/bundle.hpp"
#include "peacock/encoding.hpp"
#include "peacock/os_agent.hpp"
#include "peacock/runner.hpp"
#include "peacock/scenario.hpp"
#include "peacock/soft_tpm.hpp"
#include "peacock/verifier.hpp"

namespace test_helpers {

// A scratch directory removed at scope exit.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("peacock-test-" + tag + "-" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string str() const { return path.string(); }
    std::string sub(const std::string& name) const { return (path / name).string(); }
};

struct BootRun {
    peacock::tpm::SoftTpm tpm;
    peacock::sim::SimEnvironment env;
    peacock::sim::RunResult result;
    std::string raw_log;
    std::string session_id;

    BootRun(peacock::tpm::SoftTpm t) : tpm(std::move(t)) {}
};

// Builds the environment, installs the agent, runs the scenario, and exports
// the log — the boot half of the pipeline.
inline BootRun run_boot(const peacock::sim::Scenario& scenario,
                        const peacock::agent::AgentConfig& config = {},
                        const std::string& device_id = "dev-1", uint64_t seed = 7) {
    BootRun run(peacock::tpm::SoftTpm(device_id, seed));
    run.env = peacock::sim::build_environment(scenario.firmware_meta);
    run.env.tick = scenario.tick_start;
    run.env.tick_stride = scenario.tick_stride;
    peacock::agent::Agent boot_agent(run.tpm, config, seed);
    boot_agent.install_hooks(run.env);
    run.result = peacock::sim::run_scenario(run.env, scenario, &boot_agent);
    boot_agent.finalize_and_export(run.env);
    auto collected = peacock::osagent::collect(run.env);
    run.raw_log = collected.raw_log;
    run.session_id = collected.session_id;
    return run;
}

inline BootRun run_builtin(const std::string& name,
                           const peacock::agent::AgentConfig& config = {},
                           const std::string& device_id = "dev-1", uint64_t seed = 7) {
    return run_boot(peacock::sim::load_builtin_scenario(name), config, device_id, seed);
}

// Enrolls the run's device and produces an honest bundle via a fresh challenge.
inline peacock::bundle::AttestationBundle honest_bundle(BootRun& run,
                                                        peacock::server::ServerCore& core,
                                                        const std::string& device_id,
                                                        int pcr_index = 23) {
    if (!core.lookup_device(device_id))
        core.register_device(device_id, run.tpm.ak_public(), false);
    auto challenge = core.issue_challenge(device_id);
    auto nonce_bytes = peacock::encoding::from_hex(challenge.nonce_hex);
    peacock::crypto::Digest32 nonce{};
    std::copy(nonce_bytes.begin(), nonce_bytes.end(), nonce.begin());
    return peacock::osagent::build_bundle(run.raw_log, run.tpm, nonce, device_id, pcr_index);
}

inline peacock::server::ServerConfig server_config(const TempDir& dir) {
    peacock::server::ServerConfig cfg;
    cfg.data_dir = dir.sub("data");
    cfg.sink_dir = dir.sub("sink");
    return cfg;
}

}  // namespace test_helpers
