#pragma once

#include <optional>
#include <string>
#include <vector>

#include "peacock/agent.hpp"
#include "peacock/scenario.hpp"
#include "peacock/sim.hpp"

namespace peacock::sim {

struct RunResult {
    std::vector<log::RawLogEntry> transcript;  // empty when run unmonitored
    std::vector<std::string> lines;
    std::vector<agent::InvokeOutcome> outcomes;  // one per service invocation
    bool halted = false;
};

// Routes one call through the service's current handler chain. The agent's
// proxy logs at most once per invocation even if it appears twice in a
// whitelisted re-hook chain. Pass agent=nullptr to run unmonitored.
agent::InvokeOutcome invoke_service(SimEnvironment& env, agent::Agent* agent,
                                    const ImageDescriptor* caller, const std::string& service,
                                    std::vector<log::NamedValue> args,
                                    const std::optional<std::string>& forced_status = {});

// Executes the scenario's actions in listed order, checking hook integrity
// after every action. The agent (when present) must already be installed.
RunResult run_scenario(SimEnvironment& env, const Scenario& scenario, agent::Agent* agent);

}  // namespace peacock::sim
